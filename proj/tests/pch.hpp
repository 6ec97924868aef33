#pragma once

#include <gtest/gtest.h>

#include "gaugelab/quantum_algebra.hpp"
#include "gaugelab/solutions.hpp"
