#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gaugelab {

struct Check {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed() const { return residual <= tolerance; }
};

// Named residuals plus free-form numeric observations (values that are reported, not gated).
struct Report {
  std::string title;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, double>> values;

  void add(std::string name, double residual, double tolerance) {
    checks.push_back({std::move(name), residual, tolerance});
  }
  void note(std::string name, double value) { values.emplace_back(std::move(name), value); }
  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed()) return false;
    return true;
  }
  void merge(const Report& other, const std::string& prefix = {}) {
    for (auto c : other.checks) {
      c.name = prefix + c.name;
      checks.push_back(std::move(c));
    }
    for (auto v : other.values) values.emplace_back(prefix + v.first, v.second);
  }
};

}  // namespace gaugelab
