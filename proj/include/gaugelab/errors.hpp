#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gaugelab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionNotSupported : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct InvalidArgument : Error { using Error::Error; };
struct NonMajoranaInput : Error { using Error::Error; };
struct OutsideTimeGrid : Error { using Error::Error; };
struct OperatorNotHyperbolic : Error { using Error::Error; };
struct NotAGaugeTheory : Error { using Error::Error; };
struct FamilyTooSmall : Error { using Error::Error; };
struct KernelMembershipViolation : Error { using Error::Error; };
struct NotASolution : Error { using Error::Error; };
struct OperatorNotFirstOrder : Error { using Error::Error; };
struct WrongModel : Error { using Error::Error; };
struct SolveFailure : Error { using Error::Error; };
struct CatalogueRejection : Error { using Error::Error; };
struct BasisMismatch : Error { using Error::Error; };

// Raised by the CAR layer; carries the direction along which the pairing fails to be positive.
struct NotPositiveDefinite : Error {
  NotPositiveDefinite(const std::string& what, Eigen::VectorXd witness, double value)
      : Error(what), witness(std::move(witness)), value(value) {}
  Eigen::VectorXd witness;
  double value;
};

}  // namespace gaugelab
