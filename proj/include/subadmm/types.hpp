#pragma once

// Scalar/vector aliases and the error types shared by every module.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>

namespace subadmm {

using Real = double;
using Index = Eigen::Index;

template <typename Scalar>
using Vector3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using VectorXT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<Real, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Invalid physical or numerical configuration (non-SPD inertia, negative
// friction, non-physical moduli, ...).
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// API misuse: wrong constraint kind passed to a routine, kinematic body in
// a subsystem, dimension mismatches.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Constraint rows exist but their Jacobian is identically zero.
class DegenerateConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The iteration produced NaN/Inf or diverged. Carries the iteration index.
class SolverAbort : public std::runtime_error {
 public:
  SolverAbort(const std::string& what, int iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

// Malformed scenario document; `what()` starts with the JSON pointer of the
// offending key.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

}  // namespace subadmm
