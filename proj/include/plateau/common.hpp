#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace plateau {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Complex = std::complex<double>;
using CVec3 = Eigen::Matrix<Complex, 3, 1>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Error hierarchy. Every failure the library reports derives from Error so
// front-ends can map categories onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller-supplied parameter (sizes, tolerances, orderings).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Non-finite or degenerate values met while evaluating a curve or field.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Input geometry violates a type invariant (non-simple polygon, cusp, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class AnalysisError : public Error {
 public:
  using Error::Error;
};

// A run hypothesis (total curvature gate) is violated.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

// Reduce an angle into [0, 2*pi).
inline double wrap_angle(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

}  // namespace plateau
