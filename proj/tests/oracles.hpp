#pragma once

// Reference computations used by the tests. Everything here is written
// against closed-form formulas and brute-force quadrature, never against the
// library's own code paths.

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

// Composite Simpson rule with `panels` (even) subintervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 10000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

// Perturbed circle (cos t, sin t, a sin(k t)) with explicit derivatives.
struct PerturbedCircle {
  double a;
  int k;
  Eigen::Vector3d d1(double t) const { return {-std::sin(t), std::cos(t), a * k * std::cos(k * t)}; }
  Eigen::Vector3d d2(double t) const { return {-std::cos(t), -std::sin(t), -a * k * k * std::sin(k * t)}; }
  double length() const {
    return simpson([&](double t) { return d1(t).norm(); }, 0.0, 2.0 * kPi);
  }
  double total_curvature() const {
    return simpson([&](double t) { return d1(t).cross(d2(t)).norm() / d1(t).squaredNorm(); }, 0.0, 2.0 * kPi);
  }
};

// High-precision values for a = 0.1, k = 3 (30-digit adaptive quadrature).
inline constexpr double kPerturbedLength = 6.42225662339620949002;
inline constexpr double kPerturbedTotalCurvature = 7.23801890940564520969;

// Enneper surface with Weierstrass data f = 1, g = w.
inline Eigen::Vector3d enneper(double u, double v) {
  const std::complex<double> w(u, v);
  const std::complex<double> w3 = w * w * w;
  const std::complex<double> i(0.0, 1.0);
  return {0.5 * std::real(w - w3 / 3.0), 0.5 * std::real(i * (w + w3 / 3.0)), 0.5 * std::real(w * w)};
}

// Stereographic image of g(w) = w.
inline Eigen::Vector3d enneper_normal(double u, double v) {
  const double r2 = u * u + v * v;
  return Eigen::Vector3d(2 * u, 2 * v, r2 - 1.0) / (1.0 + r2);
}

}  // namespace oracle
