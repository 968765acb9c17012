#pragma once

#include "plateau/disc_harmonic.hpp"

#include <Eigen/Dense>

namespace plateau {

/// Disc automorphism w ↦ e^{iθ}(w − a)/(1 − ā w).
class MobiusAut {
 public:
  MobiusAut() = default;
  MobiusAut(Complex a, double theta);

  Complex a() const { return a_; }
  double theta() const { return theta_; }

  Complex operator()(Complex w) const;
  /// Boundary action on angles: arg Φ(e^{iθ}) in [0, 2π).
  double angle(double theta) const;

  MobiusAut inverse() const;
  Eigen::Matrix2cd matrix() const;
  /// Automorphism of a 2x2 coefficient matrix (any nonzero scale).
  static MobiusAut from_matrix(const Eigen::Matrix2cd& m);

 private:
  Complex a_{0.0, 0.0};
  double theta_ = 0.0;
};

/// f ∘ g.
MobiusAut compose(const MobiusAut& f, const MobiusAut& g);

/// The unique automorphism with Φ(w₀) = −1, Φ(w₁) = −i, Φ(w₂) = 1.
/// The points must lie on the unit circle, be distinct and run
/// counterclockwise; otherwise ParameterError.
MobiusAut normalize_three_points(Complex w0, Complex w1, Complex w2);

/// X ∘ Φ sampled on `target`: interior nodes by barycentric interpolation on
/// the source mesh, boundary nodes through the boundary trace at arg Φ.
DiscSurface pullback(const DiscSurface& x, const MobiusAut& phi, std::shared_ptr<const DiscMesh> target);

}  // namespace plateau
