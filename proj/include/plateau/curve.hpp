#pragma once

#include "plateau/common.hpp"

#include <array>
#include <memory>
#include <span>
#include <vector>

namespace plateau {

/// A single C² piece of a closed curve, parametrized over a global
/// parameter interval [t_begin, t_end].
class Arc {
 public:
  virtual ~Arc() = default;

  virtual Vec3 position(double t) const = 0;
  virtual Vec3 first_derivative(double t) const = 0;
  virtual Vec3 second_derivative(double t) const = 0;
};

/// Straight segment from `from` to `to`, traversed with constant speed over
/// [t0, t1].
class LinearArc final : public Arc {
 public:
  LinearArc(Vec3 from, Vec3 to, double t0, double t1);

  Vec3 position(double t) const override;
  Vec3 first_derivative(double t) const override;
  Vec3 second_derivative(double t) const override;

 private:
  Vec3 from_;
  Vec3 velocity_;
  double t0_;
};

/// Trigonometric polynomial per coordinate:
///   x_c(t) = offset_c + sum_k cos_c[k] cos(k t) + sin_c[k] sin(k t),  k = 1..K.
/// Covers circles, ellipses, perturbed circles and user Fourier curves.
class FourierArc final : public Arc {
 public:
  struct Coefficients {
    Vec3 offset = Vec3::Zero();
    std::vector<Vec3> cos_terms;  // index k-1 holds the k-th harmonic
    std::vector<Vec3> sin_terms;
  };

  explicit FourierArc(Coefficients coeffs);

  Vec3 position(double t) const override;
  Vec3 first_derivative(double t) const override;
  Vec3 second_derivative(double t) const override;

  const Coefficients& coefficients() const { return coeffs_; }

 private:
  Coefficients coeffs_;
};

/// Circular arc c + r (cos(phi) e1 + sin(phi) e2) with phi = phi0 + (t - t0).
class CircularArc final : public Arc {
 public:
  CircularArc(Vec3 center, double radius, Vec3 e1, Vec3 e2, double phi0, double t0);

  Vec3 position(double t) const override;
  Vec3 first_derivative(double t) const override;
  Vec3 second_derivative(double t) const override;

 private:
  Vec3 center_;
  double radius_;
  Vec3 e1_;
  Vec3 e2_;
  double phi0_;
  double t0_;
};

struct CornerAngle {
  double param;
  double angle;  // radians, in (0, pi)
};

/// Closed piecewise-C² Jordan curve assembled from consecutive arcs.
///
/// Arc i lives on [breaks[i], breaks[i+1]]; breaks[0] = 0 and
/// breaks.back() = period. The constructor validates closedness, C⁰
/// junctions, regularity, sampled injectivity and rejects cusps.
class PiecewiseC2Curve {
 public:
  PiecewiseC2Curve(std::vector<std::shared_ptr<const Arc>> arcs, std::vector<double> breaks);

  double period() const { return breaks_.back(); }
  std::size_t arc_count() const { return arcs_.size(); }
  std::span<const double> breaks() const { return breaks_; }

  /// Index of the arc owning parameter t (t reduced mod period).
  std::size_t arc_index(double t) const;

  Vec3 position(double t) const;
  Vec3 first_derivative(double t) const;
  Vec3 second_derivative(double t) const;

  /// Integrand of the smooth curvature part, |γ'×γ''| / |γ'|², on arc i.
  double curvature_density(std::size_t arc, double t) const;
  double speed(std::size_t arc, double t) const;

  /// Unit one-sided tangents at junction j (between arc j-1 and arc j,
  /// cyclically): {incoming, outgoing}.
  std::array<Vec3, 2> junction_tangents(std::size_t junction) const;

  const Arc& arc(std::size_t i) const { return *arcs_[i]; }

 private:
  double reduce(double t) const;
  void validate() const;

  std::vector<std::shared_ptr<const Arc>> arcs_;
  std::vector<double> breaks_;
};

/// Tangent-angle threshold below which a junction counts as smooth.
inline constexpr double kCornerThreshold = 1e-9;

double arc_length(const PiecewiseC2Curve& curve);
/// Length of the parameter range [t0, t1] within a single arc.
double arc_length(const PiecewiseC2Curve& curve, std::size_t arc, double t0, double t1);
std::vector<CornerAngle> corner_angles(const PiecewiseC2Curve& curve);
/// Corner angles plus the integrated curvature of the smooth parts.
double total_curvature(const PiecewiseC2Curve& curve);
/// Integrated curvature of the smooth part over [t0, t1] inside one arc.
double smooth_curvature(const PiecewiseC2Curve& curve, std::size_t arc, double t0, double t1);
std::vector<Vec3> sample(const PiecewiseC2Curve& curve, std::span<const double> params);

// Builtin families.
PiecewiseC2Curve make_circle(double radius = 1.0);
PiecewiseC2Curve make_ellipse(double a, double b);
/// (cos t, sin t, amplitude sin(frequency t)).
PiecewiseC2Curve make_perturbed_circle(double amplitude, int frequency);
PiecewiseC2Curve make_fourier_curve(FourierArc::Coefficients coeffs);
/// Closed polygonal chain; each side gets a parameter span equal to its length.
PiecewiseC2Curve make_polygonal_curve(std::span<const Vec3> vertices);
/// Planar lens of two circular arcs through (±1, 0, 0) whose tangents turn
/// by `corner_turn` at each of the two corners; corner_turn in (0, pi).
PiecewiseC2Curve make_lens(double corner_turn);
/// The unit circle split into `pieces` arcs with smooth junctions.
PiecewiseC2Curve make_split_circle(int pieces);

}  // namespace plateau
