#pragma once

#include "plateau/curve.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace plateau {

/// Closed polygon A_0 ... A_{M-1} with three anchor vertices.
struct Polygon {
  std::vector<Vec3> vertices;
  std::array<std::size_t, 3> anchors{};
  /// Curve parameters the vertices were sampled at; empty when unknown.
  std::vector<double> source_params;
  std::uint64_t seed = 0;

  std::size_t size() const { return vertices.size(); }
  const Vec3& vertex(std::size_t k) const { return vertices[k % vertices.size()]; }
  Vec3 edge(std::size_t k) const { return vertex(k + 1) - vertex(k); }
};

struct GenericityCertificate {
  double min_pair_angle = 0.0;
  double min_triple_volume = 0.0;
  double theta_tol = 0.0;
  double volume_tol = 0.0;
  bool passes = false;
};

inline constexpr double kDefaultThetaTol = 1e-6;
inline constexpr double kDefaultVolumeTol = 1e-9;

/// Throws GeometryError unless the polygon has at least 4 vertices, distinct
/// consecutive vertices, distinct in-range anchors and no intersecting
/// non-adjacent edges.
void check_polygon(const Polygon& p);
bool is_simple(const Polygon& p);

double polygon_length(const Polygon& p);
/// Arc-length parameter of every vertex measured from A_0; the extra last
/// entry is the total length.
std::vector<double> vertex_arc_params(const Polygon& p);
/// Turning angles eta_k between the incoming and outgoing edge at A_k.
std::vector<double> exterior_angles(const Polygon& p);
double polygon_total_curvature(const Polygon& p);

/// Point at arc-length parameter s (reduced mod length) on the polygon.
Vec3 polygon_point(const Polygon& p, std::span<const double> arc_params, double s);

Polygon inscribe(const PiecewiseC2Curve& curve, std::size_t n, const std::array<double, 3>& anchor_params);

GenericityCertificate check_generic(const Polygon& p, double theta_tol = kDefaultThetaTol,
                                    double volume_tol = kDefaultVolumeTol);

struct PerturbResult {
  Polygon polygon;
  int rounds = 0;
  GenericityCertificate certificate;
};

/// Displaces non-anchor vertices by at most delta (seeded, reproducible)
/// until the polygon is simple and generic. At most 100 rounds.
PerturbResult perturb_to_generic(const Polygon& p, double delta, std::uint64_t seed,
                                 double theta_tol = kDefaultThetaTol, double volume_tol = kDefaultVolumeTol);

struct ApproximationReport {
  double curve_length = 0.0;
  double polygon_length = 0.0;
  double length_gap = 0.0;
  double curve_total_curvature = 0.0;
  double polygon_total_curvature = 0.0;
  double curvature_gap = 0.0;
  double sup_deviation = 0.0;
  GenericityCertificate certificate;
  bool pass = false;
};

ApproximationReport verify_approximation(const PiecewiseC2Curve& curve, const Polygon& p, double epsilon,
                                         double theta_tol = kDefaultThetaTol,
                                         double volume_tol = kDefaultVolumeTol);

/// Plain-text polygon format: a header "anchors i j k seed s" followed by
/// one "x y z" line per vertex.
void write_polygon(std::ostream& os, const Polygon& p);
Polygon read_polygon(std::istream& is);

}  // namespace plateau
