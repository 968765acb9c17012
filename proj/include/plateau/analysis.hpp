#pragma once

#include "plateau/plateau_solver.hpp"

#include <optional>

namespace plateau {

inline constexpr double kDegenerateCross = 1e-14;
inline constexpr double kMaxDegenerateFraction = 0.05;

struct GaussMap {
  /// Unit normal per triangle; zero for degenerate triangles.
  std::vector<Vec3> normals;
  std::vector<char> degenerate;
  /// Domain-area fraction of degenerate triangles.
  double degenerate_fraction = 0.0;
};

/// N = X_u x X_v / |X_u x X_v| per triangle. Throws AnalysisError when more
/// than 5% of the disc area is degenerate.
GaussMap gauss_map(const DiscSurface& x);

/// Area-vector average of incident non-degenerate triangle normals; zero
/// when a node touches only degenerate triangles.
std::vector<Vec3> node_normals(const DiscSurface& x, const GaussMap& gm);

/// Sum over triangles of the absolute spherical area of the triangle spanned
/// by the three node normals.
double total_gauss_curvature(const DiscSurface& x);

struct InteriorBranch {
  Vec2 location;
  /// Vanishing order of X_w; empty when the winding could not be resolved.
  std::optional<int> order;
  double modulus = 0.0;  // |X_w|² / mean E at the candidate
  bool near_boundary = false;
};

struct VertexOrder {
  std::size_t vertex = 0;
  double preimage = 0.0;
  double exterior_angle = 0.0;
  /// Angle swept by X − A_k along a small arc around the preimage.
  double swept_angle = 0.0;
  int order = 0;
  double rho = 0.0;
  bool low_confidence = false;
};

struct BranchReport {
  std::vector<InteriorBranch> interior;
  std::vector<VertexOrder> vertices;
  /// κ = Σ interior + ½ Σ boundary non-vertex + ½ Σ m_k; empty when any
  /// contributing order is unresolved or flagged.
  std::optional<double> total_order;
};

struct BranchOptions {
  double tol = 1e-4;
  std::uint64_t seed = 1;
};

/// Interior candidates only (no polygon data). Orders by the winding of
/// h = <c, X_w> around a small circle of the mesh.
std::vector<InteriorBranch> detect_interior_branch_points(const DiscSurface& x, const ComplexDerivativeField& field,
                                                          const BranchOptions& opts = {});

/// Full census for a solved surface, including vertex orders from the swept
/// angle of the surface at each polygon vertex.
BranchReport detect_branch_points(const PlateauSolution& sol, const ComplexDerivativeField& field,
                                  const BranchOptions& opts = {});

/// Combines interior and vertex orders per the weighted total-order formula.
std::optional<double> total_branch_order(const BranchReport& br);

struct CurvatureReport {
  double total_abs_curvature = 0.0;
  /// κ(X); unavailable when any contributing order is unresolved or flagged.
  std::optional<double> total_order;
  double gauss_bonnet_lhs = 0.0;  // ∫|K|E + 2π(1+κ), κ = 0 when unavailable
  double gauss_bonnet_rhs = 0.0;  // πΣ|ρ_k|
  std::optional<double> residual;
  double polygon_total_curvature = 0.0;
  double bound_tc_minus_2pi = 0.0;
  /// TC(P) − 2π − ∫|K|E.
  double tc_slack = 0.0;
  /// Σ η_k over vertices with m_k = 0, minus 2π.
  double nonbranch_bound = 0.0;
  double nonbranch_slack = 0.0;
  /// πΣ|ρ_k| − 2π(1+κ): the curvature the branch census predicts.
  double predicted_total = 0.0;
  /// predicted_total < nonbranch_bound.
  bool nonbranch_strict = false;
  double sauvigny_margin = 0.0;
};

CurvatureReport gauss_bonnet_check(const PlateauSolution& sol, const BranchReport& br);
/// Same formulas on caller-supplied inputs.
CurvatureReport gauss_bonnet_check(double total_abs_curvature, const Polygon& p, const BranchReport& br);

/// L(P)²/(4π) − D(X).
double isoperimetric_check(const PlateauSolution& sol);

/// ∫|K|E ≤ 4π − ε.
bool sauvigny_bound_check(const CurvatureReport& report, double epsilon);

}  // namespace plateau
