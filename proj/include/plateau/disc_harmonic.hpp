#pragma once

#include "plateau/common.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace plateau {

using Triangle = std::array<int, 3>;

/// Triangulated closed unit disc. Boundary nodes (|w| = 1) are kept in
/// counterclockwise order starting at the smallest angle. Construction
/// assembles the cotangent stiffness matrix and factors its interior block.
class DiscMesh {
 public:
  DiscMesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  std::size_t boundary_count() const { return boundary_.size(); }

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const Vec2& node(std::size_t i) const { return nodes_[i]; }
  const Triangle& triangle(std::size_t t) const { return triangles_[t]; }

  /// Boundary node indices, counterclockwise.
  const std::vector<int>& boundary_cycle() const { return boundary_; }
  const std::vector<double>& boundary_angles() const { return boundary_angles_; }
  /// -1 for interior nodes, else position in the boundary cycle.
  int boundary_position(std::size_t node) const { return boundary_pos_[node]; }
  const std::vector<int>& interior_nodes() const { return interior_; }
  int interior_position(std::size_t node) const { return interior_pos_[node]; }

  double triangle_area(std::size_t t) const;
  double max_edge_length() const { return max_edge_; }
  double mean_edge_weight() const { return mean_weight_; }

  /// Stiffness matrix K with u^T K u = ∫|∇u|² for piecewise-linear u.
  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }

  /// Interior values of the discrete harmonic function with the given
  /// boundary values (ordered by boundary cycle), one column per coordinate.
  Eigen::MatrixXd solve_interior(const Eigen::MatrixXd& boundary_values) const;

  /// Dense Dirichlet-to-Neumann matrix S on boundary nodes:
  /// min over interior extensions of ½ uᵀKu equals ½ gᵀSg.
  Eigen::MatrixXd schur_complement() const;

  struct Location {
    std::size_t triangle;
    Eigen::Vector3d barycentric;
  };
  /// Triangle containing w (tolerance 1e-12 in barycentric coordinates).
  std::optional<Location> locate(const Vec2& w) const;

  /// Triangles sharing at least one vertex with t (t excluded).
  const std::vector<int>& triangle_neighbors(std::size_t t) const { return tri_neighbors_[t]; }
  const std::vector<std::vector<int>>& node_triangles() const { return node_tris_; }

 private:
  void validate() const;
  void assemble();
  void build_locator();

  std::vector<Vec2> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<int> boundary_;
  std::vector<double> boundary_angles_;
  std::vector<int> boundary_pos_;
  std::vector<int> interior_;
  std::vector<int> interior_pos_;
  std::vector<std::vector<int>> node_tris_;
  std::vector<std::vector<int>> tri_neighbors_;
  double max_edge_ = 0.0;
  double mean_weight_ = 0.0;

  Eigen::SparseMatrix<double> stiffness_;
  Eigen::SparseMatrix<double> k_ii_;
  Eigen::SparseMatrix<double> k_ib_;
  Eigen::SparseMatrix<double> k_bb_;
  std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> factor_;

  int grid_ = 0;
  std::vector<std::vector<int>> buckets_;
};

/// Quasi-uniform disc: concentric rings k = 1..radial_levels with 6k nodes
/// at radius k/radial_levels, Delaunay-flipped. Needs radial_levels >= 3.
std::shared_ptr<const DiscMesh> build_mesh(int radial_levels);

int euler_characteristic(const DiscMesh& mesh);
/// Smallest interior angle over all triangles, radians.
double min_triangle_angle(const DiscMesh& mesh);

/// Per-node ℝ³ values over a disc mesh.
struct DiscSurface {
  std::shared_ptr<const DiscMesh> mesh;
  std::vector<Vec3> values;
  bool is_harmonic = false;

  /// Boundary values in boundary-cycle order.
  std::vector<Vec3> boundary_values() const;
};

/// Samples f at every mesh node.
template <class F>
DiscSurface sample_surface(std::shared_ptr<const DiscMesh> mesh, F&& f) {
  DiscSurface s;
  s.values.reserve(mesh->node_count());
  for (const auto& w : mesh->nodes()) s.values.push_back(f(w));
  s.mesh = std::move(mesh);
  return s;
}

DiscSurface harmonic_extension(std::shared_ptr<const DiscMesh> mesh, std::span<const Vec3> boundary_values);

/// Largest interior residual of the discrete Laplace equation, per coordinate.
double laplace_residual(const DiscSurface& x);

/// Per-triangle partial derivatives of the affine interpolant.
struct TriangleGradient {
  Vec3 du;
  Vec3 dv;
};
std::vector<TriangleGradient> triangle_gradients(const DiscSurface& x);

double dirichlet_energy(const DiscSurface& x);

struct ComplexDerivativeField {
  std::vector<CVec3> xw;  // ½(X_u − i X_v) per triangle
  std::vector<Vec2> barycenters;
};
ComplexDerivativeField complex_derivative(const DiscSurface& x);

struct ConformalityResidual {
  double value = 0.0;
  double mean_e = 0.0;
  bool degenerate = false;  // mean E vanished (constant map)
};
/// area-mean of sqrt((|X_u|²−|X_v|²)² + 4⟨X_u,X_v⟩²) / (2 mean E), where
/// E = ½(|X_u|²+|X_v|²) per triangle. Pointwise this is |X_w·X_w| / |X_w|²,
/// so the value lies in [0, 1] and stays finite at corner singularities.
ConformalityResidual conformality_residual(const DiscSurface& x);

/// Piecewise-linear evaluation at an arbitrary point of the closed disc.
/// Points in the thin caps between the boundary chords and the unit circle
/// are projected radially onto the chord. Throws ParameterError when
/// |w| > 1 + 1e-9.
Vec3 evaluate(const DiscSurface& x, const Vec2& w);

/// Boundary value at angle theta, linear in angle between boundary nodes.
Vec3 evaluate_boundary(const DiscSurface& x, double theta);

}  // namespace plateau
