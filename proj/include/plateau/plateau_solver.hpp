#pragma once

#include "plateau/disc_harmonic.hpp"
#include "plateau/polyapprox.hpp"

namespace plateau {

/// Weakly monotone lift of the boundary cycle into polygon arc length.
/// node_params[j] belongs to boundary node j; the closing value
/// node_params[0] + length is implied.
struct BoundaryLift {
  std::vector<double> node_params;
  double length = 0.0;

  /// Sum of the forward steps over one cycle, closing step included.
  double total_increase() const;
  /// Most negative step (0 when weakly monotone).
  double worst_violation() const;
};

struct SolverOptions {
  double tol_energy = 1e-10;
  int max_iters = 5000;
  /// Sweeps between full recomputations of S·g.
  int refresh_every = 25;
};

struct SolverDiagnostics {
  double energy = 0.0;
  double conformality = 0.0;
  double carrier_distance = 0.0;
  int iterations = 0;
  std::size_t moves = 0;
  bool converged = false;
  std::vector<double> energy_history;
};

struct PlateauSolution {
  DiscSurface surface;
  BoundaryLift lift;
  Polygon polygon;
  /// Boundary angle t_k in [0, 2pi) of each vertex A_k.
  std::vector<double> vertex_preimages;
  /// Boundary-cycle positions of the nodes pinned to x0, x1, x2.
  std::array<std::size_t, 3> pin_nodes{};
  SolverDiagnostics diagnostics;
};

/// Boundary-cycle positions nearest to the angles pi, 3pi/2 and 0.
std::array<std::size_t, 3> pin_positions(const DiscMesh& mesh);

/// Piecewise-linear lift between the three pins. Throws ParameterError when
/// the mesh has fewer than 4 boundary nodes per polygon vertex.
BoundaryLift initial_lift(const Polygon& p, const DiscMesh& mesh);

/// Douglas-type minimization of the Dirichlet energy of the harmonic
/// extension over monotone boundary lifts with the three pins held fixed.
PlateauSolution solve(const Polygon& p, std::shared_ptr<const DiscMesh> mesh, const SolverOptions& opts = {});

/// Boundary angle of every vertex under the lift, anchors at their pins.
std::vector<double> vertex_preimages(const Polygon& p, const BoundaryLift& lift, const DiscMesh& mesh);

/// Rebuilds a solution record from a stored surface and lift; the
/// diagnostics describe the stored state (no iterations run).
PlateauSolution solution_from_lift(const Polygon& p, DiscSurface surface, BoundaryLift lift);

/// Boundary values ordered by angle, linear in angle between nodes.
struct BoundaryTrace {
  std::vector<double> angles;
  std::vector<Vec3> values;

  Vec3 operator()(double theta) const;
};

BoundaryTrace boundary_trace(const PlateauSolution& sol);
BoundaryTrace boundary_trace(const DiscSurface& x);

}  // namespace plateau
