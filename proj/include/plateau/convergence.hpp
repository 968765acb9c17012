#pragma once

#include "plateau/analysis.hpp"
#include "plateau/mobius.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace plateau {

struct ConvergenceOptions {
  SolverOptions solver;
  BranchOptions branch;
  /// Lower bound on the radial levels of each stage mesh.
  int base_levels = 12;
  /// Perturbation radius as a fraction of the mean inscribed edge.
  double perturb_scale = 1e-4;
  /// Anchor parameters as fractions of the curve period.
  std::array<double, 3> anchor_fractions{0.0, 0.25, 0.5};
  std::uint64_t seed = 1;
};

/// Radial levels for an n-gon: max(base, ceil(2n/3)) rounded up to even, so
/// the boundary carries at least 4n nodes and holds the pin angles exactly.
int stage_levels(std::size_t n, int base_levels);

struct LiftRecord {
  BoundaryLift lift;
  /// Largest backward step of the projected parameters before repair.
  double violation = 0.0;
};

/// Arc-length lift of a trace lying on P's carrier. Throws GeometryError when
/// a trace point is off the carrier and SolverError when the trace moves
/// backwards by more than 1e-6·L(P) or does not wind exactly once.
LiftRecord monotone_lift(const BoundaryTrace& trace, const Polygon& p);

/// sup |a(θ) − b(θ)| over the union of both angle grids.
double trace_sup_distance(const BoundaryTrace& a, const BoundaryTrace& b);

struct ModulusRow {
  double delta = 0.0;
  double arc = 0.0;  // 2√δ
  double observed = 0.0;
  double bound = 0.0;
};

/// √(36πM / log(1/δ)).
double courant_lebesgue_bound(double energy_bound, double delta);

/// Oscillation of the trace over every boundary arc of length 2√δ against the
/// Courant–Lebesgue bound, for δ = 10⁻¹ … 10⁻⁸.
std::vector<ModulusRow> equicontinuity_diagnostic(const BoundaryTrace& trace, double energy_bound);

struct StageRecord {
  std::size_t n = 0;
  int levels = 0;
  Polygon polygon;
  int perturb_rounds = 0;
  ApproximationReport approximation;
  SolverDiagnostics diagnostics;
  BranchReport branches;
  CurvatureReport curvature;
  double isoperimetric_margin = 0.0;
  MobiusAut normalization;
  BoundaryTrace trace;
  LiftRecord lift;
  std::vector<ModulusRow> modulus;
};

struct LimitChecks {
  double energy = 0.0;
  double conformality = 0.0;
  double total_abs_curvature = 0.0;
  double sauvigny_margin = 0.0;
  std::vector<InteriorBranch> interior_branches;
};

struct ConvergenceReport {
  double curve_length = 0.0;
  double curve_total_curvature = 0.0;
  double epsilon = 0.0;
  std::vector<StageRecord> stages;
  std::vector<double> trace_distances;
  /// Empty when every stage ran; otherwise the cause that stopped the run.
  std::string failure;
  std::size_t failed_stage = 0;
  bool has_limit = false;
  DiscSurface limit_surface;
  LimitChecks limit;
};

/// Refinement pipeline over `schedule`. Throws HypothesisError when
/// TC(Γ) ≥ 6π − 2ε and ParameterError for a bad schedule or ε. Numerical
/// failures inside a stage truncate the report and are recorded in `failure`.
ConvergenceReport run_sequence(const PiecewiseC2Curve& curve, const std::vector<std::size_t>& schedule, double epsilon,
                               const ConvergenceOptions& opts = {});

}  // namespace plateau
