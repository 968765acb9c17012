#include "plateau/convergence.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace plateau {

namespace {

struct Projection {
  double param;
  double distance;
};

Projection project_to_carrier(const Polygon& p, const std::vector<double>& params, const Vec3& x) {
  Projection best{0.0, std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Vec3 a = p.vertex(k);
    const Vec3 e = p.edge(k);
    const double t = std::clamp((x - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
    const double d = (a + t * e - x).norm();
    if (d < best.distance) best = {params[k] + t * (params[k + 1] - params[k]), d};
  }
  return best;
}

// Signed step from s0 to s1 on the circle of length l, in [−l/2, l/2).
double cyclic_step(double s0, double s1, double l) {
  double d = std::fmod(s1 - s0, l);
  if (d >= 0.5 * l) d -= l;
  if (d < -0.5 * l) d += l;
  return d;
}

std::string describe(std::size_t n, const std::string& what) {
  std::ostringstream os;
  os << "stage n=" << n << ": " << what;
  return os.str();
}

}  // namespace

int stage_levels(std::size_t n, int base_levels) {
  int l = std::max(base_levels, static_cast<int>((2 * n + 2) / 3));
  if (l % 2) ++l;
  return l;
}

LiftRecord monotone_lift(const BoundaryTrace& trace, const Polygon& p) {
  check_polygon(p);
  const auto params = vertex_arc_params(p);
  const double l = params.back();
  const double tol = 1e-6 * l;
  const std::size_t nb = trace.values.size();
  if (nb < 2) throw ParameterError("trace needs at least two samples");

  std::vector<double> raw(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    const auto pr = project_to_carrier(p, params, trace.values[j]);
    if (pr.distance > tol) {
      std::ostringstream os;
      os << "trace sample " << j << " lies " << pr.distance << " off the polygon";
      throw GeometryError(os.str());
    }
    raw[j] = pr.param;
  }

  LiftRecord out;
  out.lift.length = l;
  out.lift.node_params.resize(nb);
  double unwrapped = raw[0];
  double repaired = raw[0];
  out.lift.node_params[0] = raw[0];
  for (std::size_t j = 1; j < nb; ++j) {
    unwrapped += cyclic_step(raw[j - 1], raw[j], l);
    out.violation = std::max(out.violation, repaired - unwrapped);
    repaired = std::max(repaired, unwrapped);
    out.lift.node_params[j] = repaired;
  }
  const double closing = unwrapped + cyclic_step(raw[nb - 1], raw[0], l);
  // An exact degree-one trace closes after one full turn; any other count of
  // turns, or a large backward step, means the solver output is invalid.
  if (!(std::abs(closing - raw[0] - l) <= tol))
    throw SolverError("trace does not wind once around the polygon");
  out.violation = std::max(out.violation, repaired - closing);
  if (out.violation > tol) {
    std::ostringstream os;
    os << "trace is not weakly monotone: backward step " << out.violation;
    throw SolverError(os.str());
  }
  return out;
}

double trace_sup_distance(const BoundaryTrace& a, const BoundaryTrace& b) {
  double d = 0.0;
  for (double t : a.angles) d = std::max(d, (a(t) - b(t)).norm());
  for (double t : b.angles) d = std::max(d, (a(t) - b(t)).norm());
  return d;
}

double courant_lebesgue_bound(double energy_bound, double delta) {
  return std::sqrt(36.0 * kPi * energy_bound / std::log(1.0 / delta));
}

std::vector<ModulusRow> equicontinuity_diagnostic(const BoundaryTrace& trace, double energy_bound) {
  const std::size_t nb = trace.angles.size();
  std::vector<ModulusRow> rows;
  for (int e = 1; e <= 8; ++e) {
    ModulusRow r;
    r.delta = std::pow(10.0, -e);
    r.arc = 2.0 * std::sqrt(r.delta);
    r.bound = courant_lebesgue_bound(energy_bound, r.delta);
    // The diameter of a polygonal arc is attained at its nodes or endpoints,
    // and the worst arc can be taken to start at a node or end at one.
    for (int dir : {1, -1}) {
      for (std::size_t j = 0; j < nb; ++j) {
        std::vector<Vec3> pts{trace.values[j], trace(trace.angles[j] + dir * r.arc)};
        for (std::size_t k = 1; k < nb; ++k) {
          const std::size_t i = dir > 0 ? (j + k) % nb : (j + nb - k) % nb;
          const double gap = dir * wrap_angle(dir * (trace.angles[i] - trace.angles[j]));
          if (std::abs(gap) >= r.arc) break;
          pts.push_back(trace.values[i]);
        }
        for (std::size_t a = 0; a < pts.size(); ++a)
          for (std::size_t b = a + 1; b < pts.size(); ++b) r.observed = std::max(r.observed, (pts[a] - pts[b]).norm());
      }
    }
    rows.push_back(r);
  }
  return rows;
}

ConvergenceReport run_sequence(const PiecewiseC2Curve& curve, const std::vector<std::size_t>& schedule, double epsilon,
                               const ConvergenceOptions& opts) {
  if (schedule.empty()) throw ParameterError("schedule is empty");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] <= schedule[i - 1]) throw ParameterError("schedule must be strictly increasing");
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  if (!(opts.perturb_scale > 0.0)) throw ParameterError("perturbation scale must be positive");

  ConvergenceReport rep;
  rep.epsilon = epsilon;
  rep.curve_length = arc_length(curve);
  rep.curve_total_curvature = total_curvature(curve);
  if (!(rep.curve_total_curvature < 6.0 * kPi - 2.0 * epsilon)) {
    std::ostringstream os;
    os.precision(12);
    os << "total curvature " << rep.curve_total_curvature << " is not below 6*pi - 2*epsilon = "
       << 6.0 * kPi - 2.0 * epsilon;
    throw HypothesisError(os.str());
  }

  const double period = curve.period();
  const std::array<double, 3> anchors{opts.anchor_fractions[0] * period, opts.anchor_fractions[1] * period,
                                      opts.anchor_fractions[2] * period};
  std::shared_ptr<const DiscMesh> last_mesh;
  for (std::size_t si = 0; si < schedule.size(); ++si) {
    const std::size_t n = schedule[si];
    try {
      StageRecord st;
      st.n = n;
      st.levels = stage_levels(n, opts.base_levels);
      const Polygon inscribed = inscribe(curve, n, anchors);
      const double delta = opts.perturb_scale * polygon_length(inscribed) / static_cast<double>(inscribed.size());
      auto perturbed = perturb_to_generic(inscribed, delta, opts.seed + n);
      st.polygon = std::move(perturbed.polygon);
      st.perturb_rounds = perturbed.rounds;
      st.approximation = verify_approximation(curve, st.polygon, epsilon);

      const auto mesh = build_mesh(st.levels);
      const auto sol = solve(st.polygon, mesh, opts.solver);
      st.diagnostics = sol.diagnostics;
      if (!sol.diagnostics.converged) throw SolverError("solver did not converge");
      st.branches = detect_branch_points(sol, complex_derivative(sol.surface), opts.branch);
      st.curvature = gauss_bonnet_check(sol, st.branches);
      st.isoperimetric_margin = isoperimetric_check(sol);

      const auto& t = sol.vertex_preimages;
      const auto& a = st.polygon.anchors;
      st.normalization =
          normalize_three_points(std::polar(1.0, t[a[0]]), std::polar(1.0, t[a[1]]), std::polar(1.0, t[a[2]]));
      const DiscSurface normalized = pullback(sol.surface, st.normalization.inverse(), mesh);
      st.trace = boundary_trace(normalized);
      st.lift = monotone_lift(st.trace, st.polygon);
      st.modulus = equicontinuity_diagnostic(st.trace, st.diagnostics.energy);
      last_mesh = mesh;
      rep.stages.push_back(std::move(st));
    } catch (const Error& e) {
      rep.failure = describe(n, e.what());
      rep.failed_stage = si;
      break;
    }
  }

  for (std::size_t i = 1; i < rep.stages.size(); ++i)
    rep.trace_distances.push_back(trace_sup_distance(rep.stages[i - 1].trace, rep.stages[i].trace));

  if (rep.stages.empty()) return rep;
  try {
    const auto& final_trace = rep.stages.back().trace;
    rep.limit_surface = harmonic_extension(last_mesh, final_trace.values);
    rep.limit.energy = dirichlet_energy(rep.limit_surface);
    rep.limit.conformality = conformality_residual(rep.limit_surface).value;
    rep.limit.total_abs_curvature = total_gauss_curvature(rep.limit_surface);
    rep.limit.sauvigny_margin = 4.0 * kPi - rep.limit.total_abs_curvature;
    rep.limit.interior_branches =
        detect_interior_branch_points(rep.limit_surface, complex_derivative(rep.limit_surface), opts.branch);
    rep.has_limit = true;
  } catch (const Error& e) {
    if (rep.failure.empty()) rep.failure = std::string("limit surface: ") + e.what();
  }
  return rep;
}

}  // namespace plateau
