#include "plateau/plateau_solver.hpp"
#include "plateau/geometry.hpp"

#include <algorithm>
#include <sstream>

namespace plateau {

namespace {

constexpr double kAcceptRel = 1e-15;
constexpr double kTieRel = 1e-14;

// Polygon walked by lifted arc length u in [0, 2L).
class Carrier {
 public:
  explicit Carrier(const Polygon& p) : p_(p), s_(vertex_arc_params(p)), length_(s_.back()) {}

  double length() const { return length_; }
  double vertex_param(std::size_t k) const { return s_[k]; }

  Vec3 point(double u) const {
    const auto [k, base] = edge_of(u);
    return point_on(k, u - base - s_[k]);
  }

  // Closest point to c among lifted parameters in [lo, hi]; ties prefer the
  // parameter nearest to `current`.
  double closest(const Vec3& c, double lo, double hi, double current, Vec3& out) const {
    auto [k, base] = edge_of(lo);
    double best_u = current;
    double best_d = std::numeric_limits<double>::infinity();
    const double tie = kTieRel * length_;
    for (;;) {
      const double e0 = base + s_[k];
      const double e1 = base + s_[k + 1];
      const double a = std::max(lo, e0) - e0;
      const double b = std::min(hi, e1) - e0;
      if (b >= a) {
        const Vec3 dir = p_.edge(k) / (s_[k + 1] - s_[k]);
        const double proj = std::clamp((c - p_.vertex(k)).dot(dir), a, b);
        const Vec3 q = point_on(k, proj);
        const double d = (q - c).norm();
        const double u = e0 + proj;
        if (d < best_d - tie || (d <= best_d + tie && std::abs(u - current) < std::abs(best_u - current))) {
          if (d < best_d) best_d = d;
          best_u = u;
          out = q;
        }
      }
      if (e1 >= hi) break;
      if (++k == p_.size()) {
        k = 0;
        base += length_;
      }
    }
    return best_u;
  }

  double distance(const Vec3& x) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < p_.size(); ++k)
      d = std::min(d, segment_distance_sq(x, x, p_.vertex(k), p_.vertex(k + 1)));
    return std::sqrt(d);
  }

 private:
  std::pair<std::size_t, double> edge_of(double u) const {
    double base = 0.0;
    while (u - base >= length_) base += length_;
    while (u - base < 0.0) base -= length_;
    auto it = std::upper_bound(s_.begin(), s_.end(), u - base);
    std::size_t k = static_cast<std::size_t>(std::distance(s_.begin(), it));
    k = std::clamp<std::size_t>(k, 1, p_.size()) - 1;
    return {k, base};
  }

  Vec3 point_on(std::size_t k, double offset) const {
    const double len = s_[k + 1] - s_[k];
    if (offset <= 0.0) return p_.vertex(k);
    if (offset >= len) return p_.vertex(k + 1);
    return p_.vertex(k) + (offset / len) * p_.edge(k);
  }

  const Polygon& p_;
  std::vector<double> s_;
  double length_;
};

// Lifted value of x in [from, from + length).
double lift_into(double x, double from, double length) {
  while (x < from) x += length;
  while (x >= from + length) x -= length;
  return x;
}

double douglas_energy(const Eigen::MatrixXd& g, const Eigen::MatrixXd& sg) { return 0.5 * (g.array() * sg.array()).sum(); }

}  // namespace

double BoundaryLift::total_increase() const {
  double total = 0.0;
  const std::size_t nb = node_params.size();
  for (std::size_t j = 0; j < nb; ++j) {
    const double next = j + 1 < nb ? node_params[j + 1] : node_params[0] + length;
    total += next - node_params[j];
  }
  return total;
}

double BoundaryLift::worst_violation() const {
  double worst = 0.0;
  const std::size_t nb = node_params.size();
  for (std::size_t j = 0; j < nb; ++j) {
    const double next = j + 1 < nb ? node_params[j + 1] : node_params[0] + length;
    worst = std::min(worst, next - node_params[j]);
  }
  return -worst;
}

std::array<std::size_t, 3> pin_positions(const DiscMesh& mesh) {
  const auto& ang = mesh.boundary_angles();
  if (ang.empty() || ang[0] > 1e-12) throw ParameterError("mesh needs a boundary node at angle 0");
  auto nearest = [&](double target) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < ang.size(); ++j)
      if (std::abs(ang[j] - target) < std::abs(ang[best] - target)) best = j;
    return best;
  };
  return {nearest(kPi), nearest(1.5 * kPi), 0};
}

BoundaryLift initial_lift(const Polygon& p, const DiscMesh& mesh) {
  const std::size_t nb = mesh.boundary_count();
  if (nb < 4 * p.size()) {
    std::ostringstream os;
    os << "mesh has " << nb << " boundary nodes; at least " << 4 * p.size() << " needed for " << p.size()
       << " vertices";
    throw ParameterError(os.str());
  }
  const auto pins = pin_positions(mesh);
  if (!(pins[0] > 0 && pins[1] > pins[0])) throw ParameterError("mesh boundary too coarse for the three pins");
  const Carrier carrier(p);
  const double len = carrier.length();
  const double s2 = carrier.vertex_param(p.anchors[2]);
  const double s0 = lift_into(carrier.vertex_param(p.anchors[0]), s2, len);
  const double s1 = lift_into(carrier.vertex_param(p.anchors[1]), s2, len);
  if (!(s2 < s0 && s0 < s1)) throw ParameterError("polygon anchors are not in cyclic order x0, x1, x2");

  const auto& ang = mesh.boundary_angles();
  BoundaryLift lift;
  lift.length = len;
  lift.node_params.resize(nb);
  const std::array<double, 4> knot_angle{0.0, ang[pins[0]], ang[pins[1]], kTwoPi};
  const std::array<double, 4> knot_value{s2, s0, s1, s2 + len};
  for (std::size_t j = 0; j < nb; ++j) {
    std::size_t seg = 0;
    while (seg < 2 && ang[j] >= knot_angle[seg + 1]) ++seg;
    const double w = (ang[j] - knot_angle[seg]) / (knot_angle[seg + 1] - knot_angle[seg]);
    lift.node_params[j] = knot_value[seg] + w * (knot_value[seg + 1] - knot_value[seg]);
  }
  lift.node_params[0] = s2;
  lift.node_params[pins[0]] = s0;
  lift.node_params[pins[1]] = s1;
  return lift;
}

std::vector<double> vertex_preimages(const Polygon& p, const BoundaryLift& lift, const DiscMesh& mesh) {
  const std::size_t nb = mesh.boundary_count();
  if (lift.node_params.size() != nb) throw ParameterError("lift does not match the mesh boundary");
  const auto params = vertex_arc_params(p);
  const double len = params.back();
  if (!(std::abs(lift.length - len) <= 1e-9 * len)) throw ParameterError("lift length differs from the polygon length");
  const auto& sigma = lift.node_params;
  const auto pins = pin_positions(mesh);
  // Inverse interpolation of the lift; plateaus map to their midpoint and
  // the anchors to their pin angles.
  const auto& ang = mesh.boundary_angles();
  const double s2 = sigma[0];
  const std::size_t m = p.size();
  std::vector<double> out(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const double target = lift_into(params[k], s2, len);
    auto value = [&](std::size_t j) { return j < nb ? sigma[j] : s2 + len; };
    auto angle = [&](std::size_t j) { return j < nb ? ang[j] : kTwoPi; };
    std::size_t j = 0;
    while (j < nb && value(j) < target) ++j;
    double t;
    if (value(j) == target) {
      std::size_t last = j;
      while (last < nb && value(last + 1) == target) ++last;
      t = 0.5 * (angle(j) + angle(last));
    } else {
      const double w = (target - value(j - 1)) / (value(j) - value(j - 1));
      t = angle(j - 1) + w * (angle(j) - angle(j - 1));
    }
    out[k] = wrap_angle(t);
  }
  for (int i = 0; i < 3; ++i) out[p.anchors[i]] = ang[pins[i]];
  return out;
}

PlateauSolution solution_from_lift(const Polygon& p, DiscSurface surface, BoundaryLift lift) {
  check_polygon(p);
  const Carrier carrier(p);
  PlateauSolution sol;
  sol.polygon = p;
  sol.pin_nodes = pin_positions(*surface.mesh);
  sol.vertex_preimages = vertex_preimages(p, lift, *surface.mesh);
  sol.lift = std::move(lift);
  auto& diag = sol.diagnostics;
  diag.energy = dirichlet_energy(surface);
  diag.conformality = conformality_residual(surface).value;
  for (const auto& b : surface.boundary_values()) diag.carrier_distance = std::max(diag.carrier_distance, carrier.distance(b));
  diag.energy_history.push_back(diag.energy);
  diag.converged = true;
  sol.surface = std::move(surface);
  return sol;
}

PlateauSolution solve(const Polygon& p, std::shared_ptr<const DiscMesh> mesh, const SolverOptions& opts) {
  check_polygon(p);
  if (!(opts.tol_energy > 0.0) || opts.max_iters < 1 || opts.refresh_every < 1)
    throw ParameterError("solver options must be positive");
  const Carrier carrier(p);
  PlateauSolution sol;
  sol.polygon = p;
  sol.lift = initial_lift(p, *mesh);
  sol.pin_nodes = pin_positions(*mesh);
  auto& sigma = sol.lift.node_params;
  const double len = carrier.length();
  const std::size_t nb = mesh->boundary_count();

  std::vector<char> pinned(nb, 0);
  for (auto j : sol.pin_nodes) pinned[j] = 1;

  const Eigen::MatrixXd s = mesh->schur_complement();
  Eigen::MatrixXd g(static_cast<Eigen::Index>(nb), 3);
  for (std::size_t j = 0; j < nb; ++j) g.row(static_cast<Eigen::Index>(j)) = carrier.point(sigma[j]).transpose();
  for (int i = 0; i < 3; ++i) g.row(static_cast<Eigen::Index>(sol.pin_nodes[i])) = p.vertices[p.anchors[i]].transpose();

  Eigen::MatrixXd sg = s * g;
  double energy = douglas_energy(g, sg);
  auto& diag = sol.diagnostics;
  diag.energy_history.push_back(energy);

  for (int it = 1; it <= opts.max_iters; ++it) {
    std::size_t moved = 0;
    for (std::size_t j = 0; j < nb; ++j) {
      if (pinned[j]) continue;
      const auto jj = static_cast<Eigen::Index>(j);
      const double lo = sigma[j - 1];
      const double hi = j + 1 < nb ? sigma[j + 1] : sigma[0] + len;
      const double sjj = s(jj, jj);
      const Vec3 gj = g.row(jj).transpose();
      const Vec3 sgj = sg.row(jj).transpose();
      const Vec3 target = gj - sgj / sjj;
      Vec3 q;
      const double u = carrier.closest(target, lo, hi, sigma[j], q);
      const Vec3 d = q - gj;
      const double delta = d.dot(sgj) + 0.5 * sjj * d.squaredNorm();
      if (!(delta < -kAcceptRel * energy)) continue;
      sigma[j] = u;
      g.row(jj) = q.transpose();
      sg.noalias() += s.col(jj) * d.transpose();
      energy += delta;
      ++moved;
    }
    diag.moves += moved;
    diag.iterations = it;
    if (it % opts.refresh_every == 0) {
      sg.noalias() = s * g;
      energy = douglas_energy(g, sg);
    }
    const double prev = diag.energy_history.back();
    diag.energy_history.push_back(energy);
    if (moved == 0 || prev - energy < opts.tol_energy * energy) {
      diag.converged = true;
      break;
    }
  }

  std::vector<Vec3> bvals(nb);
  for (std::size_t j = 0; j < nb; ++j) bvals[j] = g.row(static_cast<Eigen::Index>(j)).transpose();
  sol.surface = harmonic_extension(mesh, bvals);
  diag.energy = dirichlet_energy(sol.surface);
  diag.conformality = conformality_residual(sol.surface).value;
  for (const auto& b : bvals) diag.carrier_distance = std::max(diag.carrier_distance, carrier.distance(b));

  sol.vertex_preimages = vertex_preimages(p, sol.lift, *mesh);
  return sol;
}

Vec3 BoundaryTrace::operator()(double theta) const {
  const std::size_t nb = angles.size();
  double th = wrap_angle(theta);
  if (th < angles[0]) th += kTwoPi;
  auto it = std::upper_bound(angles.begin(), angles.end(), th);
  std::size_t j = static_cast<std::size_t>(std::distance(angles.begin(), it));
  j = j == 0 ? nb - 1 : j - 1;
  const double a0 = angles[j];
  const double a1 = j + 1 < nb ? angles[j + 1] : angles[0] + kTwoPi;
  const double w = (th - a0) / (a1 - a0);
  return values[j] + w * (values[(j + 1) % nb] - values[j]);
}

BoundaryTrace boundary_trace(const DiscSurface& x) {
  BoundaryTrace tr;
  tr.angles = x.mesh->boundary_angles();
  tr.values = x.boundary_values();
  return tr;
}

BoundaryTrace boundary_trace(const PlateauSolution& sol) { return boundary_trace(sol.surface); }

}  // namespace plateau
