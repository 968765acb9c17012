#include "plateau/analysis.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

namespace plateau {

GaussMap gauss_map(const DiscSurface& x) {
  const auto grads = triangle_gradients(x);
  GaussMap gm;
  gm.normals.resize(grads.size(), Vec3::Zero());
  gm.degenerate.resize(grads.size(), 0);
  double total = 0.0, bad = 0.0;
  for (std::size_t t = 0; t < grads.size(); ++t) {
    const double a = x.mesh->triangle_area(t);
    total += a;
    const Vec3 n = grads[t].du.cross(grads[t].dv);
    const double len = n.norm();
    if (!(len > kDegenerateCross)) {
      gm.degenerate[t] = 1;
      bad += a;
      continue;
    }
    gm.normals[t] = n / len;
  }
  gm.degenerate_fraction = bad / total;
  if (gm.degenerate_fraction > kMaxDegenerateFraction) {
    std::ostringstream os;
    os << "surface too degenerate to analyze: " << 100.0 * gm.degenerate_fraction << "% of the disc area has |X_u x X_v| <= "
       << kDegenerateCross;
    throw AnalysisError(os.str());
  }
  return gm;
}

std::vector<Vec3> node_normals(const DiscSurface& x, const GaussMap& gm) {
  const auto& mesh = *x.mesh;
  std::vector<Vec3> acc(mesh.node_count(), Vec3::Zero());
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    if (gm.degenerate[t]) continue;
    const auto& tri = mesh.triangle(t);
    const Vec3 area_vec = (x.values[tri[1]] - x.values[tri[0]]).cross(x.values[tri[2]] - x.values[tri[0]]);
    // Orientation follows the domain orientation, so reuse the sign of N.
    const Vec3 oriented = area_vec.dot(gm.normals[t]) >= 0.0 ? area_vec : Vec3(-area_vec);
    for (int i : tri) acc[i] += oriented;
  }
  for (auto& n : acc) {
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
  }
  return acc;
}

double total_gauss_curvature(const DiscSurface& x) {
  const GaussMap gm = gauss_map(x);
  const auto nn = node_normals(x, gm);
  double total = 0.0;
  for (std::size_t t = 0; t < x.mesh->triangle_count(); ++t) {
    const auto& tri = x.mesh->triangle(t);
    const Vec3& a = nn[tri[0]];
    const Vec3& b = nn[tri[1]];
    const Vec3& c = nn[tri[2]];
    if (a.isZero() || b.isZero() || c.isZero()) continue;
    // Solid angle of the spherical triangle (Van Oosterom and Strackee).
    const double num = a.dot(b.cross(c));
    const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    total += std::abs(2.0 * std::atan2(num, den));
  }
  return total;
}

namespace {

constexpr int kMaxRedraws = 16;
constexpr int kMaxOrderGuess = 6;

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

CVec3 generic_vector(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CVec3 c;
  for (int i = 0; i < 3; ++i) c[i] = Complex(2.0 * unit_uniform(rng) - 1.0, 2.0 * unit_uniform(rng) - 1.0);
  return c;
}

int quadrant(const Complex& z) {
  if (z.real() >= 0.0) return z.imag() >= 0.0 ? 0 : 3;
  return z.imag() >= 0.0 ? 1 : 2;
}

enum class Winding { ok, ambiguous, vanished, outside };

// Quadrant-crossing count of h = <c, X_w> around the circle |w - w0| = r.
Winding wind(const DiscMesh& mesh, const ComplexDerivativeField& field, const CVec3& c, const Vec2& w0, double r,
             int samples, double floor, int& out) {
  int steps = 0;
  int first = -1, prev = -1;
  for (int k = 0; k <= samples; ++k) {
    int q;
    if (k < samples) {
      const double phi = kTwoPi * k / samples;
      const Vec2 p = w0 + r * Vec2(std::cos(phi), std::sin(phi));
      const auto loc = mesh.locate(p);
      if (!loc) return Winding::outside;
      const CVec3& xw = field.xw[loc->triangle];
      const Complex h = c[0] * xw[0] + c[1] * xw[1] + c[2] * xw[2];
      if (std::abs(h) < floor) return Winding::vanished;
      q = quadrant(h);
    } else {
      q = first;
    }
    if (prev < 0) {
      first = q;
    } else {
      const int d = (q - prev + 4) % 4;
      if (d == 2) return Winding::ambiguous;
      if (d == 1) ++steps;
      if (d == 3) --steps;
    }
    prev = q;
  }
  out = steps / 4;
  return Winding::ok;
}

std::optional<int> winding_order(const DiscMesh& mesh, const ComplexDerivativeField& field, const Vec2& w0, double r,
                                 double floor, std::uint64_t seed) {
  for (int draw = 0; draw < kMaxRedraws; ++draw) {
    const CVec3 c = generic_vector(seed + static_cast<std::uint64_t>(draw));
    for (int samples = 256; samples <= 8192; samples *= 2) {
      int order = 0;
      const Winding w = wind(mesh, field, c, w0, r, samples, floor, order);
      if (w == Winding::ok) return order;
      if (w == Winding::outside) return std::nullopt;
      if (w == Winding::vanished) break;
    }
  }
  return std::nullopt;
}

double mean_energy(const ComplexDerivativeField& field, const DiscMesh& mesh) {
  double area = 0.0, e = 0.0;
  for (std::size_t t = 0; t < field.xw.size(); ++t) {
    const double a = mesh.triangle_area(t);
    area += a;
    e += a * 2.0 * field.xw[t].squaredNorm();
  }
  return e / area;
}

// Surface angle predicted at a vertex with exterior angle eta and order m.
double predicted_angle(int m, double eta) { return m % 2 == 0 ? (m + 1) * kPi - eta : m * kPi + eta; }

}  // namespace

std::vector<InteriorBranch> detect_interior_branch_points(const DiscSurface& x, const ComplexDerivativeField& field,
                                                          const BranchOptions& opts) {
  const DiscMesh& mesh = *x.mesh;
  const double mean_e = mean_energy(field, mesh);
  std::vector<InteriorBranch> out;
  if (!(mean_e > 0.0)) return out;
  const std::size_t nt = mesh.triangle_count();
  std::vector<double> mod(nt);
  for (std::size_t t = 0; t < nt; ++t) mod[t] = field.xw[t].squaredNorm() / mean_e;

  std::vector<std::size_t> minima;
  for (std::size_t t = 0; t < nt; ++t) {
    if (!(mod[t] < opts.tol)) continue;
    bool is_min = true;
    for (int s : mesh.triangle_neighbors(t)) {
      const auto su = static_cast<std::size_t>(s);
      if (mod[su] < mod[t] || (mod[su] == mod[t] && su < t)) {
        is_min = false;
        break;
      }
    }
    if (is_min) minima.push_back(t);
  }
  std::stable_sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return mod[a] < mod[b]; });

  const double h = mesh.max_edge_length();
  std::vector<std::size_t> kept;
  for (std::size_t t : minima) {
    const bool close = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return (field.barycenters[k] - field.barycenters[t]).norm() < 3.0 * h;
    });
    if (!close) kept.push_back(t);
  }

  const double floor = 1e-12 * std::sqrt(mean_e);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    InteriorBranch b;
    b.location = field.barycenters[kept[i]];
    b.modulus = mod[kept[i]];
    double r = 3.0 * h;
    for (std::size_t j = 0; j < kept.size(); ++j)
      if (j != i) r = std::min(r, 0.45 * (field.barycenters[kept[j]] - b.location).norm());
    b.near_boundary = b.location.norm() + 3.0 * h > 1.0 - 2.0 * h;
    if (!b.near_boundary && r >= 1.5 * h) b.order = winding_order(mesh, field, b.location, r, floor, opts.seed);
    out.push_back(b);
  }
  return out;
}

BranchReport detect_branch_points(const PlateauSolution& sol, const ComplexDerivativeField& field,
                                  const BranchOptions& opts) {
  BranchReport br;
  br.interior = detect_interior_branch_points(sol.surface, field, opts);
  const Polygon& p = sol.polygon;
  const auto eta = exterior_angles(p);
  const std::size_t m = p.size();
  const double h = sol.surface.mesh->max_edge_length();
  const double scale = polygon_length(p);
  for (std::size_t k = 0; k < m; ++k) {
    VertexOrder vo;
    vo.vertex = k;
    vo.preimage = sol.vertex_preimages[k];
    vo.exterior_angle = eta[k];
    const double gap_prev = wrap_angle(vo.preimage - sol.vertex_preimages[(k + m - 1) % m]);
    const double gap_next = wrap_angle(sol.vertex_preimages[(k + 1) % m] - vo.preimage);
    const double r = std::min(4.0 * h, 0.8 * std::min(gap_prev, gap_next));
    const double phi0 = std::acos(-0.5 * r);
    const Complex e(std::cos(vo.preimage), std::sin(vo.preimage));
    constexpr int kArcSamples = 256;
    Vec3 prev_dir = Vec3::Zero();
    double swept = 0.0;
    for (int i = 0; i <= kArcSamples; ++i) {
      const double phi = phi0 + (kTwoPi - 2.0 * phi0) * i / kArcSamples;
      Complex w = e * (1.0 + r * std::polar(1.0, phi));
      if (std::abs(w) > 1.0) w /= std::abs(w);
      const Vec3 d = evaluate(sol.surface, Vec2(w.real(), w.imag())) - p.vertices[k];
      if (!(d.norm() > 1e-12 * scale)) continue;
      const Vec3 dir = d.normalized();
      if (!prev_dir.isZero()) swept += std::atan2(prev_dir.cross(dir).norm(), prev_dir.dot(dir));
      prev_dir = dir;
    }
    vo.swept_angle = swept;
    int best = 0;
    for (int g = 1; g <= kMaxOrderGuess; ++g)
      if (std::abs(predicted_angle(g, eta[k]) - swept) < std::abs(predicted_angle(best, eta[k]) - swept)) best = g;
    double gap = std::numeric_limits<double>::infinity();
    for (int g = 0; g <= kMaxOrderGuess; ++g)
      if (g != best) gap = std::min(gap, std::abs(predicted_angle(g, eta[k]) - predicted_angle(best, eta[k])));
    vo.order = best;
    vo.low_confidence = std::abs(predicted_angle(best, eta[k]) - swept) > 0.3 * gap;
    vo.rho = best % 2 == 0 ? -eta[k] / kPi : -(1.0 - eta[k] / kPi);
    br.vertices.push_back(vo);
  }
  br.total_order = total_branch_order(br);
  return br;
}

std::optional<double> total_branch_order(const BranchReport& br) {
  double kappa = 0.0;
  for (const auto& b : br.interior) {
    if (!b.order) return std::nullopt;
    kappa += b.near_boundary ? 0.5 * *b.order : *b.order;
  }
  for (const auto& v : br.vertices) {
    if (v.low_confidence) return std::nullopt;
    kappa += 0.5 * v.order;
  }
  return kappa;
}

CurvatureReport gauss_bonnet_check(double total_abs_curvature, const Polygon& p, const BranchReport& br) {
  CurvatureReport r;
  r.total_abs_curvature = total_abs_curvature;
  r.total_order = total_branch_order(br);
  const auto eta = exterior_angles(p);
  r.polygon_total_curvature = std::accumulate(eta.begin(), eta.end(), 0.0);

  double rho_sum = 0.0, nonbranch = 0.0;
  for (std::size_t k = 0; k < eta.size(); ++k) {
    const VertexOrder* vo = nullptr;
    for (const auto& v : br.vertices)
      if (v.vertex == k) vo = &v;
    const int m = vo ? vo->order : 0;
    rho_sum += m % 2 == 0 ? eta[k] / kPi : 1.0 - eta[k] / kPi;
    if (m == 0) nonbranch += eta[k];
  }
  const double kappa = r.total_order.value_or(0.0);
  r.gauss_bonnet_lhs = total_abs_curvature + kTwoPi * (1.0 + kappa);
  r.gauss_bonnet_rhs = kPi * rho_sum;
  if (r.total_order) r.residual = r.gauss_bonnet_lhs - r.gauss_bonnet_rhs;
  r.bound_tc_minus_2pi = r.polygon_total_curvature - kTwoPi;
  r.tc_slack = r.bound_tc_minus_2pi - total_abs_curvature;
  r.nonbranch_bound = nonbranch - kTwoPi;
  r.nonbranch_slack = r.nonbranch_bound - total_abs_curvature;
  r.predicted_total = r.gauss_bonnet_rhs - kTwoPi * (1.0 + kappa);
  r.nonbranch_strict = r.predicted_total < r.nonbranch_bound;
  r.sauvigny_margin = 4.0 * kPi - total_abs_curvature;
  return r;
}

CurvatureReport gauss_bonnet_check(const PlateauSolution& sol, const BranchReport& br) {
  return gauss_bonnet_check(total_gauss_curvature(sol.surface), sol.polygon, br);
}

double isoperimetric_check(const PlateauSolution& sol) {
  const double l = polygon_length(sol.polygon);
  return l * l / (4.0 * kPi) - dirichlet_energy(sol.surface);
}

bool sauvigny_bound_check(const CurvatureReport& report, double epsilon) {
  return report.total_abs_curvature <= 4.0 * kPi - epsilon;
}

}  // namespace plateau
