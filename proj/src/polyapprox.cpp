#include "plateau/polyapprox.hpp"
#include "plateau/geometry.hpp"

#include <algorithm>
#include <cstring>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace plateau {

namespace {

constexpr double kEdgeTol = 1e-12;
constexpr int kMaxPerturbRounds = 100;

// Uniform double in [0,1) from raw generator bits, independent of the
// standard library's distribution implementations.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Vec3 random_in_ball(std::mt19937_64& rng) {
  for (;;) {
    Vec3 x(2.0 * unit_uniform(rng) - 1.0, 2.0 * unit_uniform(rng) - 1.0, 2.0 * unit_uniform(rng) - 1.0);
    if (x.squaredNorm() <= 1.0) return x;
  }
}

double cyclic_gap(double from, double to, double period) {
  double g = std::fmod(to - from, period);
  if (g < 0.0) g += period;
  return g;
}

// Cumulative sampling measure mu(t) = int (|γ'|/L + κ|γ'|/2π) dt tabulated
// on a fine grid over one period.
struct MeasureTable {
  std::vector<double> t;
  std::vector<double> mu;

  double at(double s) const {
    auto it = std::upper_bound(t.begin(), t.end(), s);
    std::size_t i = static_cast<std::size_t>(std::distance(t.begin(), it));
    i = std::clamp<std::size_t>(i, 1, t.size() - 1);
    const double w = (s - t[i - 1]) / (t[i] - t[i - 1]);
    return mu[i - 1] + w * (mu[i] - mu[i - 1]);
  }

  double inverse(double m) const {
    auto it = std::upper_bound(mu.begin(), mu.end(), m);
    std::size_t i = static_cast<std::size_t>(std::distance(mu.begin(), it));
    i = std::clamp<std::size_t>(i, 1, mu.size() - 1);
    const double dm = mu[i] - mu[i - 1];
    const double w = dm > 0.0 ? (m - mu[i - 1]) / dm : 0.0;
    return t[i - 1] + w * (t[i] - t[i - 1]);
  }
};

MeasureTable build_measure(const PiecewiseC2Curve& curve) {
  const double length = arc_length(curve);
  const auto br = curve.breaks();
  MeasureTable table;
  table.t.push_back(0.0);
  table.mu.push_back(0.0);
  constexpr int kPanels = 512;
  for (std::size_t i = 0; i < curve.arc_count(); ++i) {
    const double a = br[i];
    const double h = (br[i + 1] - a) / kPanels;
    auto density = [&](double t) { return curve.speed(i, t) / length + curve.curvature_density(i, t) / kTwoPi; };
    for (int k = 0; k < kPanels; ++k) {
      const double t0 = a + k * h;
      const double t1 = k + 1 == kPanels ? br[i + 1] : t0 + h;
      const double simpson = (t1 - t0) / 6.0 * (density(t0) + 4.0 * density(0.5 * (t0 + t1)) + density(t1));
      table.t.push_back(t1);
      table.mu.push_back(table.mu.back() + simpson);
    }
  }
  return table;
}

}  // namespace

bool is_simple(const Polygon& p) {
  const std::size_t m = p.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 2; j < m; ++j) {
      if (i == 0 && j == m - 1) continue;
      const double d2 = segment_distance_sq(p.vertex(i), p.vertex(i + 1), p.vertex(j), p.vertex(j + 1));
      if (d2 <= kEdgeTol * kEdgeTol) return false;
    }
  return true;
}

void check_polygon(const Polygon& p) {
  const std::size_t m = p.size();
  if (m < 4) throw GeometryError("polygon needs at least 4 vertices");
  for (const auto& v : p.vertices)
    if (!v.allFinite()) throw GeometryError("polygon has non-finite vertex");
  for (std::size_t k = 0; k < m; ++k)
    if (!(p.edge(k).norm() > kEdgeTol)) {
      std::ostringstream os;
      os << "polygon edge " << k << " is degenerate";
      throw GeometryError(os.str());
    }
  const auto& a = p.anchors;
  if (a[0] >= m || a[1] >= m || a[2] >= m || a[0] == a[1] || a[1] == a[2] || a[0] == a[2])
    throw GeometryError("polygon anchors must be three distinct vertex indices");
  if (!is_simple(p)) throw GeometryError("polygon is not simple (non-adjacent edges meet)");
}

double polygon_length(const Polygon& p) {
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) total += p.edge(k).norm();
  return total;
}

std::vector<double> vertex_arc_params(const Polygon& p) {
  std::vector<double> s(p.size() + 1, 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) s[k + 1] = s[k] + p.edge(k).norm();
  return s;
}

std::vector<double> exterior_angles(const Polygon& p) {
  const std::size_t m = p.size();
  std::vector<double> eta(m);
  for (std::size_t k = 0; k < m; ++k) {
    const Vec3 in = p.edge(k + m - 1).normalized();
    const Vec3 out = p.edge(k).normalized();
    eta[k] = std::atan2(in.cross(out).norm(), in.dot(out));
    if (eta[k] >= kPi - 1e-12) {
      std::ostringstream os;
      os << "polygon back-tracks at vertex " << k;
      throw GeometryError(os.str());
    }
  }
  return eta;
}

double polygon_total_curvature(const Polygon& p) {
  const auto eta = exterior_angles(p);
  return std::accumulate(eta.begin(), eta.end(), 0.0);
}

Vec3 polygon_point(const Polygon& p, std::span<const double> arc_params, double s) {
  const double length = arc_params.back();
  double r = std::fmod(s, length);
  if (r < 0.0) r += length;
  auto it = std::upper_bound(arc_params.begin(), arc_params.end(), r);
  std::size_t k = static_cast<std::size_t>(std::distance(arc_params.begin(), it));
  k = std::clamp<std::size_t>(k, 1, p.size()) - 1;
  const double edge_len = arc_params[k + 1] - arc_params[k];
  const double w = edge_len > 0.0 ? (r - arc_params[k]) / edge_len : 0.0;
  return p.vertex(k) + w * p.edge(k);
}

Polygon inscribe(const PiecewiseC2Curve& curve, std::size_t n, const std::array<double, 3>& anchor_params) {
  const double period = curve.period();
  std::array<double, 3> anchors{};
  for (int i = 0; i < 3; ++i) {
    double r = std::fmod(anchor_params[i], period);
    if (r < 0.0) r += period;
    anchors[i] = r >= period ? r - period : r;
  }
  const double dup_tol = 1e-12 * period;
  const double g01 = cyclic_gap(anchors[0], anchors[1], period);
  const double g02 = cyclic_gap(anchors[0], anchors[2], period);
  if (g01 <= dup_tol || g02 <= dup_tol || std::abs(g02 - g01) <= dup_tol)
    throw ParameterError("anchor parameters must be distinct");
  if (!(g01 < g02)) throw ParameterError("anchor parameters must be ordered along the curve");

  std::vector<double> fixed(anchors.begin(), anchors.end());
  for (const auto& c : corner_angles(curve)) fixed.push_back(c.param);
  std::sort(fixed.begin(), fixed.end());
  std::vector<double> uniq;
  for (double t : fixed) {
    const bool dup = std::any_of(uniq.begin(), uniq.end(), [&](double u) {
      return std::min(cyclic_gap(u, t, period), cyclic_gap(t, u, period)) <= dup_tol;
    });
    if (!dup) uniq.push_back(t);
  }
  // Anchor values win over coincident corner parameters so that anchors are
  // reproduced bit for bit.
  for (double a : anchors)
    for (double& u : uniq)
      if (std::min(cyclic_gap(u, a, period), cyclic_gap(a, u, period)) <= dup_tol) u = a;
  std::sort(uniq.begin(), uniq.end());

  if (n < 4) throw ParameterError("inscribe needs n >= 4");
  if (n < uniq.size()) {
    std::ostringstream os;
    os << "inscribe: n=" << n << " is smaller than the " << uniq.size() << " required corner and anchor vertices";
    throw ParameterError(os.str());
  }

  const MeasureTable table = build_measure(curve);
  const double total_mu = table.mu.back();
  const std::size_t f = uniq.size();
  std::vector<double> gap_mass(f);
  for (std::size_t i = 0; i < f; ++i) {
    const double a = table.at(uniq[i]);
    const double b = i + 1 < f ? table.at(uniq[i + 1]) : table.at(uniq[0]) + total_mu;
    gap_mass[i] = b - a;
  }

  // Largest-remainder allocation of the free vertices to gaps.
  const std::size_t extra = n - f;
  std::vector<std::size_t> count(f, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < f; ++i) {
    const double ideal = static_cast<double>(extra) * gap_mass[i] / total_mu;
    count[i] = static_cast<std::size_t>(std::floor(ideal));
    assigned += count[i];
    remainders.emplace_back(ideal - std::floor(ideal), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t r = 0; assigned < extra; ++r, ++assigned) ++count[remainders[r % f].second];

  std::vector<double> params;
  params.reserve(n);
  for (std::size_t i = 0; i < f; ++i) {
    params.push_back(uniq[i]);
    const double mu0 = table.at(uniq[i]);
    for (std::size_t k = 1; k <= count[i]; ++k) {
      double m = mu0 + gap_mass[i] * static_cast<double>(k) / static_cast<double>(count[i] + 1);
      if (m >= total_mu) m -= total_mu;
      params.push_back(table.inverse(m));
    }
  }
  std::sort(params.begin(), params.end());

  Polygon p;
  p.source_params = params;
  p.vertices.reserve(params.size());
  for (double t : params) p.vertices.push_back(curve.position(t));
  for (int i = 0; i < 3; ++i) {
    auto it = std::find(params.begin(), params.end(), anchors[i]);
    p.anchors[i] = static_cast<std::size_t>(std::distance(params.begin(), it));
  }
  check_polygon(p);
  return p;
}

GenericityCertificate check_generic(const Polygon& p, double theta_tol, double volume_tol) {
  const std::size_t m = p.size();
  std::vector<Vec3> dir(m);
  for (std::size_t k = 0; k < m; ++k) dir[k] = p.edge(k).normalized();
  GenericityCertificate cert;
  cert.theta_tol = theta_tol;
  cert.volume_tol = volume_tol;
  cert.min_pair_angle = std::numeric_limits<double>::infinity();
  cert.min_triple_volume = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const Vec3 cij = dir[i].cross(dir[j]);
      cert.min_pair_angle = std::min(cert.min_pair_angle, std::atan2(cij.norm(), std::abs(dir[i].dot(dir[j]))));
      for (std::size_t k = j + 1; k < m; ++k)
        cert.min_triple_volume = std::min(cert.min_triple_volume, std::abs(cij.dot(dir[k])));
    }
  cert.passes = cert.min_pair_angle > theta_tol && cert.min_triple_volume > volume_tol;
  return cert;
}

PerturbResult perturb_to_generic(const Polygon& p, double delta, std::uint64_t seed, double theta_tol,
                                 double volume_tol) {
  if (!(delta > 0.0)) throw ParameterError("perturb_to_generic needs delta > 0");
  check_polygon(p);
  PerturbResult result;
  result.certificate = check_generic(p, theta_tol, volume_tol);
  result.polygon = p;
  if (result.certificate.passes) return result;

  std::mt19937_64 rng(seed);
  for (int round = 1; round <= kMaxPerturbRounds; ++round) {
    Polygon q = p;
    q.seed = seed;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const Vec3 d = delta * random_in_ball(rng);
      if (k == p.anchors[0] || k == p.anchors[1] || k == p.anchors[2]) continue;
      q.vertices[k] += d;
    }
    bool valid = true;
    try {
      check_polygon(q);
    } catch (const GeometryError&) {
      valid = false;
    }
    if (!valid) continue;
    const auto cert = check_generic(q, theta_tol, volume_tol);
    if (cert.passes) {
      result.polygon = std::move(q);
      result.rounds = round;
      result.certificate = cert;
      return result;
    }
  }
  std::ostringstream os;
  os << "perturb_to_generic failed after " << kMaxPerturbRounds << " rounds with delta=" << delta
     << "; use a larger delta or more vertices";
  throw GeometryError(os.str());
}

ApproximationReport verify_approximation(const PiecewiseC2Curve& curve, const Polygon& p, double epsilon,
                                         double theta_tol, double volume_tol) {
  if (p.source_params.size() != p.size())
    throw ParameterError("verify_approximation needs the polygon's source parameters");
  ApproximationReport rep;
  rep.curve_length = arc_length(curve);
  rep.polygon_length = polygon_length(p);
  rep.length_gap = rep.polygon_length - rep.curve_length;
  rep.curve_total_curvature = total_curvature(curve);
  rep.polygon_total_curvature = polygon_total_curvature(p);
  rep.curvature_gap = rep.polygon_total_curvature - rep.curve_total_curvature;

  // Parameter-proportional chord map between consecutive vertex parameters.
  constexpr int kSamples = 32;
  const double period = curve.period();
  const std::size_t m = p.size();
  for (std::size_t k = 0; k < m; ++k) {
    const double t0 = p.source_params[k];
    const double t1 = k + 1 < m ? p.source_params[k + 1] : p.source_params[0] + period;
    for (int s = 0; s <= kSamples; ++s) {
      const double w = static_cast<double>(s) / kSamples;
      const Vec3 x = curve.position(t0 + w * (t1 - t0));
      const Vec3 phi = p.vertex(k) + w * p.edge(k);
      rep.sup_deviation = std::max(rep.sup_deviation, (x - phi).norm());
    }
  }
  rep.certificate = check_generic(p, theta_tol, volume_tol);
  rep.pass = rep.length_gap < epsilon && rep.curvature_gap < epsilon && rep.certificate.passes;
  return rep;
}

void write_polygon(std::ostream& os, const Polygon& p) {
  os << "anchors " << p.anchors[0] << ' ' << p.anchors[1] << ' ' << p.anchors[2] << " seed " << p.seed << '\n';
  os << std::setprecision(17);
  for (const auto& v : p.vertices) os << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
}

Polygon read_polygon(std::istream& is) {
  Polygon p;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    if (!have_header) {
      std::string kw_anchors, kw_seed;
      if (!(ls >> kw_anchors >> p.anchors[0] >> p.anchors[1] >> p.anchors[2] >> kw_seed >> p.seed) ||
          kw_anchors != "anchors" || kw_seed != "seed")
        throw ParameterError("polygon file line " + std::to_string(line_no) +
                             ": expected header 'anchors i j k seed s'");
      have_header = true;
      continue;
    }
    Vec3 v;
    std::string rest;
    if (!(ls >> v.x() >> v.y() >> v.z()) || (ls >> rest))
      throw ParameterError("polygon file line " + std::to_string(line_no) + ": expected 'x y z'");
    p.vertices.push_back(v);
  }
  if (!have_header) throw ParameterError("polygon file is empty");
  check_polygon(p);
  return p;
}

}  // namespace plateau
