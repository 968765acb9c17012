#include "plateau/disc_harmonic.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace plateau {

namespace {

constexpr double kBoundaryTol = 1e-12;
constexpr double kMinArea = 1e-14;

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

double corner_angle(const Vec2& at, const Vec2& p, const Vec2& q) {
  const Vec2 u = p - at;
  const Vec2 v = q - at;
  return std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v));
}

double cot_at(const Vec2& at, const Vec2& p, const Vec2& q) {
  const Vec2 u = p - at;
  const Vec2 v = q - at;
  return u.dot(v) / std::abs(u.x() * v.y() - u.y() * v.x());
}

using EdgeKey = std::pair<int, int>;
EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

// Lawson flips until every interior edge is locally Delaunay.
void delaunay_flip(const std::vector<Vec2>& nodes, std::vector<Triangle>& tris) {
  for (int pass = 0; pass < 1000; ++pass) {
    std::map<EdgeKey, std::vector<int>> edges;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t)
      for (int i = 0; i < 3; ++i) edges[edge_key(tris[t][i], tris[t][(i + 1) % 3])].push_back(t);
    std::vector<char> touched(tris.size(), 0);
    int flips = 0;
    for (const auto& [key, ts] : edges) {
      if (ts.size() != 2 || touched[ts[0]] || touched[ts[1]]) continue;
      auto opposite = [&](int t) {
        for (int v : tris[t])
          if (v != key.first && v != key.second) return v;
        return -1;
      };
      const int c = opposite(ts[0]);
      const int d = opposite(ts[1]);
      const double alpha = corner_angle(nodes[c], nodes[key.first], nodes[key.second]);
      const double beta = corner_angle(nodes[d], nodes[key.first], nodes[key.second]);
      if (alpha + beta <= kPi + 1e-12) continue;
      // Orient as tri0 = (a, b, c) counterclockwise.
      const Triangle& t0 = tris[ts[0]];
      int ic = 0;
      while (t0[ic] != c) ++ic;
      const int a = t0[(ic + 1) % 3];
      const int b = t0[(ic + 2) % 3];
      tris[ts[0]] = {a, d, c};
      tris[ts[1]] = {d, b, c};
      touched[ts[0]] = touched[ts[1]] = 1;
      ++flips;
    }
    if (flips == 0) return;
  }
}

}  // namespace

DiscMesh::DiscMesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)) {
  const std::size_t n = nodes_.size();
  boundary_pos_.assign(n, -1);
  interior_pos_.assign(n, -1);
  std::vector<std::pair<double, int>> bnd;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = nodes_[i].norm();
    if (std::abs(r - 1.0) <= kBoundaryTol) {
      bnd.emplace_back(wrap_angle(std::atan2(nodes_[i].y(), nodes_[i].x())), static_cast<int>(i));
    } else {
      interior_pos_[i] = static_cast<int>(interior_.size());
      interior_.push_back(static_cast<int>(i));
    }
  }
  std::sort(bnd.begin(), bnd.end());
  for (const auto& [ang, idx] : bnd) {
    boundary_pos_[idx] = static_cast<int>(boundary_.size());
    boundary_.push_back(idx);
    boundary_angles_.push_back(ang);
  }
  node_tris_.assign(n, {});
  for (std::size_t t = 0; t < triangles_.size(); ++t)
    for (int v : triangles_[t]) node_tris_[v].push_back(static_cast<int>(t));
  tri_neighbors_.assign(triangles_.size(), {});
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    auto& nb = tri_neighbors_[t];
    for (int v : triangles_[t])
      for (int s : node_tris_[v])
        if (s != static_cast<int>(t)) nb.push_back(s);
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  validate();
  assemble();
  build_locator();
}

void DiscMesh::validate() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (!(nodes_[i].norm() <= 1.0 + kBoundaryTol)) throw GeometryError("mesh node outside the unit disc");
  if (boundary_.size() < 3) throw GeometryError("mesh has fewer than 3 boundary nodes");
  for (std::size_t j = 1; j < boundary_angles_.size(); ++j)
    if (!(boundary_angles_[j] > boundary_angles_[j - 1]))
      throw GeometryError("boundary angles are not strictly increasing");
  std::map<EdgeKey, std::vector<std::pair<int, int>>> edges;
  for (const auto& t : triangles_) {
    for (int v : t)
      if (v < 0 || static_cast<std::size_t>(v) >= nodes_.size()) throw GeometryError("triangle index out of range");
    if (!(signed_area(nodes_[t[0]], nodes_[t[1]], nodes_[t[2]]) > kMinArea))
      throw GeometryError("degenerate or clockwise triangle in mesh");
    for (int i = 0; i < 3; ++i) edges[edge_key(t[i], t[(i + 1) % 3])].emplace_back(t[i], t[(i + 1) % 3]);
  }
  std::size_t boundary_edges = 0;
  for (const auto& [key, uses] : edges) {
    if (uses.size() > 2) throw GeometryError("non-manifold mesh edge");
    if (uses.size() == 2 && uses[0].first == uses[1].first)
      throw GeometryError("inconsistent triangle orientation");
    if (uses.size() == 1) {
      ++boundary_edges;
      if (boundary_pos_[key.first] < 0 || boundary_pos_[key.second] < 0)
        throw GeometryError("open mesh edge away from the unit circle");
    }
  }
  if (boundary_edges != boundary_.size()) throw GeometryError("mesh boundary is not a single cycle");
  if (euler_characteristic(*this) != 1) throw GeometryError("mesh is not a topological disc");
}

void DiscMesh::assemble() {
  const int n = static_cast<int>(nodes_.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(triangles_.size() * 9);
  for (const auto& t : triangles_) {
    for (int i = 0; i < 3; ++i) {
      const int a = t[i];
      const int b = t[(i + 1) % 3];
      const int c = t[(i + 2) % 3];
      const double w = 0.5 * cot_at(nodes_[c], nodes_[a], nodes_[b]);
      trips.emplace_back(a, b, -w);
      trips.emplace_back(b, a, -w);
      trips.emplace_back(a, a, w);
      trips.emplace_back(b, b, w);
      max_edge_ = std::max(max_edge_, (nodes_[a] - nodes_[b]).norm());
    }
  }
  stiffness_.resize(n, n);
  stiffness_.setFromTriplets(trips.begin(), trips.end());

  double wsum = 0.0;
  std::size_t wcount = 0;
  std::vector<Eigen::Triplet<double>> tii, tib, tbb;
  for (int col = 0; col < stiffness_.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness_, col); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      if (r != c) {
        wsum += std::abs(it.value());
        ++wcount;
      }
      const int ri = interior_pos_[r], ci = interior_pos_[c];
      const int rb = boundary_pos_[r], cb = boundary_pos_[c];
      if (ri >= 0 && ci >= 0) tii.emplace_back(ri, ci, it.value());
      if (ri >= 0 && cb >= 0) tib.emplace_back(ri, cb, it.value());
      if (rb >= 0 && cb >= 0) tbb.emplace_back(rb, cb, it.value());
    }
  mean_weight_ = wcount ? wsum / static_cast<double>(wcount) : 0.0;
  const int ni = static_cast<int>(interior_.size());
  const int nb = static_cast<int>(boundary_.size());
  k_ii_.resize(ni, ni);
  k_ii_.setFromTriplets(tii.begin(), tii.end());
  k_ib_.resize(ni, nb);
  k_ib_.setFromTriplets(tib.begin(), tib.end());
  k_bb_.resize(nb, nb);
  k_bb_.setFromTriplets(tbb.begin(), tbb.end());
  factor_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
  if (ni > 0) {
    factor_->compute(k_ii_);
    if (factor_->info() != Eigen::Success) throw SolverError("interior Laplace block is singular");
  }
}

void DiscMesh::build_locator() {
  grid_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(triangles_.size())) / 2.0));
  buckets_.assign(static_cast<std::size_t>(grid_ * grid_), {});
  auto cell = [&](double x) {
    return std::clamp(static_cast<int>((x + 1.0) * 0.5 * grid_), 0, grid_ - 1);
  };
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    double x0 = 2, x1 = -2, y0 = 2, y1 = -2;
    for (int v : triangles_[t]) {
      x0 = std::min(x0, nodes_[v].x());
      x1 = std::max(x1, nodes_[v].x());
      y0 = std::min(y0, nodes_[v].y());
      y1 = std::max(y1, nodes_[v].y());
    }
    for (int i = cell(x0); i <= cell(x1); ++i)
      for (int j = cell(y0); j <= cell(y1); ++j) buckets_[static_cast<std::size_t>(i * grid_ + j)].push_back(static_cast<int>(t));
  }
}

std::optional<DiscMesh::Location> DiscMesh::locate(const Vec2& w) const {
  if (std::abs(w.x()) > 1.0 + 1e-9 || std::abs(w.y()) > 1.0 + 1e-9) return std::nullopt;
  const int i = std::clamp(static_cast<int>((w.x() + 1.0) * 0.5 * grid_), 0, grid_ - 1);
  const int j = std::clamp(static_cast<int>((w.y() + 1.0) * 0.5 * grid_), 0, grid_ - 1);
  std::optional<Location> best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int t : buckets_[static_cast<std::size_t>(i * grid_ + j)]) {
    const auto& tri = triangles_[t];
    const Vec2& a = nodes_[tri[0]];
    const Vec2& b = nodes_[tri[1]];
    const Vec2& c = nodes_[tri[2]];
    const double area = signed_area(a, b, c);
    Eigen::Vector3d bary(signed_area(w, b, c) / area, signed_area(a, w, c) / area, signed_area(a, b, w) / area);
    const double mn = bary.minCoeff();
    if (mn > best_min) {
      best_min = mn;
      best = Location{static_cast<std::size_t>(t), bary};
    }
  }
  if (!best || best_min < -1e-12) return std::nullopt;
  return best;
}

double DiscMesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles_[t];
  return signed_area(nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]]);
}

Eigen::MatrixXd DiscMesh::solve_interior(const Eigen::MatrixXd& boundary_values) const {
  if (interior_.empty()) return Eigen::MatrixXd(0, boundary_values.cols());
  const Eigen::MatrixXd rhs = -(k_ib_ * boundary_values);
  Eigen::MatrixXd x = factor_->solve(rhs);
  if (factor_->info() != Eigen::Success) throw SolverError("harmonic extension solve failed");
  return x;
}

Eigen::MatrixXd DiscMesh::schur_complement() const {
  const int nb = static_cast<int>(boundary_.size());
  Eigen::MatrixXd s = Eigen::MatrixXd(k_bb_);
  if (interior_.empty()) return s;
  const Eigen::SparseMatrix<double> k_bi = k_ib_.transpose();
  constexpr int kBlock = 64;
  for (int c0 = 0; c0 < nb; c0 += kBlock) {
    const int w = std::min(kBlock, nb - c0);
    const Eigen::MatrixXd rhs = Eigen::MatrixXd(k_ib_.middleCols(c0, w));
    const Eigen::MatrixXd y = factor_->solve(rhs);
    s.middleCols(c0, w) -= k_bi * y;
  }
  return 0.5 * (s + s.transpose());
}

std::shared_ptr<const DiscMesh> build_mesh(int radial_levels) {
  if (radial_levels < 3) throw ParameterError("build_mesh needs radial_levels >= 3");
  const int levels = radial_levels;
  std::vector<Vec2> nodes{Vec2::Zero()};
  std::vector<int> ring_start{0};
  std::vector<int> ring_size{1};
  for (int k = 1; k <= levels; ++k) {
    ring_start.push_back(static_cast<int>(nodes.size()));
    ring_size.push_back(6 * k);
    const double r = k == levels ? 1.0 : static_cast<double>(k) / levels;
    for (int j = 0; j < 6 * k; ++j) {
      const double a = kTwoPi * j / (6.0 * k);
      nodes.emplace_back(r * std::cos(a), r * std::sin(a));
    }
  }
  std::vector<Triangle> tris;
  for (int j = 0; j < 6; ++j) tris.push_back({0, 1 + j, 1 + (j + 1) % 6});
  for (int k = 2; k <= levels; ++k) {
    const int n0 = ring_size[k - 1], s0 = ring_start[k - 1];
    const int n1 = ring_size[k], s1 = ring_start[k];
    int i = 0, j = 0;
    while (i < n0 || j < n1) {
      const double next_in = i < n0 ? (i + 1.0) / n0 : 2.0;
      const double next_out = j < n1 ? (j + 1.0) / n1 : 2.0;
      const int in_i = s0 + i % n0;
      const int out_j = s1 + j % n1;
      if (next_out <= next_in) {
        tris.push_back({in_i, out_j, s1 + (j + 1) % n1});
        ++j;
      } else {
        tris.push_back({in_i, out_j, s0 + (i + 1) % n0});
        ++i;
      }
    }
  }
  delaunay_flip(nodes, tris);
  return std::make_shared<const DiscMesh>(std::move(nodes), std::move(tris));
}

int euler_characteristic(const DiscMesh& mesh) {
  std::map<EdgeKey, int> edges;
  for (const auto& t : mesh.triangles())
    for (int i = 0; i < 3; ++i) edges[edge_key(t[i], t[(i + 1) % 3])] = 1;
  return static_cast<int>(mesh.node_count()) - static_cast<int>(edges.size()) +
         static_cast<int>(mesh.triangle_count());
}

double min_triangle_angle(const DiscMesh& mesh) {
  double best = kPi;
  for (const auto& t : mesh.triangles())
    for (int i = 0; i < 3; ++i)
      best = std::min(best, corner_angle(mesh.node(t[i]), mesh.node(t[(i + 1) % 3]), mesh.node(t[(i + 2) % 3])));
  return best;
}

std::vector<Vec3> DiscSurface::boundary_values() const {
  std::vector<Vec3> out;
  out.reserve(mesh->boundary_count());
  for (int idx : mesh->boundary_cycle()) out.push_back(values[idx]);
  return out;
}

DiscSurface harmonic_extension(std::shared_ptr<const DiscMesh> mesh, std::span<const Vec3> boundary_values) {
  const std::size_t nb = mesh->boundary_count();
  if (boundary_values.size() != nb) throw ParameterError("harmonic_extension: one value per boundary node required");
  Eigen::MatrixXd g(static_cast<Eigen::Index>(nb), 3);
  for (std::size_t j = 0; j < nb; ++j) {
    if (!boundary_values[j].allFinite()) throw ParameterError("harmonic_extension: non-finite boundary value");
    g.row(static_cast<Eigen::Index>(j)) = boundary_values[j].transpose();
  }
  const Eigen::MatrixXd xi = mesh->solve_interior(g);
  DiscSurface s;
  s.values.assign(mesh->node_count(), Vec3::Zero());
  for (std::size_t j = 0; j < nb; ++j) s.values[mesh->boundary_cycle()[j]] = boundary_values[j];
  const auto& interior = mesh->interior_nodes();
  for (std::size_t i = 0; i < interior.size(); ++i) s.values[interior[i]] = xi.row(static_cast<Eigen::Index>(i)).transpose();
  s.mesh = std::move(mesh);
  s.is_harmonic = true;
  return s;
}

double laplace_residual(const DiscSurface& x) {
  const auto& k = x.mesh->stiffness();
  Eigen::MatrixXd v(static_cast<Eigen::Index>(x.values.size()), 3);
  for (std::size_t i = 0; i < x.values.size(); ++i) v.row(static_cast<Eigen::Index>(i)) = x.values[i].transpose();
  const Eigen::MatrixXd r = k * v;
  double worst = 0.0;
  for (int idx : x.mesh->interior_nodes()) worst = std::max(worst, r.row(idx).cwiseAbs().maxCoeff());
  return worst;
}

std::vector<TriangleGradient> triangle_gradients(const DiscSurface& x) {
  const auto& mesh = *x.mesh;
  std::vector<TriangleGradient> out(mesh.triangle_count());
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangle(t);
    Eigen::Matrix2d d;
    d.col(0) = mesh.node(tri[1]) - mesh.node(tri[0]);
    d.col(1) = mesh.node(tri[2]) - mesh.node(tri[0]);
    Eigen::Matrix<double, 3, 2> f;
    f.col(0) = x.values[tri[1]] - x.values[tri[0]];
    f.col(1) = x.values[tri[2]] - x.values[tri[0]];
    const Eigen::Matrix<double, 3, 2> j = f * d.inverse();
    out[t] = {j.col(0), j.col(1)};
  }
  return out;
}

double dirichlet_energy(const DiscSurface& x) {
  const auto grads = triangle_gradients(x);
  double e = 0.0;
  for (std::size_t t = 0; t < grads.size(); ++t)
    e += 0.5 * (grads[t].du.squaredNorm() + grads[t].dv.squaredNorm()) * x.mesh->triangle_area(t);
  return e;
}

ComplexDerivativeField complex_derivative(const DiscSurface& x) {
  const auto grads = triangle_gradients(x);
  ComplexDerivativeField field;
  field.xw.reserve(grads.size());
  field.barycenters.reserve(grads.size());
  const Complex i(0.0, 1.0);
  for (std::size_t t = 0; t < grads.size(); ++t) {
    field.xw.push_back(0.5 * (grads[t].du.cast<Complex>() - i * grads[t].dv.cast<Complex>()));
    const auto& tri = x.mesh->triangle(t);
    field.barycenters.push_back((x.mesh->node(tri[0]) + x.mesh->node(tri[1]) + x.mesh->node(tri[2])) / 3.0);
  }
  return field;
}

ConformalityResidual conformality_residual(const DiscSurface& x) {
  const auto grads = triangle_gradients(x);
  double area = 0.0, e_sum = 0.0, q_sum = 0.0;
  for (std::size_t t = 0; t < grads.size(); ++t) {
    const double a = x.mesh->triangle_area(t);
    const double uu = grads[t].du.squaredNorm();
    const double vv = grads[t].dv.squaredNorm();
    const double uv = grads[t].du.dot(grads[t].dv);
    area += a;
    e_sum += a * 0.5 * (uu + vv);
    q_sum += a * std::sqrt((uu - vv) * (uu - vv) + 4.0 * uv * uv);
  }
  ConformalityResidual r;
  r.mean_e = e_sum / area;
  if (!(r.mean_e > 0.0)) {
    r.degenerate = true;
    return r;
  }
  r.value = q_sum / area / (2.0 * r.mean_e);
  return r;
}

Vec3 evaluate_boundary(const DiscSurface& x, double theta) {
  const auto& angles = x.mesh->boundary_angles();
  const auto& cycle = x.mesh->boundary_cycle();
  const std::size_t nb = angles.size();
  double th = wrap_angle(theta);
  if (th < angles[0]) th += kTwoPi;
  auto it = std::upper_bound(angles.begin(), angles.end(), th);
  std::size_t j = static_cast<std::size_t>(std::distance(angles.begin(), it));
  j = j == 0 ? nb - 1 : j - 1;
  const double a0 = angles[j];
  const double a1 = j + 1 < nb ? angles[j + 1] : angles[0] + kTwoPi;
  const double w = (th - a0) / (a1 - a0);
  return (1.0 - w) * x.values[cycle[j]] + w * x.values[cycle[(j + 1) % nb]];
}

Vec3 evaluate(const DiscSurface& x, const Vec2& w) {
  const double r = w.norm();
  if (r > 1.0 + 1e-9) {
    std::ostringstream os;
    os << "evaluation point (" << w.x() << ", " << w.y() << ") lies outside the unit disc";
    throw ParameterError(os.str());
  }
  if (auto loc = x.mesh->locate(w)) {
    const auto& tri = x.mesh->triangle(loc->triangle);
    return loc->barycentric[0] * x.values[tri[0]] + loc->barycentric[1] * x.values[tri[1]] +
           loc->barycentric[2] * x.values[tri[2]];
  }
  if (r >= 1.0) return evaluate_boundary(x, std::atan2(w.y(), w.x()));
  // Cap between a boundary chord and the circle: project along the ray.
  const auto& angles = x.mesh->boundary_angles();
  const auto& cycle = x.mesh->boundary_cycle();
  const std::size_t nb = angles.size();
  double th = wrap_angle(std::atan2(w.y(), w.x()));
  if (th < angles[0]) th += kTwoPi;
  auto it = std::upper_bound(angles.begin(), angles.end(), th);
  std::size_t j = static_cast<std::size_t>(std::distance(angles.begin(), it));
  j = j == 0 ? nb - 1 : j - 1;
  const Vec2& p = x.mesh->node(cycle[j]);
  const Vec2& q = x.mesh->node(cycle[(j + 1) % nb]);
  const Vec2 dir(std::cos(th), std::sin(th));
  // Solve p + s (q - p) = lambda dir for s.
  const Vec2 e = q - p;
  const double den = e.x() * dir.y() - e.y() * dir.x();
  const double s = den != 0.0 ? std::clamp((p.y() * dir.x() - p.x() * dir.y()) / den, 0.0, 1.0) : 0.0;
  return (1.0 - s) * x.values[cycle[j]] + s * x.values[cycle[(j + 1) % nb]];
}

}  // namespace plateau
