#include "doctest.h"
#include "oracles.hpp"

#include "plateau/polyapprox.hpp"

#include <sstream>

using namespace plateau;

namespace {

Polygon from_points(std::vector<Vec3> pts) {
  Polygon p;
  const std::size_t m = pts.size();
  p.vertices = std::move(pts);
  p.anchors = {m - 3, m - 2, m - 1};
  return p;
}

Polygon unit_square_polygon() { return from_points({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}); }

Polygon tetra_quad() { return from_points({{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}}); }

Polygon regular_polygon(int m) {
  std::vector<Vec3> pts;
  for (int k = 0; k < m; ++k) pts.emplace_back(std::cos(2 * kPi * k / m), std::sin(2 * kPi * k / m), 0.0);
  return from_points(pts);
}

// Hausdorff-type bound for vertex displacement: max over matching vertices.
double max_vertex_shift(const Polygon& a, const Polygon& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, (a.vertices[k] - b.vertices[k]).norm());
  return d;
}

}  // namespace

TEST_CASE("polygon length") {
  CHECK(polygon_length(unit_square_polygon()) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(polygon_length(regular_polygon(6)) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(polygon_length(tetra_quad()) == doctest::Approx(8 * std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("polygon total curvature") {
  CHECK(polygon_total_curvature(unit_square_polygon()) == doctest::Approx(2 * kPi).epsilon(1e-15));
  for (int m : {5, 7, 12, 64}) CHECK(std::abs(polygon_total_curvature(regular_polygon(m)) - 2 * kPi) < 1e-10);
  const auto eta = exterior_angles(tetra_quad());
  for (double e : eta) CHECK(e == doctest::Approx(2 * kPi / 3).epsilon(1e-14));
  CHECK(polygon_total_curvature(tetra_quad()) == doctest::Approx(8 * kPi / 3).epsilon(1e-14));

  const auto back = from_points({{0, 0, 0}, {2, 0, 0}, {1, 0, 0}, {1, 1, 0}});
  CHECK_THROWS_AS(exterior_angles(back), GeometryError);
}

TEST_CASE("polygon validation") {
  CHECK_NOTHROW(check_polygon(unit_square_polygon()));
  CHECK_THROWS_AS(check_polygon(from_points({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}})), GeometryError);
  CHECK_THROWS_AS(check_polygon(from_points({{0, 0, 0}, {1, 0, 0}, {1, 0, 0}, {0, 1, 0}})), GeometryError);
  // Bow tie: edges 0 and 2 cross.
  CHECK_FALSE(is_simple(from_points({{0, 0, 0}, {1, 1, 0}, {1, 0, 0}, {0, 1, 0}})));
  // Segment traversed back and forth.
  CHECK_FALSE(is_simple(from_points({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {1, 0, 0}})));
}

TEST_CASE("inscribe reproduces simple cases") {
  const auto hex = inscribe(make_circle(), 6, {0.0, 2 * kPi / 3, 4 * kPi / 3});
  REQUIRE(hex.size() == 6);
  for (std::size_t k = 0; k < 6; ++k) {
    const Vec3 expect(std::cos(kPi * k / 3), std::sin(kPi * k / 3), 0.0);
    CHECK((hex.vertices[k] - expect).norm() < 1e-12);
  }
  CHECK(hex.anchors[0] == 0);
  CHECK(hex.anchors[1] == 2);
  CHECK(hex.anchors[2] == 4);

  const std::vector<Vec3> sq{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  const auto square = make_polygonal_curve(sq);
  const auto p = inscribe(square, 4, {1.0, 2.0, 3.0});
  REQUIRE(p.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) CHECK((p.vertices[k] - sq[k]).norm() == 0.0);
  CHECK(polygon_total_curvature(p) == doctest::Approx(total_curvature(square)).epsilon(1e-15));
}

TEST_CASE("inscribe rejects bad arguments") {
  const std::vector<Vec3> hexagon{{2, 0, 0}, {1, 1, 0}, {-1, 1, 0}, {-2, 0, 0}, {-1, -1, 0}, {1, -1, 0}};
  const auto curve = make_polygonal_curve(hexagon);
  CHECK_THROWS_AS(inscribe(curve, 5, {0.5, 2.0, 4.0}), ParameterError);
  CHECK_THROWS_AS(inscribe(make_circle(), 3, {0.0, 1.0, 2.0}), ParameterError);
  CHECK_THROWS_AS(inscribe(make_circle(), 8, {0.0, 0.0, 2.0}), ParameterError);
  CHECK_THROWS_AS(inscribe(make_circle(), 8, {0.0, 2.0, 1.0}), ParameterError);
}

TEST_CASE("inscribed perturbed circle tracks oracle length and curvature") {
  const auto curve = make_perturbed_circle(0.1, 3);
  const auto p = inscribe(curve, 64, {0.0, 2 * kPi / 3, 4 * kPi / 3});
  const double lgap = polygon_length(p) - oracle::kPerturbedLength;
  const double cgap = polygon_total_curvature(p) - oracle::kPerturbedTotalCurvature;
  // Inscribed polygons are never longer; second-order chord deficit.
  CHECK(lgap < 0.0);
  CHECK(lgap > -2e-2);
  CHECK(cgap < 1e-10);
  CHECK(cgap > -5e-2);
}

TEST_CASE("genericity certificates") {
  const auto sq = check_generic(unit_square_polygon());
  CHECK_FALSE(sq.passes);
  CHECK(sq.min_pair_angle < 1e-15);

  const auto tq = check_generic(tetra_quad());
  CHECK(tq.passes);
  CHECK(tq.min_triple_volume == doctest::Approx(16.0 / std::pow(2 * std::sqrt(2.0), 3)).epsilon(1e-13));
  CHECK(tq.min_pair_angle == doctest::Approx(kPi / 3).epsilon(1e-13));
  CHECK(tq.theta_tol == kDefaultThetaTol);
  CHECK(tq.volume_tol == kDefaultVolumeTol);

  auto lifted = unit_square_polygon();
  lifted.vertices[2].z() = 0.1;
  const auto lc = check_generic(lifted);
  MESSAGE("lifted square: min pair angle " << lc.min_pair_angle << ", min triple volume " << lc.min_triple_volume
                                            << ", passes " << lc.passes);
}

TEST_CASE("perturbation to generic position") {
  const auto tq = tetra_quad();
  const auto same = perturb_to_generic(tq, 1e-3, 7);
  CHECK(same.rounds == 0);
  CHECK(max_vertex_shift(same.polygon, tq) == 0.0);

  const auto hex = regular_polygon(6);
  const auto r = perturb_to_generic(hex, 1e-3, 7);
  CHECK(r.certificate.passes);
  CHECK(r.rounds >= 1);
  CHECK(check_generic(r.polygon).passes);
  CHECK(is_simple(r.polygon));
  CHECK(max_vertex_shift(r.polygon, hex) <= 1e-3);
  for (auto a : hex.anchors) CHECK(r.polygon.vertices[a] == hex.vertices[a]);

  const auto again = perturb_to_generic(hex, 1e-3, 7);
  for (std::size_t k = 0; k < hex.size(); ++k) CHECK(again.polygon.vertices[k] == r.polygon.vertices[k]);

  CHECK_THROWS_AS(perturb_to_generic(unit_square_polygon(), 0.0, 1), ParameterError);
}

TEST_CASE("anchors are fixed by inscribe and perturbation") {
  const auto curve = make_perturbed_circle(0.1, 3);
  const std::array<double, 3> ap{0.3, 2.5, 4.4};
  const auto p = inscribe(curve, 40, ap);
  const auto r = perturb_to_generic(p, 1e-4, 99);
  const auto exact = sample(curve, ap);
  for (int i = 0; i < 3; ++i) {
    CHECK(p.vertices[p.anchors[i]] == exact[i]);
    CHECK(r.polygon.vertices[r.polygon.anchors[i]] == exact[i]);
  }
}

TEST_CASE("approximation report") {
  const std::vector<Vec3> sq{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  const auto square = make_polygonal_curve(sq);
  const auto ps = inscribe(square, 4, {1.0, 2.0, 3.0});
  const auto rs = verify_approximation(square, ps, 0.01);
  CHECK(rs.length_gap == doctest::Approx(0.0));
  CHECK(std::abs(rs.curvature_gap) < 1e-14);
  CHECK(rs.sup_deviation < 1e-15);
  CHECK_FALSE(rs.pass);  // planar square is not generic

  const auto circle = make_circle();
  // Anchors on the 64-gon's own vertex grid keep the polygon regular.
  const auto p64 = inscribe(circle, 64, {0.0, 2 * kPi * 21 / 64, 2 * kPi * 42 / 64});
  const auto rc = verify_approximation(circle, p64, 0.01);
  CHECK(std::abs(-rc.length_gap - (2 * kPi - 128 * std::sin(kPi / 64))) < 1e-12);
  CHECK(rc.curvature_gap <= 1e-10);

  auto bare = p64;
  bare.source_params.clear();
  CHECK_THROWS_AS(verify_approximation(circle, bare, 0.01), ParameterError);

  const auto curve = make_perturbed_circle(0.1, 3);
  const auto p256 = inscribe(curve, 256, {0.0, 2 * kPi / 3, 4 * kPi / 3});
  const double delta = 1e-4 * polygon_length(p256) / 256;
  const auto g = perturb_to_generic(p256, delta, 3);
  const auto rp = verify_approximation(curve, g.polygon, 0.01);
  CHECK(std::abs(rp.length_gap) < 0.01);
  CHECK(rp.curvature_gap < 0.01);
  CHECK(rp.pass);
}

TEST_CASE("length gap shrinks under refinement on the circle") {
  const auto circle = make_circle();
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n : {8u, 16u, 32u, 64u, 128u, 256u}) {
    const auto p = inscribe(circle, n, {0.0, 2 * kPi / 3, 4 * kPi / 3});
    const double gap = std::abs(polygon_length(p) - 2 * kPi);
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("convex curves never gain turning") {
  const std::vector<PiecewiseC2Curve> convex{make_circle(), make_ellipse(2.0, 0.7), make_lens(kPi / 3),
                                             make_split_circle(4)};
  for (const auto& c : convex)
    for (std::size_t n : {12u, 50u}) {
      const double t = c.period();
      const auto p = inscribe(c, n, {0.05 * t, 0.4 * t, 0.75 * t});
      CHECK(polygon_total_curvature(p) - total_curvature(c) <= 1e-10);
    }
}

TEST_CASE("polygon text round trip") {
  auto p = perturb_to_generic(regular_polygon(7), 1e-3, 5).polygon;
  p.seed = 5;
  std::stringstream ss;
  write_polygon(ss, p);
  const auto q = read_polygon(ss);
  REQUIRE(q.size() == p.size());
  CHECK(q.anchors == p.anchors);
  CHECK(q.seed == 5);
  for (std::size_t k = 0; k < p.size(); ++k) CHECK(q.vertices[k] == p.vertices[k]);

  std::stringstream bad("anchors 0 1 2 seed 1\n0 0 0\n1 0 zero\n");
  CHECK_THROWS_WITH_AS(read_polygon(bad), doctest::Contains("line 3"), ParameterError);
}
