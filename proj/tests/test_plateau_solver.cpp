#include "doctest.h"

#include "plateau/plateau_solver.hpp"

using namespace plateau;

namespace {

Polygon make_polygon(std::vector<Vec3> pts, std::array<std::size_t, 3> anchors) {
  Polygon p;
  p.vertices = std::move(pts);
  p.anchors = anchors;
  return p;
}

Polygon unit_square() { return make_polygon({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {1, 2, 3}); }
Polygon tetra_quad() { return make_polygon({{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}}, {1, 2, 3}); }

void check_lift(const BoundaryLift& lift, double length) {
  CHECK(lift.worst_violation() <= 0.0);
  CHECK(lift.total_increase() == doctest::Approx(length).epsilon(1e-14));
}

double carrier_gap(const Polygon& p, const Vec3& x) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Vec3 a = p.vertex(k);
    const Vec3 e = p.edge(k);
    const double t = std::clamp((x - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
    d = std::min(d, (a + t * e - x).norm());
  }
  return d;
}

}  // namespace

TEST_CASE("initial lift is proportional between pins") {
  const auto mesh = build_mesh(12);
  const auto sq = unit_square();
  const auto lift = initial_lift(sq, *mesh);
  const auto pins = pin_positions(*mesh);
  const auto& ang = mesh->boundary_angles();
  CHECK(ang[pins[0]] == doctest::Approx(kPi));
  CHECK(ang[pins[1]] == doctest::Approx(1.5 * kPi));
  CHECK(pins[2] == 0);
  CHECK(lift.node_params[pins[0]] == 5.0);
  CHECK(lift.node_params[pins[1]] == 6.0);
  CHECK(lift.node_params[0] == 3.0);
  for (std::size_t j = 1; j < lift.node_params.size(); ++j) {
    const double slope = (lift.node_params[j] - lift.node_params[j - 1]) / (ang[j] - ang[j - 1]);
    CHECK(slope == doctest::Approx(4.0 / kTwoPi).epsilon(1e-12));
  }
  check_lift(lift, 4.0);

  std::vector<Vec3> many;
  for (int k = 0; k < 40; ++k) many.emplace_back(std::cos(kTwoPi * k / 40), std::sin(kTwoPi * k / 40), 0.0);
  CHECK_THROWS_AS(initial_lift(make_polygon(many, {0, 10, 20}), *build_mesh(6)), ParameterError);
  CHECK_THROWS_AS(initial_lift(make_polygon({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {3, 2, 1}), *mesh),
                  ParameterError);
}

TEST_CASE("flat square solve") {
  const auto sq = unit_square();
  std::vector<double> conf;
  for (int levels : {12, 24}) {
    const auto mesh = build_mesh(levels);
    const auto sol = solve(sq, mesh);
    const auto& d = sol.diagnostics;
    CHECK(d.converged);
    for (const auto& v : sol.surface.values) CHECK(v.z() == 0.0);
    CHECK(d.energy > 1.0);
    CHECK(d.energy < 1.0 + 0.3 / levels);
    CHECK(d.carrier_distance < 1e-9 * 4.0);
    check_lift(sol.lift, 4.0);
    for (std::size_t i = 1; i < d.energy_history.size(); ++i) CHECK(d.energy_history[i] <= d.energy_history[i - 1]);
    CHECK(d.energy_history.back() == doctest::Approx(d.energy).epsilon(1e-10));
    conf.push_back(d.conformality);

    // Trace hits the anchor vertices exactly at the pinned angles.
    const auto trace = boundary_trace(sol);
    CHECK(trace(kPi) == sq.vertices[1]);
    CHECK(trace(1.5 * kPi) == sq.vertices[2]);
    CHECK(trace(0.0) == sq.vertices[3]);
    for (const auto& v : trace.values) CHECK(carrier_gap(sq, v) < 1e-12);
  }
  CHECK(conf[1] < conf[0]);
  CHECK(conf[1] < 0.1);
}

TEST_CASE("vertex preimages increase with degree one") {
  const auto sol = solve(tetra_quad(), build_mesh(16));
  const auto& t = sol.vertex_preimages;
  REQUIRE(t.size() == 4);
  // Vertex 3 (anchor x2) sits at angle 0; the rest follow counterclockwise.
  CHECK(t[3] == 0.0);
  CHECK(t[1] == doctest::Approx(kPi));
  CHECK(t[2] == doctest::Approx(1.5 * kPi));
  CHECK(t[0] > 0.0);
  CHECK(t[0] < t[1]);
  CHECK(t[1] < t[2]);
}

TEST_CASE("tetrahedral quadrilateral solve") {
  const auto tq = tetra_quad();
  const auto sol = solve(tq, build_mesh(24));
  const auto& d = sol.diagnostics;
  CHECK(d.converged);
  CHECK(d.carrier_distance < 1e-9 * polygon_length(tq));
  for (std::size_t i = 1; i < d.energy_history.size(); ++i) CHECK(d.energy_history[i] <= d.energy_history[i - 1]);
  CHECK(d.energy_history.front() > d.energy_history.back());
  check_lift(sol.lift, polygon_length(tq));
  const double l = polygon_length(tq);
  CHECK(d.energy <= l * l / (4 * kPi) * 1.01);
  CHECK(laplace_residual(sol.surface) < 1e-9);

  const auto again = solve(tq, build_mesh(24));
  CHECK(again.lift.node_params == sol.lift.node_params);
}

TEST_CASE("non-simple polygons are rejected") {
  const auto back = make_polygon({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {1, 0, 0}}, {1, 2, 3});
  CHECK_THROWS_AS(solve(back, build_mesh(8)), GeometryError);
  SolverOptions bad;
  bad.tol_energy = 0.0;
  CHECK_THROWS_AS(solve(unit_square(), build_mesh(8), bad), ParameterError);
}

TEST_CASE("iteration cap reports non-convergence") {
  SolverOptions o;
  o.max_iters = 2;
  const auto sol = solve(tetra_quad(), build_mesh(16), o);
  CHECK_FALSE(sol.diagnostics.converged);
  CHECK(sol.diagnostics.iterations == 2);
}

TEST_CASE("boundary trace interpolates in angle") {
  const auto mesh = build_mesh(6);
  const auto x = sample_surface(mesh, [](const Vec2& w) { return Vec3(w.x(), w.y(), 1.0); });
  const auto tr = boundary_trace(x);
  const double a = tr.angles[5], b = tr.angles[6];
  const Vec3 mid = tr(0.5 * (a + b));
  CHECK((mid - 0.5 * (tr.values[5] + tr.values[6])).norm() < 1e-15);
  const Vec3 wrap = tr(kTwoPi - 0.5 * (kTwoPi - tr.angles.back()));
  CHECK((wrap - 0.5 * (tr.values.back() + tr.values.front())).norm() < 1e-14);
}
