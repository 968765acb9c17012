#include "doctest.h"
#include "oracles.hpp"

#include "plateau/curve.hpp"

#include <Eigen/Geometry>

#include <random>

using namespace plateau;

namespace {

std::vector<Vec3> unit_square() { return {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}; }

class NanArc final : public Arc {
 public:
  Vec3 position(double t) const override { return {std::cos(t), std::sin(t), 0.0}; }
  Vec3 first_derivative(double t) const override {
    if (t > 1.0 && t < 1.2) return Vec3::Constant(std::nan(""));
    return {-std::sin(t), std::cos(t), 0.0};
  }
  Vec3 second_derivative(double t) const override { return {-std::cos(t), -std::sin(t), 0.0}; }
};

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Quaterniond q(u(rng), u(rng), u(rng), u(rng));
  q.normalize();
  return q.toRotationMatrix();
}

}  // namespace

TEST_CASE("arc length of builtin curves") {
  CHECK(arc_length(make_circle()) == doctest::Approx(2 * kPi).epsilon(1e-12));
  const auto sq = unit_square();
  CHECK(arc_length(make_polygonal_curve(sq)) == doctest::Approx(4.0).epsilon(1e-14));

  const oracle::PerturbedCircle ref{0.1, 3};
  const double brute = ref.length();
  CHECK(brute == doctest::Approx(oracle::kPerturbedLength).epsilon(1e-10));
  CHECK(arc_length(make_perturbed_circle(0.1, 3)) == doctest::Approx(oracle::kPerturbedLength).epsilon(1e-9));
}

TEST_CASE("corner angles") {
  const auto sq = unit_square();
  const auto corners = corner_angles(make_polygonal_curve(sq));
  REQUIRE(corners.size() == 4);
  for (const auto& c : corners) CHECK(c.angle == doctest::Approx(kPi / 2).epsilon(1e-14));

  CHECK(corner_angles(make_split_circle(2)).empty());
  CHECK(corner_angles(make_split_circle(5)).empty());

  const auto lens = corner_angles(make_lens(kPi / 3));
  REQUIRE(lens.size() == 2);
  for (const auto& c : lens) CHECK(c.angle == doctest::Approx(kPi / 3).epsilon(1e-12));
}

TEST_CASE("total curvature") {
  CHECK(total_curvature(make_circle()) == doctest::Approx(2 * kPi).epsilon(1e-12));
  const auto sq = unit_square();
  CHECK(total_curvature(make_polygonal_curve(sq)) == doctest::Approx(2 * kPi).epsilon(1e-14));

  const oracle::PerturbedCircle ref{0.1, 3};
  CHECK(ref.total_curvature() == doctest::Approx(oracle::kPerturbedTotalCurvature).epsilon(1e-10));
  CHECK(total_curvature(make_perturbed_circle(0.1, 3)) ==
        doctest::Approx(oracle::kPerturbedTotalCurvature).epsilon(1e-8));
}

TEST_CASE("sample evaluates arcs exactly") {
  const auto circle = make_circle();
  const std::vector<double> ts{0.0, kPi / 2, 2 * kPi + kPi / 2};
  const auto pts = sample(circle, ts);
  CHECK((pts[0] - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK((pts[1] - Vec3(0, 1, 0)).norm() < 1e-15);
  CHECK((pts[2] - Vec3(0, 1, 0)).norm() < 1e-14);

  const auto sq = unit_square();
  const auto square = make_polygonal_curve(sq);
  const std::vector<double> mid{0.5};
  CHECK((sample(square, mid)[0] - Vec3(0.5, 0, 0)).norm() < 1e-15);
}

TEST_CASE("Fenchel equality on convex planar curves") {
  const auto sq = unit_square();
  const std::vector<PiecewiseC2Curve> convex{make_circle(2.0), make_ellipse(3.0, 0.5), make_lens(kPi / 3),
                                             make_lens(2.5), make_polygonal_curve(sq), make_split_circle(3)};
  for (const auto& c : convex) CHECK(std::abs(total_curvature(c) - 2 * kPi) < 1e-6);
}

TEST_CASE("total curvature is invariant under rigid motions") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const auto base = make_perturbed_circle(0.1, 3);
  const double tc0 = total_curvature(base);
  const auto& coeffs = dynamic_cast<const FourierArc&>(base.arc(0)).coefficients();
  const std::vector<Vec3> skew{{1, 0, 0.2}, {0.3, 1.1, -0.4}, {-0.8, 0.6, 0.5}, {-0.4, -0.9, -0.1}, {0.6, -0.7, 0.7}};
  const double tcp = total_curvature(make_polygonal_curve(skew));
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Matrix3d r = random_rotation(rng);
    const Vec3 shift(u(rng), u(rng), u(rng));
    FourierArc::Coefficients moved;
    moved.offset = r * coeffs.offset + shift;
    for (const auto& c : coeffs.cos_terms) moved.cos_terms.push_back(r * c);
    for (const auto& c : coeffs.sin_terms) moved.sin_terms.push_back(r * c);
    CHECK(std::abs(total_curvature(make_fourier_curve(moved)) - tc0) < 1e-9);

    std::vector<Vec3> poly;
    for (const auto& v : skew) poly.push_back(r * v + shift);
    CHECK(std::abs(total_curvature(make_polygonal_curve(poly)) - tcp) < 1e-9);
  }
}

TEST_CASE("arc length is additive over subdivision") {
  const auto whole = make_perturbed_circle(0.1, 3);
  const auto& coeffs = dynamic_cast<const FourierArc&>(whole.arc(0)).coefficients();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 2 * kPi - 0.1);
  for (int trial = 0; trial < 5; ++trial) {
    const double cut = u(rng);
    std::vector<std::shared_ptr<const Arc>> arcs{std::make_shared<FourierArc>(coeffs),
                                                 std::make_shared<FourierArc>(coeffs)};
    const PiecewiseC2Curve split(arcs, {0.0, cut, 2 * kPi});
    CHECK(std::abs(arc_length(split) - arc_length(whole)) < 1e-10);
    CHECK(corner_angles(split).empty());
  }
  CHECK(std::abs(arc_length(make_split_circle(7)) - 2 * kPi) < 1e-10);
}

TEST_CASE("invalid curves are rejected") {
  // Open chain: last arc does not return to the start.
  std::vector<std::shared_ptr<const Arc>> open{std::make_shared<LinearArc>(Vec3(0, 0, 0), Vec3(1, 0, 0), 0.0, 1.0),
                                               std::make_shared<LinearArc>(Vec3(1, 0, 0), Vec3(1, 1, 0), 1.0, 2.0)};
  CHECK_THROWS_AS(PiecewiseC2Curve(open, {0.0, 1.0, 2.0}), GeometryError);

  // Cusp where an outer and an inner tangent circle meet at (-1, 0).
  std::vector<std::shared_ptr<const Arc>> cusp{
      std::make_shared<CircularArc>(Vec3::Zero(), 1.0, Vec3(1, 0, 0), Vec3(0, 1, 0), 0.0, 0.0),
      std::make_shared<CircularArc>(Vec3(-0.5, 0, 0), 0.5, Vec3(1, 0, 0), Vec3(0, -1, 0), kPi, kPi),
      std::make_shared<LinearArc>(Vec3(0, 0, 0), Vec3(1, 0, 0), 2 * kPi, 2 * kPi + 1.0)};
  CHECK_THROWS_AS(PiecewiseC2Curve(cusp, {0.0, kPi, 2 * kPi, 2 * kPi + 1.0}), GeometryError);

  // Figure-eight style self-intersection.
  FourierArc::Coefficients eight;
  eight.sin_terms = {Vec3(1, 0, 0), Vec3(0, 1, 0)};
  CHECK_THROWS_AS(make_fourier_curve(eight), GeometryError);

  CHECK_THROWS_AS(make_lens(kPi), ParameterError);
}

TEST_CASE("non-finite derivatives raise evaluation errors") {
  std::vector<std::shared_ptr<const Arc>> arcs{std::make_shared<NanArc>()};
  // Either the constructor's regularity scan or the quadrature hits the window.
  bool threw = false;
  try {
    const PiecewiseC2Curve c(arcs, {0.0, 2 * kPi});
    (void)arc_length(c);
  } catch (const EvaluationError& e) {
    threw = std::string(e.what()).find("arc 0") != std::string::npos;
  } catch (const GeometryError&) {
    threw = true;
  }
  CHECK(threw);
}
