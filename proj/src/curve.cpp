#include "plateau/curve.hpp"
#include "plateau/geometry.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <sstream>

namespace plateau {

namespace {

constexpr double kJunctionTol = 1e-12;
constexpr std::size_t kInjectivitySamples = 512;

Vec3 checked(const Vec3& v, std::size_t arc, double t, const char* what) {
  if (!v.allFinite()) {
    std::ostringstream os;
    os << "non-finite " << what << " on arc " << arc << " at t=" << t;
    throw EvaluationError(os.str());
  }
  return v;
}

template <class F>
double integrate(F&& f, double a, double b) {
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  double err = 0.0;
  return Quad::integrate(f, a, b, 20, 1e-13, &err);
}

}  // namespace

LinearArc::LinearArc(Vec3 from, Vec3 to, double t0, double t1)
    : from_(from), velocity_((to - from) / (t1 - t0)), t0_(t0) {
  if (!(t1 > t0)) throw ParameterError("LinearArc: empty parameter interval");
}

Vec3 LinearArc::position(double t) const { return from_ + (t - t0_) * velocity_; }
Vec3 LinearArc::first_derivative(double) const { return velocity_; }
Vec3 LinearArc::second_derivative(double) const { return Vec3::Zero(); }

FourierArc::FourierArc(Coefficients coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.cos_terms.size() < coeffs_.sin_terms.size())
    coeffs_.cos_terms.resize(coeffs_.sin_terms.size(), Vec3::Zero());
  if (coeffs_.sin_terms.size() < coeffs_.cos_terms.size())
    coeffs_.sin_terms.resize(coeffs_.cos_terms.size(), Vec3::Zero());
}

Vec3 FourierArc::position(double t) const {
  Vec3 p = coeffs_.offset;
  for (std::size_t i = 0; i < coeffs_.cos_terms.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    p += coeffs_.cos_terms[i] * std::cos(k * t) + coeffs_.sin_terms[i] * std::sin(k * t);
  }
  return p;
}

Vec3 FourierArc::first_derivative(double t) const {
  Vec3 p = Vec3::Zero();
  for (std::size_t i = 0; i < coeffs_.cos_terms.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    p += k * (-coeffs_.cos_terms[i] * std::sin(k * t) + coeffs_.sin_terms[i] * std::cos(k * t));
  }
  return p;
}

Vec3 FourierArc::second_derivative(double t) const {
  Vec3 p = Vec3::Zero();
  for (std::size_t i = 0; i < coeffs_.cos_terms.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    p -= k * k * (coeffs_.cos_terms[i] * std::cos(k * t) + coeffs_.sin_terms[i] * std::sin(k * t));
  }
  return p;
}

CircularArc::CircularArc(Vec3 center, double radius, Vec3 e1, Vec3 e2, double phi0, double t0)
    : center_(center), radius_(radius), e1_(e1.normalized()), e2_(e2.normalized()), phi0_(phi0), t0_(t0) {}

Vec3 CircularArc::position(double t) const {
  const double phi = phi0_ + (t - t0_);
  return center_ + radius_ * (std::cos(phi) * e1_ + std::sin(phi) * e2_);
}

Vec3 CircularArc::first_derivative(double t) const {
  const double phi = phi0_ + (t - t0_);
  return radius_ * (-std::sin(phi) * e1_ + std::cos(phi) * e2_);
}

Vec3 CircularArc::second_derivative(double t) const {
  const double phi = phi0_ + (t - t0_);
  return -radius_ * (std::cos(phi) * e1_ + std::sin(phi) * e2_);
}

PiecewiseC2Curve::PiecewiseC2Curve(std::vector<std::shared_ptr<const Arc>> arcs, std::vector<double> breaks)
    : arcs_(std::move(arcs)), breaks_(std::move(breaks)) {
  if (arcs_.empty()) throw ParameterError("curve needs at least one arc");
  if (breaks_.size() != arcs_.size() + 1) throw ParameterError("curve needs arcs+1 break parameters");
  if (breaks_.front() != 0.0) throw ParameterError("first break parameter must be 0");
  for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
    if (!(breaks_[i + 1] > breaks_[i])) throw ParameterError("break parameters must increase strictly");
  validate();
}

double PiecewiseC2Curve::reduce(double t) const {
  const double p = period();
  double r = std::fmod(t, p);
  if (r < 0.0) r += p;
  return r >= p ? r - p : r;
}

std::size_t PiecewiseC2Curve::arc_index(double t) const {
  const double r = reduce(t);
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), r);
  std::size_t idx = static_cast<std::size_t>(std::distance(breaks_.begin(), it));
  idx = idx == 0 ? 0 : idx - 1;
  return std::min(idx, arcs_.size() - 1);
}

Vec3 PiecewiseC2Curve::position(double t) const {
  const double r = reduce(t);
  const std::size_t i = arc_index(r);
  return checked(arcs_[i]->position(r), i, r, "position");
}

Vec3 PiecewiseC2Curve::first_derivative(double t) const {
  const double r = reduce(t);
  const std::size_t i = arc_index(r);
  return checked(arcs_[i]->first_derivative(r), i, r, "first derivative");
}

Vec3 PiecewiseC2Curve::second_derivative(double t) const {
  const double r = reduce(t);
  const std::size_t i = arc_index(r);
  return checked(arcs_[i]->second_derivative(r), i, r, "second derivative");
}

double PiecewiseC2Curve::speed(std::size_t arc, double t) const {
  return checked(arcs_[arc]->first_derivative(t), arc, t, "first derivative").norm();
}

double PiecewiseC2Curve::curvature_density(std::size_t arc, double t) const {
  const Vec3 d1 = checked(arcs_[arc]->first_derivative(t), arc, t, "first derivative");
  const Vec3 d2 = checked(arcs_[arc]->second_derivative(t), arc, t, "second derivative");
  const double s2 = d1.squaredNorm();
  if (!(s2 > 0.0)) {
    std::ostringstream os;
    os << "vanishing first derivative on arc " << arc << " at t=" << t;
    throw EvaluationError(os.str());
  }
  return d1.cross(d2).norm() / s2;
}

std::array<Vec3, 2> PiecewiseC2Curve::junction_tangents(std::size_t junction) const {
  const std::size_t m = arcs_.size();
  const std::size_t in_arc = (junction + m - 1) % m;
  const std::size_t out_arc = junction % m;
  const double t_in = junction == 0 ? breaks_.back() : breaks_[junction];
  const double t_out = breaks_[junction];
  const Vec3 din = checked(arcs_[in_arc]->first_derivative(t_in), in_arc, t_in, "first derivative");
  const Vec3 dout = checked(arcs_[out_arc]->first_derivative(t_out), out_arc, t_out, "first derivative");
  if (!(din.norm() > 0.0) || !(dout.norm() > 0.0)) {
    std::ostringstream os;
    os << "zero one-sided tangent at junction t=" << t_out;
    throw EvaluationError(os.str());
  }
  return {din.normalized(), dout.normalized()};
}

void PiecewiseC2Curve::validate() const {
  const std::size_t m = arcs_.size();
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t in_arc = (j + m - 1) % m;
    const double t_in = j == 0 ? breaks_.back() : breaks_[j];
    const Vec3 a = arcs_[in_arc]->position(t_in);
    const Vec3 b = arcs_[j]->position(breaks_[j]);
    if (!((a - b).norm() <= kJunctionTol)) {
      std::ostringstream os;
      os << (j == 0 ? "curve is not closed" : "arcs do not join") << " at t=" << breaks_[j]
         << " (gap " << (a - b).norm() << ")";
      throw GeometryError(os.str());
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    constexpr int kChecks = 64;
    for (int k = 0; k <= kChecks; ++k) {
      const double t = breaks_[i] + (breaks_[i + 1] - breaks_[i]) * k / kChecks;
      if (!(speed(i, t) > 0.0)) {
        std::ostringstream os;
        os << "irregular parametrization on arc " << i << " at t=" << t;
        throw GeometryError(os.str());
      }
    }
  }

  for (std::size_t j = 0; j < m; ++j) {
    const auto [tin, tout] = junction_tangents(j);
    const double angle = std::atan2(tin.cross(tout).norm(), tin.dot(tout));
    if (angle > kPi - kCornerThreshold) {
      std::ostringstream os;
      os << "cusp (corner angle pi) at t=" << breaks_[j] << " is not admitted";
      throw GeometryError(os.str());
    }
  }

  std::vector<Vec3> pts(kInjectivitySamples);
  for (std::size_t k = 0; k < kInjectivitySamples; ++k)
    pts[k] = position(period() * static_cast<double>(k) / kInjectivitySamples);
  // Non-adjacent chords of the sampled polygon must stay apart.
  double chord = 0.0;
  for (std::size_t k = 0; k < kInjectivitySamples; ++k)
    chord = std::max(chord, (pts[(k + 1) % kInjectivitySamples] - pts[k]).norm());
  const double tol = 1e-9 * chord;
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < kInjectivitySamples; ++a)
    for (std::size_t b = a + 2; b < kInjectivitySamples; ++b) {
      if (a == 0 && b == kInjectivitySamples - 1) continue;
      const Vec3& pa = pts[a];
      const Vec3& qa = pts[(a + 1) % kInjectivitySamples];
      const Vec3& pb = pts[b];
      const Vec3& qb = pts[(b + 1) % kInjectivitySamples];
      min_gap = std::min(min_gap, std::sqrt(segment_distance_sq(pa, qa, pb, qb)));
    }
  if (!(min_gap > tol)) throw GeometryError("curve is not injective at sampling resolution");
}

double arc_length(const PiecewiseC2Curve& curve, std::size_t arc, double t0, double t1) {
  return integrate([&](double t) { return curve.speed(arc, t); }, t0, t1);
}

double arc_length(const PiecewiseC2Curve& curve) {
  double total = 0.0;
  const auto br = curve.breaks();
  for (std::size_t i = 0; i < curve.arc_count(); ++i) total += arc_length(curve, i, br[i], br[i + 1]);
  return total;
}

std::vector<CornerAngle> corner_angles(const PiecewiseC2Curve& curve) {
  std::vector<CornerAngle> out;
  const auto br = curve.breaks();
  for (std::size_t j = 0; j < curve.arc_count(); ++j) {
    const auto [tin, tout] = curve.junction_tangents(j);
    const double angle = std::atan2(tin.cross(tout).norm(), tin.dot(tout));
    if (angle > kCornerThreshold) out.push_back({br[j], angle});
  }
  return out;
}

double smooth_curvature(const PiecewiseC2Curve& curve, std::size_t arc, double t0, double t1) {
  return integrate([&](double t) { return curve.curvature_density(arc, t); }, t0, t1);
}

double total_curvature(const PiecewiseC2Curve& curve) {
  double total = 0.0;
  for (const auto& c : corner_angles(curve)) total += c.angle;
  const auto br = curve.breaks();
  for (std::size_t i = 0; i < curve.arc_count(); ++i) total += smooth_curvature(curve, i, br[i], br[i + 1]);
  return total;
}

std::vector<Vec3> sample(const PiecewiseC2Curve& curve, std::span<const double> params) {
  std::vector<Vec3> out;
  out.reserve(params.size());
  for (double t : params) out.push_back(curve.position(t));
  return out;
}

namespace {

PiecewiseC2Curve single_fourier(FourierArc::Coefficients c) {
  std::vector<std::shared_ptr<const Arc>> arcs{std::make_shared<FourierArc>(std::move(c))};
  return PiecewiseC2Curve(std::move(arcs), {0.0, kTwoPi});
}

}  // namespace

PiecewiseC2Curve make_circle(double radius) { return make_ellipse(radius, radius); }

PiecewiseC2Curve make_ellipse(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw ParameterError("ellipse semi-axes must be positive");
  FourierArc::Coefficients c;
  c.cos_terms = {Vec3(a, 0, 0)};
  c.sin_terms = {Vec3(0, b, 0)};
  return single_fourier(std::move(c));
}

PiecewiseC2Curve make_perturbed_circle(double amplitude, int frequency) {
  if (frequency < 1) throw ParameterError("perturbation frequency must be >= 1");
  FourierArc::Coefficients c;
  c.cos_terms.assign(static_cast<std::size_t>(std::max(frequency, 1)), Vec3::Zero());
  c.sin_terms.assign(c.cos_terms.size(), Vec3::Zero());
  c.cos_terms[0] += Vec3(1, 0, 0);
  c.sin_terms[0] += Vec3(0, 1, 0);
  c.sin_terms[static_cast<std::size_t>(frequency - 1)] += Vec3(0, 0, amplitude);
  return single_fourier(std::move(c));
}

PiecewiseC2Curve make_fourier_curve(FourierArc::Coefficients coeffs) { return single_fourier(std::move(coeffs)); }

PiecewiseC2Curve make_polygonal_curve(std::span<const Vec3> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) throw ParameterError("polygonal curve needs at least 3 vertices");
  std::vector<std::shared_ptr<const Arc>> arcs;
  std::vector<double> breaks{0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& a = vertices[i];
    const Vec3& b = vertices[(i + 1) % n];
    const double len = (b - a).norm();
    if (!(len > 0.0)) throw GeometryError("polygonal curve has repeated vertices");
    arcs.push_back(std::make_shared<LinearArc>(a, b, breaks.back(), breaks.back() + len));
    breaks.push_back(breaks.back() + len);
  }
  // Pin the closing endpoint exactly so the junction check sees no roundoff.
  breaks.back() = breaks[n - 1] + (vertices[0] - vertices[n - 1]).norm();
  return PiecewiseC2Curve(std::move(arcs), std::move(breaks));
}

PiecewiseC2Curve make_lens(double corner_turn) {
  if (!(corner_turn > 0.0 && corner_turn < kPi)) throw ParameterError("lens corner turn must lie in (0, pi)");
  // Each arc meets the chord at angle beta; the tangent turns by pi - 2 beta.
  const double beta = 0.5 * (kPi - corner_turn);
  const double radius = 1.0 / std::sin(beta);
  const double offset = radius * std::cos(beta);
  const double span = 2.0 * beta;
  std::vector<std::shared_ptr<const Arc>> arcs{
      std::make_shared<CircularArc>(Vec3(0, -offset, 0), radius, Vec3(1, 0, 0), Vec3(0, 1, 0),
                                    0.5 * kPi - beta, 0.0),
      std::make_shared<CircularArc>(Vec3(0, offset, 0), radius, Vec3(1, 0, 0), Vec3(0, 1, 0),
                                    1.5 * kPi - beta, span)};
  return PiecewiseC2Curve(std::move(arcs), {0.0, span, 2.0 * span});
}

PiecewiseC2Curve make_split_circle(int pieces) {
  if (pieces < 1) throw ParameterError("split circle needs at least one piece");
  std::vector<std::shared_ptr<const Arc>> arcs;
  std::vector<double> breaks{0.0};
  for (int i = 0; i < pieces; ++i) {
    arcs.push_back(std::make_shared<CircularArc>(Vec3::Zero(), 1.0, Vec3(1, 0, 0), Vec3(0, 1, 0), 0.0, 0.0));
    breaks.push_back(kTwoPi * (i + 1) / pieces);
  }
  breaks.back() = kTwoPi;
  return PiecewiseC2Curve(std::move(arcs), std::move(breaks));
}

}  // namespace plateau
