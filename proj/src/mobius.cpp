#include "plateau/mobius.hpp"

#include <sstream>

namespace plateau {

namespace {

constexpr double kUnitTol = 1e-9;
constexpr double kTargetTol = 1e-10;

// Cross-ratio map sending (z0, z1, z2) to (0, 1, ∞).
Eigen::Matrix2cd cross_ratio(Complex z0, Complex z1, Complex z2) {
  Eigen::Matrix2cd m;
  m << z1 - z2, -z0 * (z1 - z2), z1 - z0, -z2 * (z1 - z0);
  return m;
}

Eigen::Matrix2cd adjugate(const Eigen::Matrix2cd& m) {
  Eigen::Matrix2cd r;
  r << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return r;
}

}  // namespace

MobiusAut::MobiusAut(Complex a, double theta) : a_(a), theta_(wrap_angle(theta)) {
  if (!(std::abs(a) < 1.0 - 1e-12)) throw ParameterError("Mobius parameter must satisfy |a| < 1");
}

Complex MobiusAut::operator()(Complex w) const {
  return std::polar(1.0, theta_) * (w - a_) / (1.0 - std::conj(a_) * w);
}

double MobiusAut::angle(double theta) const {
  const Complex z = (*this)(std::polar(1.0, theta));
  return wrap_angle(std::arg(z));
}

Eigen::Matrix2cd MobiusAut::matrix() const {
  const Complex e = std::polar(1.0, theta_);
  Eigen::Matrix2cd m;
  m << e, -e * a_, -std::conj(a_), 1.0;
  return m;
}

MobiusAut MobiusAut::from_matrix(const Eigen::Matrix2cd& m) {
  if (std::abs(m(1, 1)) == 0.0) throw ParameterError("matrix is not a disc automorphism");
  const Eigen::Matrix2cd n = m / m(1, 1);
  if (!(std::abs(std::abs(n(0, 0)) - 1.0) < 1e-9)) throw ParameterError("matrix is not a disc automorphism");
  return MobiusAut(-n(0, 1) / n(0, 0), std::arg(n(0, 0)));
}

MobiusAut MobiusAut::inverse() const { return from_matrix(adjugate(matrix())); }

MobiusAut compose(const MobiusAut& f, const MobiusAut& g) { return MobiusAut::from_matrix(f.matrix() * g.matrix()); }

MobiusAut normalize_three_points(Complex w0, Complex w1, Complex w2) {
  for (const Complex w : {w0, w1, w2})
    if (!(std::abs(std::abs(w) - 1.0) < kUnitTol)) throw ParameterError("normalization points must lie on the unit circle");
  const double t0 = std::arg(w0);
  const double d1 = wrap_angle(std::arg(w1) - t0);
  const double d2 = wrap_angle(std::arg(w2) - t0);
  if (d1 < kUnitTol || d2 < kUnitTol || std::abs(d2 - d1) < kUnitTol)
    throw ParameterError("normalization points must be distinct");
  if (!(d1 < d2)) throw ParameterError("normalization points must run counterclockwise");

  const Complex i(0.0, 1.0);
  const Eigen::Matrix2cd m = adjugate(cross_ratio(-1.0, -i, 1.0)) * cross_ratio(w0, w1, w2);
  const MobiusAut phi = MobiusAut::from_matrix(m);
  const std::array<Complex, 3> src{w0, w1, w2};
  const std::array<Complex, 3> dst{-1.0, -i, 1.0};
  for (int k = 0; k < 3; ++k)
    if (!(std::abs(phi(src[k]) - dst[k]) <= kTargetTol)) {
      std::ostringstream os;
      os << "normalization misses target " << k << " by " << std::abs(phi(src[k]) - dst[k]);
      throw SolverError(os.str());
    }
  return phi;
}

DiscSurface pullback(const DiscSurface& x, const MobiusAut& phi, std::shared_ptr<const DiscMesh> target) {
  DiscSurface out;
  out.values.resize(target->node_count());
  for (std::size_t n = 0; n < target->node_count(); ++n) {
    const int pos = target->boundary_position(n);
    if (pos >= 0) {
      out.values[n] = evaluate_boundary(x, phi.angle(target->boundary_angles()[static_cast<std::size_t>(pos)]));
      continue;
    }
    const Vec2& w = target->node(n);
    Complex z = phi(Complex(w.x(), w.y()));
    if (std::abs(z) > 1.0) z /= std::abs(z);
    out.values[n] = evaluate(x, Vec2(z.real(), z.imag()));
  }
  out.mesh = std::move(target);
  return out;
}

}  // namespace plateau
