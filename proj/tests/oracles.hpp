#pragma once

// Independent reference computations, written from the defining formulas rather than
// the library code paths.

#include <Eigen/Geometry>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/jacobi_elliptic.hpp>
#include <cmath>
#include <complex>
#include <limits>

#include "kokonet/angles.hpp"
#include "kokonet/geometry.hpp"
#include "kokonet/units.hpp"

namespace oracle {

using kokonet::pi;
using kokonet::Vec3;

// K(k) by adaptive Gauss-Kronrod over the amplitude form of the integral.
inline double K_quadrature(double k) {
  auto f = [k](double phi) {
    const double s = std::sin(phi);
    return 1.0 / std::sqrt(1.0 - k * k * s * s);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, pi / 2, 20, 1e-15);
}

// Incomplete F(phi, k) by the same quadrature.
inline double F_quadrature(double phi, double k) {
  auto f = [k](double x) {
    const double s = std::sin(x);
    return 1.0 / std::sqrt(1.0 - k * k * s * s);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, phi, 20, 1e-15);
}

struct Jacobi {
  double sn, cn, dn;
};

inline Jacobi jacobi_boost(double u, double k) {
  double cn = 0, dn = 0;
  const double sn = boost::math::jacobi_elliptic(k, u, &cn, &dn);
  return {sn, cn, dn};
}

// Nearest lattice point by exhaustive search over a window of generator multiples.
inline double lattice_brute(std::complex<double> s, std::complex<double> g1, std::complex<double> g2) {
  double best = std::numeric_limits<double>::infinity();
  for (int m = -30; m <= 30; ++m)
    for (int n = -30; n <= 30; ++n) best = std::min(best, std::abs(s - (double(m) * g1 + double(n) * g2)));
  return best;
}

struct Derived {
  double sigma, aBar, bBar, gBar, dBar;
  double a, b, c, d, M, r, s, f, u, x, y, z;
  int eps;
};

// Sine ratios and their products straight from the definitions.
inline Derived derive_direct(const kokonet::VertexGermAngles& g) {
  Derived q{};
  q.sigma = 0.5 * (g.alpha + g.beta + g.gamma + g.delta);
  q.aBar = q.sigma - g.alpha;
  q.bBar = q.sigma - g.beta;
  q.gBar = q.sigma - g.gamma;
  q.dBar = q.sigma - g.delta;
  q.eps = std::sin(q.sigma) > 0 ? 1 : -1;
  q.a = std::sin(g.alpha) / std::sin(q.aBar);
  q.b = std::sin(g.beta) / std::sin(q.bBar);
  q.c = std::sin(g.gamma) / std::sin(q.gBar);
  q.d = std::sin(g.delta) / std::sin(q.dBar);
  q.M = q.a * q.b * q.c * q.d;
  q.r = q.a * q.d;
  q.s = q.c * q.d;
  q.f = q.a * q.c;
  q.u = 1.0 - q.M;
  q.x = 1.0 / (q.r - 1.0);
  q.y = 1.0 / (q.s - 1.0);
  q.z = 1.0 / (q.f - 1.0);
  return q;
}

// Vertex-star vectors: e1 makes angle alpha with x and is lifted by xi; e2 makes angle
// gamma with the delta-rotated axis and is lifted by eta.
inline double beta_from_star(double alpha, double gamma, double delta, double xi, double eta) {
  const Vec3 x(1, 0, 0), y(0, 1, 0), z(0, 0, 1);
  const Vec3 e1 = std::cos(alpha) * x + std::sin(alpha) * (std::cos(xi) * y + std::sin(xi) * z);
  const Vec3 g = std::cos(delta) * x + std::sin(delta) * y;
  const Vec3 gp = std::sin(delta) * x - std::cos(delta) * y;
  const Vec3 e2 = std::cos(gamma) * g + std::sin(gamma) * (std::cos(eta) * gp + std::sin(eta) * z);
  return std::acos(std::clamp(e1.dot(e2), -1.0, 1.0));
}

inline double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

// Oriented dihedral angles from vertex positions with the normals
//   n0 = A2A1 x A2A3, n1 = A2B2 x A2A1, n2 = A2A3 x A2C2, n3 = A3A4 x A3B3, n4 = A1C1 x A1A4
// and sign det(n_i, n0, A_i - A_{i+1}).
inline std::array<double, 4> dihedrals_direct(const kokonet::EmbeddedNet& e) {
  const auto& A = [&](int i) { return e.A(i - 1); };
  const auto& B = [&](int i) { return e.B(i - 1); };
  const auto& C = [&](int i) { return e.C(i - 1); };
  const Vec3 n0 = (A(1) - A(2)).cross(A(3) - A(2));
  const std::array<Vec3, 4> n{(B(2) - A(2)).cross(A(1) - A(2)), (A(3) - A(2)).cross(C(2) - A(2)),
                              (A(4) - A(3)).cross(B(3) - A(3)), (C(1) - A(1)).cross(A(4) - A(1))};
  std::array<double, 4> out{};
  for (int i = 1; i <= 4; ++i) {
    const Vec3& ni = n[static_cast<std::size_t>(i - 1)];
    const Vec3 edge = A(i) - A(i % 4 + 1);
    Eigen::Matrix3d m;
    m.col(0) = ni;
    m.col(1) = n0;
    m.col(2) = edge;
    const double sgn = m.determinant() >= 0 ? 1.0 : -1.0;
    out[static_cast<std::size_t>(i - 1)] = sgn * (pi - angle_between(n0, ni));
  }
  return out;
}

// Interior angle at p between rays to q and r.
inline double corner(const Vec3& p, const Vec3& q, const Vec3& r) { return angle_between(q - p, r - p); }

// Flat angles at A_i: alpha in the theta_i / theta_{i-1} side quad toward B, etc.
// alpha_i = angle B_i A_i A_(alpha neighbour), beta_i = angle B_i A_i C_i,
// gamma_i = angle C_i A_i A_(gamma neighbour), delta_i = interior quad angle.
inline kokonet::VertexGermAngles flat_direct(const kokonet::EmbeddedNet& e, int v) {
  static constexpr std::array<int, 4> alphaNbr{1, 0, 3, 2};
  static constexpr std::array<int, 4> gammaNbr{3, 2, 1, 0};
  const auto i = static_cast<std::size_t>(v);
  return {corner(e.A(v), e.B(v), e.A(alphaNbr[i])), corner(e.A(v), e.B(v), e.C(v)),
          corner(e.A(v), e.C(v), e.A(gammaNbr[i])), corner(e.A(v), e.A(alphaNbr[i]), e.A(gammaNbr[i]))};
}

}  // namespace oracle
