#include "kokonet/elliptic.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "kokonet/error.hpp"
#include "kokonet/units.hpp"

namespace kokonet {
namespace {

constexpr int kAgmCap = 32;
constexpr double kAgmTol = 1e-15;
constexpr double kPoleMargin = 1e-9;

double agm(double a, double b) {
  for (int i = 0; i < kAgmCap && std::abs(a - b) > kAgmTol * a; ++i) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return 0.5 * (a + b);
}

// K from the complementary modulus directly; avoids cancellation in 1 - k^2.
double complete_K_from_kprime(double kp) { return pi / (2.0 * agm(1.0, kp)); }

JacobiValues jacobi_impl(double u, double k, double kp) {
  if (k == 0.0) return {std::sin(u), std::cos(u), 1.0};
  std::array<double, kAgmCap + 1> a{}, c{};
  a[0] = 1.0;
  double b = kp;
  c[0] = k;
  int n = 0;
  while (n < kAgmCap && std::abs(c[n]) > kAgmTol) {
    a[n + 1] = 0.5 * (a[n] + b);
    c[n + 1] = 0.5 * (a[n] - b);
    b = std::sqrt(a[n] * b);
    ++n;
  }
  double phi = std::ldexp(a[n] * u, n);
  for (int j = n; j > 0; --j) phi = 0.5 * (phi + std::asin(c[j] / a[j] * std::sin(phi)));
  const double sn = std::sin(phi);
  const double cn = std::cos(phi);
  // dn > 0 on the real axis; this form stays accurate where cos(phi1 - phi0) -> 0.
  const double dn = std::sqrt(kp * kp + k * k * cn * cn);
  return {sn, cn, dn};
}

void check_line(const PhaseShift& t, const EllipticContext& ctx) {
  if (t.m < 0 || t.m > 3) throw Error(ErrorCode::Domain, "phase-shift line index must be 0..3");
  if (!(t.v >= 0.0) || t.v >= ctx.KPrime) {
    std::ostringstream os;
    os << "imaginary part " << t.v << " outside [0, K') with K' = " << ctx.KPrime;
    throw Error(ErrorCode::Domain, os.str());
  }
  if (t.m % 2 == 0 && t.v > ctx.KPrime * (1.0 - kPoleMargin)) {
    std::ostringstream os;
    os << "dn pole at v = K' (v = " << t.v << ", K' = " << ctx.KPrime << ")";
    throw Error(ErrorCode::Overflow, os.str());
  }
}

}  // namespace

double complete_K(double k) {
  if (!(k >= 0.0 && k < 1.0)) throw Error(ErrorCode::Domain, "complete_K requires 0 <= k < 1");
  return complete_K_from_kprime(std::sqrt((1.0 - k) * (1.0 + k)));
}

JacobiValues jacobi_real(double u, double k) {
  if (!(k >= 0.0 && k < 1.0)) throw Error(ErrorCode::Domain, "jacobi_real requires 0 <= k < 1");
  if (!std::isfinite(u)) throw Error(ErrorCode::Domain, "jacobi_real requires finite u");
  return jacobi_impl(u, k, std::sqrt((1.0 - k) * (1.0 + k)));
}

EllipticContext EllipticContext::from_modulus(double M) {
  if (!(M > 0.0) || M == 1.0 || !std::isfinite(M)) {
    throw Error(ErrorCode::Domain, "elliptic context requires M > 0 and M != 1");
  }
  EllipticContext ctx;
  ctx.M = M;
  if (M < 1.0) {
    ctx.k = std::sqrt(1.0 - M);
    ctx.kPrime = std::sqrt(M);
    ctx.lattice = LatticeKind::Rectangular;
  } else {
    ctx.k = std::sqrt(1.0 - 1.0 / M);
    ctx.kPrime = std::sqrt(1.0 / M);
    ctx.lattice = LatticeKind::Rhombic;
  }
  ctx.K = complete_K_from_kprime(ctx.kPrime);
  ctx.KPrime = complete_K_from_kprime(ctx.k);
  return ctx;
}

// Imaginary transformation: dn(iv,k) = dn(v,k')/cn(v,k'), sn(iv,k) = i sn(v,k')/cn(v,k').
// Quarter shift: dn(z+K) = k'/dn(z), sn(z+K) = cn(z)/dn(z). dn has period 2K.
double dn_vertical(const PhaseShift& t, const EllipticContext& ctx) {
  check_line(t, ctx);
  const JacobiValues w = jacobi_impl(t.v, ctx.kPrime, ctx.k);
  if (t.m % 2 == 0) return w.dn / w.cn;
  return ctx.kPrime * w.cn / w.dn;
}

double sn_vertical_sq(const PhaseShift& t, const EllipticContext& ctx) {
  check_line(t, ctx);
  const JacobiValues w = jacobi_impl(t.v, ctx.kPrime, ctx.k);
  if (t.m % 2 == 0) {
    const double r = w.sn / w.cn;
    return -r * r;
  }
  return 1.0 / (w.dn * w.dn);
}

double dn_vertical_dv(const PhaseShift& t, const EllipticContext& ctx) {
  check_line(t, ctx);
  const JacobiValues w = jacobi_impl(t.v, ctx.kPrime, ctx.k);
  const double k2 = ctx.k * ctx.k;
  if (t.m % 2 == 0) return k2 * w.sn / (w.cn * w.cn);
  return -ctx.kPrime * k2 * w.sn / (w.dn * w.dn);
}

int phase_interval(AmplitudeClass pq, bool sigmaBelowPi) noexcept {
  switch (pq) {
    case AmplitudeClass::PosReal: return sigmaBelowPi ? 0 : 2;
    case AmplitudeClass::PosImag: return sigmaBelowPi ? 1 : 3;
    case AmplitudeClass::NegReal: return sigmaBelowPi ? 2 : 0;
  }
  return 0;
}

PhaseShift invert_phase_shift(double f, const EllipticContext& ctx, AmplitudeClass pq,
                              bool sigmaBelowPi) {
  if (!(f > 0.0) || !std::isfinite(f)) {
    throw Error(ErrorCode::PhaseShiftInconsistent, "f must be positive and finite");
  }
  const double target = ctx.M < 1.0 ? std::sqrt(f) : 1.0 / std::sqrt(f);
  PhaseShift t{phase_interval(pq, sigmaBelowPi), 0.0};
  const bool even = t.m % 2 == 0;

  // Open range of dn on the line: (1, inf) increasing for even m, (0, k') decreasing for odd m.
  const double boundary = even ? 1.0 : ctx.kPrime;
  const bool inside = even ? target > boundary * (1.0 + 1e-14) : (target < boundary * (1.0 - 1e-14));
  if (!inside) {
    std::ostringstream os;
    os << "dn target " << target << " is not interior to the range of dn on line m = " << t.m
       << (even ? " (1, inf)" : " (0, k')") << ", k' = " << ctx.kPrime;
    throw Error(ErrorCode::PhaseShiftInconsistent, os.str());
  }

  double lo = 0.0;
  double hi = even ? ctx.KPrime * (1.0 - kPoleMargin) : ctx.KPrime * (1.0 - 1e-15);
  auto g = [&](double v) {
    PhaseShift s{t.m, v};
    return dn_vertical(s, ctx) - target;
  };
  const double ghi = g(hi);
  if ((even && ghi < 0.0) || (!even && ghi > 0.0)) {
    std::ostringstream os;
    os << "dn target " << target << " lies beyond the guarded pole margin";
    throw Error(ErrorCode::PhaseShiftInconsistent, os.str());
  }
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm < 0.0) == even) lo = mid;
    else hi = mid;
  }
  t.v = 0.5 * (lo + hi);
  for (int i = 0; i < 5; ++i) {
    const double r = g(t.v);
    if (std::abs(r) <= 1e-13 * std::max(1.0, target)) break;
    const double d = dn_vertical_dv(t, ctx);
    if (d == 0.0 || !std::isfinite(d)) break;
    const double next = t.v - r / d;
    if (!(next > 0.0 && next < ctx.KPrime)) break;
    t.v = next;
  }
  return t;
}

double lattice_residual(std::complex<double> s, const EllipticContext& ctx) {
  const std::complex<double> w1(4.0 * ctx.K, 0.0);
  const std::complex<double> w2 = ctx.lattice == LatticeKind::Rectangular
                                      ? std::complex<double>(0.0, 2.0 * ctx.KPrime)
                                      : std::complex<double>(2.0 * ctx.K, 2.0 * ctx.KPrime);
  const double b = s.imag() / w2.imag();
  const double a = (s.real() - b * w2.real()) / w1.real();
  const double a0 = std::round(a);
  const double b0 = std::round(b);
  double best = std::numeric_limits<double>::infinity();
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      const std::complex<double> p = (a0 + i) * w1 + (b0 + j) * w2;
      best = std::min(best, std::abs(s - p));
    }
  }
  return best;
}

}  // namespace kokonet
