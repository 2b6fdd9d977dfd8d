#pragma once

#include <complex>

namespace kokonet {

// Complete elliptic integral of the first kind, K(k) for 0 <= k < 1.
double complete_K(double k);

struct JacobiValues {
  double sn;
  double cn;
  double dn;
};

// Real-argument Jacobi functions for 0 <= k < 1.
JacobiValues jacobi_real(double u, double k);

enum class LatticeKind { Rectangular, Rhombic };

struct EllipticContext {
  double M = 0.0;
  double k = 0.0;
  double kPrime = 1.0;
  double K = 0.0;
  double KPrime = 0.0;
  LatticeKind lattice = LatticeKind::Rectangular;

  // Builds the context for a common modulus M > 0, M != 1.
  static EllipticContext from_modulus(double M);
};

// t = m K + i v on one of the vertical lines used for phase shifts.
struct PhaseShift {
  int m = 0;
  double v = 0.0;

  std::complex<double> value(const EllipticContext& ctx) const {
    return {m * ctx.K, v};
  }
};

double dn_vertical(const PhaseShift& t, const EllipticContext& ctx);
double sn_vertical_sq(const PhaseShift& t, const EllipticContext& ctx);
// d/dv of dn along the line.
double dn_vertical_dv(const PhaseShift& t, const EllipticContext& ctx);

// Sign class of the product p*q of amplitudes.
enum class AmplitudeClass { PosReal, PosImag, NegReal };

// Real-part index m of the phase-shift interval selected by the sign classes.
int phase_interval(AmplitudeClass pq, bool sigmaBelowPi) noexcept;

// Solves dn(t) = sqrt(f) (M < 1) or 1/sqrt(f) (M > 1) on the interval chosen by
// (pq, sigmaBelowPi). Throws PhaseShiftInconsistent if the target is not an
// interior value of dn on that interval.
PhaseShift invert_phase_shift(double f, const EllipticContext& ctx, AmplitudeClass pq,
                              bool sigmaBelowPi);

// Distance from s to the nearest period-lattice point.
double lattice_residual(std::complex<double> s, const EllipticContext& ctx);

}  // namespace kokonet
