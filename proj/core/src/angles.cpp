#include "kokonet/angles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kokonet/error.hpp"
#include "kokonet/units.hpp"

namespace kokonet {
namespace {

Amplitude amplitude_of(double w) {
  return w >= 0.0 ? Amplitude{std::sqrt(w), false} : Amplitude{std::sqrt(-w), true};
}

void check_range(const VertexGermAngles& g) {
  for (double v : {g.alpha, g.beta, g.gamma, g.delta}) {
    if (!(v > 0.0 && v < pi)) {
      std::ostringstream os;
      os << "flat angle " << v << " rad outside (0, pi)";
      throw Error(ErrorCode::Domain, os.str());
    }
  }
}

}  // namespace

double state_distance(const DihedralState& a, const DihedralState& b) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i) m = std::max(m, angle_distance(a[i], b[i]));
  return m;
}

double NetAngles::delta_sum() const {
  double s = 0.0;
  for (const auto& v : vertices) s += v.delta;
  return s;
}

std::string ellipticity_violation(const VertexGermAngles& g, double tol) {
  for (int mask = 0; mask < 8; ++mask) {
    const double sb = (mask & 1) ? -1.0 : 1.0;
    const double sg = (mask & 2) ? -1.0 : 1.0;
    const double sd = (mask & 4) ? -1.0 : 1.0;
    const double sum = g.alpha + sb * g.beta + sg * g.gamma + sd * g.delta;
    if (std::abs(std::remainder(sum, 2.0 * pi)) <= tol) {
      std::string name = "alpha";
      name += sb > 0 ? "+beta" : "-beta";
      name += sg > 0 ? "+gamma" : "-gamma";
      name += sd > 0 ? "+delta" : "-delta";
      return name;
    }
  }
  return {};
}

bool is_elliptic(const VertexGermAngles& g, double tol) {
  return ellipticity_violation(g, tol).empty();
}

DerivedVertexQuantities derive(const VertexGermAngles& g) {
  check_range(g);
  if (auto bad = ellipticity_violation(g); !bad.empty()) {
    throw Error(ErrorCode::NotElliptic, "vanishing signed sum " + bad);
  }
  DerivedVertexQuantities q;
  q.sigma = 0.5 * (g.alpha + g.beta + g.gamma + g.delta);
  q.alphaBar = q.sigma - g.alpha;
  q.betaBar = q.sigma - g.beta;
  q.gammaBar = q.sigma - g.gamma;
  q.deltaBar = q.sigma - g.delta;
  q.epsilon = std::sin(q.sigma) > 0.0 ? 1 : -1;
  q.a = std::sin(g.alpha) / std::sin(q.alphaBar);
  q.b = std::sin(g.beta) / std::sin(q.betaBar);
  q.c = std::sin(g.gamma) / std::sin(q.gammaBar);
  q.d = std::sin(g.delta) / std::sin(q.deltaBar);
  q.M = q.a * q.b * q.c * q.d;
  q.r = q.a * q.d;
  q.s = q.c * q.d;
  q.f = q.a * q.c;
  // differences from 1 through the sine identities: no cancellation near M, r, s, f = 1
  const double ss = std::sin(q.sigma);
  const double sA = std::sin(q.alphaBar), sB = std::sin(q.betaBar);
  const double sC = std::sin(q.gammaBar), sD = std::sin(q.deltaBar);
  const double pa = std::sin(q.alphaBar - g.beta);
  const double pc = std::sin(q.gammaBar - g.beta);
  const double pd = std::sin(q.deltaBar - g.beta);
  const double rm1 = ss * pc / (sA * sD);
  const double sm1 = ss * pa / (sC * sD);
  const double fm1 = ss * pd / (sA * sC);
  q.u = ss * pa * pc * pd / (sA * sB * sC * sD);
  q.x = 1.0 / rm1;
  q.y = 1.0 / sm1;
  q.z = 1.0 / fm1;
  q.p = amplitude_of(rm1);
  q.q = amplitude_of(sm1);
  return q;
}

std::array<double, 7> sine_identity_residuals(const VertexGermAngles& g) {
  const DerivedVertexQuantities q = derive(g);
  const double ss = std::sin(q.sigma);
  const double sA = std::sin(q.alphaBar), sB = std::sin(q.betaBar);
  const double sC = std::sin(q.gammaBar), sD = std::sin(q.deltaBar);
  const double pa = std::sin(q.alphaBar - g.beta);
  const double pc = std::sin(q.gammaBar - g.beta);
  const double pd = std::sin(q.deltaBar - g.beta);
  return {
      (1.0 - q.a * q.b) - ss * pa / (sA * sB),
      (1.0 - q.b * q.c) - ss * pc / (sB * sC),
      (1.0 - q.b * q.d) - ss * pd / (sB * sD),
      (q.c * q.d - 1.0) - ss * pa / (sC * sD),
      (q.a * q.d - 1.0) - ss * pc / (sA * sD),
      (q.a * q.c - 1.0) - ss * pd / (sA * sC),
      (1.0 - q.M) - ss * pa * pc * pd / (sA * sB * sC * sD),
  };
}

VertexGermAngles complement(const VertexGermAngles& g) {
  return {pi - g.alpha, pi - g.beta, pi - g.gamma, pi - g.delta};
}

NetAngles complement(const NetAngles& net) {
  NetAngles out;
  for (int i = 0; i < 4; ++i) out[i] = complement(net[i]);
  return out;
}

bool admissible(const DerivedVertexQuantities& q) {
  const double M = q.M;
  if (!(M > 0.0)) return false;
  if (!(q.r > 0.0 && q.s > 0.0 && q.f > 0.0)) return false;
  if (!((q.r - 1.0) * (q.r - M) > 0.0)) return false;
  if (!((q.s - 1.0) * (q.s - M) > 0.0)) return false;
  if (!((q.f - 1.0) * (q.f - M) > 0.0)) return false;
  return (q.r - 1.0) * (q.s - 1.0) * (q.f - 1.0) * (1.0 - M) > 0.0;
}

AmplitudeClass amplitude_class(const Amplitude& p, const Amplitude& q) noexcept {
  if (p.imaginary && q.imaginary) return AmplitudeClass::NegReal;
  if (p.imaginary || q.imaginary) return AmplitudeClass::PosImag;
  return AmplitudeClass::PosReal;
}

}  // namespace kokonet
