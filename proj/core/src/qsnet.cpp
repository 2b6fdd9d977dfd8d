#include "kokonet/qsnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kokonet/error.hpp"
#include "kokonet/units.hpp"

namespace kokonet {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Positive roots in tau = t^2 of c0 + c2 tau.
void push_root(std::vector<double>& out, double c0, double c2) {
  if (c2 == 0.0) return;
  const double tau = -c0 / c2;
  if (tau > 0.0 && std::isfinite(tau)) out.push_back(tau);
}

}  // namespace

bool Interval::bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

NetAngles build_qs_net(const QsSeed& seed) {
  const VertexGermAngles v1{seed.alpha1, seed.beta1, seed.gamma1, pi / 2};
  for (double a : {seed.alpha1, seed.beta1, seed.gamma1}) {
    if (!(a > 0.0 && a < pi)) {
      std::ostringstream os;
      os << "seed angle " << to_deg(a) << " deg outside (0, 180)";
      throw Error(ErrorCode::InvalidSeed, os.str());
    }
  }
  if (auto bad = ellipticity_violation(v1); !bad.empty()) {
    throw Error(ErrorCode::NotElliptic, "seed germ has vanishing signed sum " + bad);
  }
  const double sigma = 0.5 * (v1.alpha + v1.beta + v1.gamma + v1.delta);
  const std::array<std::pair<const char*, double>, 4> bars{{{"alphaBar", sigma - v1.alpha},
                                                            {"betaBar", sigma - v1.beta},
                                                            {"gammaBar", sigma - v1.gamma},
                                                            {"deltaBar", sigma - v1.delta}}};
  for (const auto& [name, value] : bars) {
    if (!(value > 0.0 && value < pi)) {
      std::ostringstream os;
      os << name << " = " << to_deg(value) << " deg outside (0, 180)";
      throw Error(ErrorCode::InvalidSeed, os.str());
    }
  }
  NetAngles net;
  net[0] = v1;
  net[3] = v1;
  net[1] = {v1.delta, v1.gamma, v1.beta, v1.alpha};
  net[2] = {pi - v1.delta, pi - v1.gamma, pi - v1.beta, pi - v1.alpha};
  return net;
}

double QsFlexion::discriminant(double t) const {
  const double t2 = t * t;
  return (first[0] + first[1] * t2) * (den4[0] + den4[1] * t2);
}

double QsFlexion::discriminant_factored(double t) const {
  const double t2 = t * t;
  return barSineProduct * (oneMinusS2 + t2) * (oneMinusM / oneMinusS2 * t2 + 1.0);
}

bool QsFlexion::in_domain(double t) const {
  const double t2 = t * t;
  // interval ends are rounded; a t within rounding of a pole is still a pole
  auto vanishes = [t2](const std::array<double, 2>& d) {
    return std::abs(d[0] + d[1] * t2) <= 1e-14 * (std::abs(d[0]) + std::abs(d[1]) * t2);
  };
  if (vanishes(den13) || vanishes(den4)) return false;
  return std::any_of(validIntervals.begin(), validIntervals.end(),
                     [t](const Interval& iv) { return iv.contains(t); });
}

QsFlexion qs_flexion(const QsSeed& seed, int branch) {
  if (branch != 1 && branch != -1) throw Error(ErrorCode::Domain, "branch must be +1 or -1");
  QsFlexion fl;
  fl.seed = seed;
  fl.net = build_qs_net(seed);
  fl.branch = branch;

  const VertexGermAngles& g = fl.net[0];
  const DerivedVertexQuantities q1 = derive(g);
  const double b = g.beta;
  const double sA = std::sin(q1.alphaBar), sB = std::sin(q1.betaBar);
  const double sC = std::sin(q1.gammaBar), sD = std::sin(q1.deltaBar);

  fl.sinBeta = std::sin(b);
  fl.den13 = {sD * std::sin(q1.alphaBar - b), sA * std::sin(q1.deltaBar - b)};
  fl.den4 = {sC * sD, std::sin(q1.gammaBar - b) * std::sin(q1.deltaBar - b)};
  fl.first = {std::sin(q1.sigma) * std::sin(q1.alphaBar - b), sA * sB};
  const DerivedVertexQuantities q2 = derive(fl.net[1]);
  fl.s2 = q2.s;
  fl.M = q1.M;
  fl.oneMinusS2 = -1.0 / q2.y;
  fl.oneMinusM = q1.u;
  fl.barSineProduct = sA * sB * sC * sD;

  // D is even in t: find the sign pattern in tau = t^2, splitting also where den13 vanishes.
  std::vector<double> cuts{0.0};
  push_root(cuts, fl.first[0], fl.first[1]);
  push_root(cuts, fl.den4[0], fl.den4[1]);
  std::vector<double> poles;
  push_root(poles, fl.den13[0], fl.den13[1]);
  cuts.insert(cuts.end(), poles.begin(), poles.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(inf);

  std::vector<Interval> positive;  // in t >= 0
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], c = cuts[i + 1];
    const double mid = std::isfinite(c) ? 0.5 * (a + c) : a + 1.0;
    if (fl.discriminant(std::sqrt(mid)) > 0.0) positive.push_back({std::sqrt(a), std::sqrt(c)});
  }
  // Merge t-intervals that touch at a cut which is neither a root of D nor a pole.
  auto is_pole = [&](double t) {
    return std::any_of(poles.begin(), poles.end(),
                       [&](double tau) { return std::abs(std::sqrt(tau) - t) <= 1e-15 * (1.0 + t); });
  };
  std::vector<Interval> merged;
  for (const auto& iv : positive) {
    if (!merged.empty() && merged.back().hi == iv.lo && !is_pole(iv.lo)) merged.back().hi = iv.hi;
    else merged.push_back(iv);
  }
  // Mirror to t < 0; an interval starting at 0 joins with its mirror image.
  std::vector<Interval> all;
  for (auto it = merged.rbegin(); it != merged.rend(); ++it) {
    if (it->lo == 0.0) continue;
    all.push_back({-it->hi, -it->lo});
  }
  for (const auto& iv : merged) {
    if (iv.lo == 0.0 && fl.den13[0] != 0.0) all.push_back({-iv.hi, iv.hi});
    else if (iv.lo == 0.0) {
      all.push_back({-iv.hi, 0.0});
      all.push_back({0.0, iv.hi});
    } else {
      all.push_back(iv);
    }
  }
  std::sort(all.begin(), all.end(), [](const Interval& a, const Interval& c) { return a.lo < c.lo; });
  fl.validIntervals = all;
  return fl;
}

DihedralState eval_flexion(const QsFlexion& fl, double t) {
  if (!fl.in_domain(t)) {
    std::ostringstream os;
    os << "t = " << t << " is outside every valid flexion interval";
    throw Error(ErrorCode::OutOfRange, os.str());
  }
  const double D = fl.discriminant(t);
  if (D < 0.0) throw Error(ErrorCode::NegativeDiscriminant, "D(t) < 0 at t = " + std::to_string(t));
  const double root = fl.branch * std::sqrt(D);
  const double t2 = t * t;
  const double d13 = fl.den13[0] + fl.den13[1] * t2;
  const double d4 = fl.den4[0] + fl.den4[1] * t2;
  DihedralState s;
  s[0] = angle_from_cot_half(-t * fl.sinBeta + root, d13);
  s[1] = angle_from_cot_half(t, 1.0);
  s[2] = angle_from_cot_half(t * fl.sinBeta + root, d13);
  s[3] = angle_from_cot_half(root, d4);
  return s;
}

std::vector<double> sample_interval(const Interval& iv, int n) {
  std::vector<double> out;
  if (n <= 0) return out;
  const double a = std::isfinite(iv.lo) ? std::atan(iv.lo) : -pi / 2;
  const double b = std::isfinite(iv.hi) ? std::atan(iv.hi) : pi / 2;
  const bool bounded = iv.bounded();
  for (int i = 0; i < n; ++i) {
    const double s = (i + 1.0) / (n + 1.0);
    out.push_back(bounded ? iv.lo + s * (iv.hi - iv.lo) : std::tan(a + s * (b - a)));
  }
  return out;
}

}  // namespace kokonet
