#include "kokonet/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kokonet/error.hpp"
#include "kokonet/units.hpp"

namespace kokonet {

double amplitude_mismatch(const std::array<DerivedVertexQuantities, 4>& q) {
  return std::max({std::abs(q[0].r - q[1].r), std::abs(q[0].s - q[3].s),
                   std::abs(q[2].r - q[3].r), std::abs(q[1].s - q[2].s)});
}

ClassificationReport classify(const NetAngles& net, double tol) {
  ClassificationReport rep;
  std::array<DerivedVertexQuantities, 4> q;
  for (int i = 0; i < 4; ++i) {
    if (auto bad = ellipticity_violation(net[i]); !bad.empty()) {
      throw Error(ErrorCode::NotElliptic, "vertex A" + std::to_string(i + 1) + ": " + bad);
    }
    q[static_cast<std::size_t>(i)] = derive(net[i]);
  }
  rep.elliptic = true;

  double mean = 0.0;
  for (int i = 0; i < 4; ++i) {
    rep.moduli[static_cast<std::size_t>(i)] = q[static_cast<std::size_t>(i)].M;
    mean += 0.25 * q[static_cast<std::size_t>(i)].M;
  }
  rep.M = mean;
  for (const auto& v : q) rep.moduliDeviation = std::max(rep.moduliDeviation, std::abs(v.M - q[0].M));
  rep.moduliEqual = rep.moduliDeviation <= tol;
  rep.amplitudesDeviation = amplitude_mismatch(q);
  rep.amplitudesMatch = rep.amplitudesDeviation <= tol;
  rep.periodResidual = std::numeric_limits<double>::infinity();

  if (!(mean > 0.0) || std::abs(mean - 1.0) <= tol) {
    rep.diagnostic = "common modulus must be positive and different from 1";
    return rep;
  }
  const EllipticContext ctx = EllipticContext::from_modulus(mean);
  try {
    for (std::size_t i = 0; i < 4; ++i) {
      rep.phaseShifts[i] = invert_phase_shift(q[i].f, ctx, amplitude_class(q[i].p, q[i].q),
                                              q[i].sigma < pi);
    }
    rep.phaseShiftsValid = true;
  } catch (const Error& e) {
    rep.diagnostic = e.what();
    return rep;
  }

  std::array<std::complex<double>, 4> t;
  for (std::size_t i = 0; i < 4; ++i) t[i] = rep.phaseShifts[i].value(ctx);
  std::array<int, 3> best{1, 1, 1};
  for (int mask = 0; mask < 8; ++mask) {
    const std::array<int, 3> e{(mask & 1) ? -1 : 1, (mask & 2) ? -1 : 1, (mask & 4) ? -1 : 1};
    const std::complex<double> s = t[0] + double(e[0]) * t[1] + double(e[1]) * t[2] + double(e[2]) * t[3];
    const double res = lattice_residual(s, ctx);
    if (res < rep.periodResidual) {
      rep.periodResidual = res;
      best = e;
    }
  }

  rep.verdict = rep.elliptic && rep.moduliEqual && rep.amplitudesMatch && rep.periodResidual <= tol;
  if (rep.verdict) {
    rep.periodSigns = best;
  } else {
    std::ostringstream os;
    if (!rep.moduliEqual) os << "moduli differ by " << rep.moduliDeviation << "; ";
    if (!rep.amplitudesMatch) os << "amplitudes differ by " << rep.amplitudesDeviation << "; ";
    if (rep.periodResidual > tol) os << "period residual " << rep.periodResidual << "; ";
    rep.diagnostic = os.str();
  }
  return rep;
}

int strip_dihedral(Strip s) noexcept {
  switch (s) {
    case Strip::Top: return 0;
    case Strip::Left: return 1;
    case Strip::Bottom: return 2;
    case Strip::Right: return 3;
  }
  return 0;
}

NetAngles switch_strip(const NetAngles& net, Strip which) {
  NetAngles out = net;
  auto flip_bg = [&](int i) {
    out[i].beta = pi - out[i].beta;
    out[i].gamma = pi - out[i].gamma;
  };
  auto flip_ab = [&](int i) {
    out[i].alpha = pi - out[i].alpha;
    out[i].beta = pi - out[i].beta;
  };
  switch (which) {
    case Strip::Right: flip_bg(0); flip_bg(3); break;
    case Strip::Left: flip_bg(1); flip_bg(2); break;
    case Strip::Top: flip_ab(0); flip_ab(1); break;
    case Strip::Bottom: flip_ab(2); flip_ab(3); break;
  }
  return out;
}

DihedralState switch_strip(const DihedralState& state, Strip which) {
  DihedralState out = state;
  const int j = strip_dihedral(which);
  out[j] = wrap_angle(out[j] - pi);
  return out;
}

namespace {

double rel_std(const std::vector<double>& v) {
  if (v.size() < 2) return std::numeric_limits<double>::infinity();
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / double(v.size()));
  if (mean == 0.0) return sd == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return sd / std::abs(mean);
}

}  // namespace

ExclusivityReport exclusivity(const NetAngles& net, const std::vector<DihedralState>& samples,
                              const ExclusivityOptions& opts) {
  if (samples.size() < opts.minSamples) {
    throw Error(ErrorCode::TooFewSamples, "exclusivity needs at least " +
                                              std::to_string(opts.minSamples) + " flexion samples");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  ExclusivityReport rep;
  rep.orthodiagonalRuledOut = rep.conjugateModularRuledOut = true;
  rep.trivialRuledOut = rep.linearCompoundRuledOut = true;
  rep.orthodiagonalMargin = rep.conjugateModularMargin = inf;
  rep.trivialMargin = rep.linearCompoundMargin = inf;

  constexpr std::array<Strip, 4> strips{Strip::Top, Strip::Left, Strip::Bottom, Strip::Right};
  for (int mask = 0; mask < 16; ++mask) {
    NetAngles n = net;
    std::vector<DihedralState> st = samples;
    for (int b = 0; b < 4; ++b) {
      if (!(mask & (1 << b))) continue;
      n = switch_strip(n, strips[static_cast<std::size_t>(b)]);
      for (auto& s : st) s = switch_strip(s, strips[static_cast<std::size_t>(b)]);
    }
    ++rep.stripVariantsChecked;

    // Orthodiagonal: cos a cos g = cos b cos d at every vertex.
    double ortho = 0.0;
    for (int i = 0; i < 4; ++i) {
      const auto& g = n[i];
      ortho = std::max(ortho, std::abs(std::cos(g.alpha) * std::cos(g.gamma) -
                                       std::cos(g.beta) * std::cos(g.delta)));
    }
    rep.orthodiagonalMargin = std::min(rep.orthodiagonalMargin, ortho);
    if (ortho <= opts.tol) rep.orthodiagonalRuledOut = false;

    // Conjugate-modular: 1/M_i + 1/M_{i+1} = 1 for some adjacent pair.
    std::array<double, 4> M{};
    for (int i = 0; i < 4; ++i) M[static_cast<std::size_t>(i)] = derive(n[i]).M;
    double conj = inf;
    for (std::size_t i = 0; i < 4; ++i) {
      conj = std::min(conj, std::abs(1.0 / M[i] + 1.0 / M[(i + 1) % 4] - 1.0));
    }
    rep.conjugateModularMargin = std::min(rep.conjugateModularMargin, conj);
    if (conj <= opts.tol) rep.conjugateModularRuledOut = false;

    // Trivial: some dihedral angle stays fixed.
    double minVariation = inf;
    for (int j = 0; j < 4; ++j) {
      double var = 0.0;
      for (const auto& s : st) var = std::max(var, angle_distance(s[j], st.front()[j]));
      minVariation = std::min(minVariation, var);
    }
    rep.trivialMargin = std::min(rep.trivialMargin, minVariation);
    if (minVariation <= opts.tol) rep.trivialRuledOut = false;

    // Linear compound: cot(theta1/2) / cot(theta3/2) or their product is constant.
    std::vector<double> ratio, product;
    for (const auto& s : st) {
      const double w1 = cot_half(s[0]);
      const double w3 = cot_half(s[2]);
      if (std::isfinite(w1) && std::isfinite(w3)) {
        product.push_back(w1 * w3);
        if (w3 != 0.0) ratio.push_back(w1 / w3);
      }
    }
    const double lc = std::min(rel_std(ratio), rel_std(product));
    rep.linearCompoundMargin = std::min(rep.linearCompoundMargin, lc);
    if (lc <= opts.constancyRelStd) rep.linearCompoundRuledOut = false;
  }
  return rep;
}

}  // namespace kokonet
