#include "kokonet/kinematics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "kokonet/error.hpp"
#include "kokonet/units.hpp"

namespace kokonet {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Order of the propagation chain: vertex index, and whether the known angle is xi.
struct ChainStep {
  int vertex;
  bool forward;
};
constexpr std::array<ChainStep, 4> kChain{{{1, true}, {2, false}, {3, true}, {0, false}}};

double guarded_sqrt(double radicand, const char* what) {
  if (!(radicand > 0.0) || !std::isfinite(radicand)) {
    std::ostringstream os;
    os << "radicand of " << what << " is not positive (" << radicand << ")";
    throw Error(ErrorCode::Inadmissible, os.str());
  }
  return std::sqrt(radicand);
}

double checked_acos(double c, const char* what, int vertex) {
  constexpr double slack = 1e-12;
  if (!std::isfinite(c) || std::abs(c) > 1.0 + slack) {
    std::ostringstream os;
    os << "cos " << what << " at A" << vertex + 1 << " = " << c << " is outside [-1, 1]";
    throw Error(ErrorCode::NonRealAngles, os.str());
  }
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace

Parity vertex_parity(int vertex) noexcept { return vertex % 2 == 0 ? Parity::Odd : Parity::Even; }

int xi_index(int vertex) noexcept {
  // A1 -> theta1, A2 -> theta1, A3 -> theta3, A4 -> theta3
  return vertex < 2 ? 0 : 2;
}

int eta_index(int vertex) noexcept {
  // A1 -> theta4, A2 -> theta2, A3 -> theta2, A4 -> theta4
  return (vertex == 0 || vertex == 3) ? 3 : 1;
}

double TransferSolutions::pick(int sign) const {
  if (count == 0) throw Error(ErrorCode::PropagationDead, "no transfer solution to pick");
  if (count == 1) return values[0];
  return sign < 0 ? values[0] : values[1];
}

TransferSolutions solve_trig_linear(double a, double b, double c) {
  TransferSolutions out;
  const double R = std::hypot(a, b);
  if (R <= 1e-300) return out;
  const double excess = std::abs(c) - R;
  if (excess > 1e-12 * R) return out;
  const double phi = std::atan2(b, a);
  const double d = std::acos(std::clamp(c / R, -1.0, 1.0));
  if (d == 0.0 || std::abs(d - pi) == 0.0) {
    out.values[0] = wrap_angle(phi + d);
    out.count = 1;
    return out;
  }
  double s0 = wrap_angle(phi - d), s1 = wrap_angle(phi + d);
  if (s0 > s1) std::swap(s0, s1);
  out.values = {s0, s1};
  out.count = 2;
  return out;
}

CouplingTerms coupling_terms(const VertexGermAngles& g, double xi) {
  const double ca = std::cos(g.alpha), sa = std::sin(g.alpha);
  const double cc = std::cos(g.gamma), sc = std::sin(g.gamma);
  const double cd = std::cos(g.delta), sd = std::sin(g.delta);
  const double cx = std::cos(xi), sx = std::sin(xi);
  return {ca * cc * cd + cx * sa * cc * sd, sc * (ca * sd - cx * sa * cd), sa * sc * sx};
}

TransferSolutions vertex_transfer(const VertexGermAngles& g, double xi) {
  const CouplingTerms c = coupling_terms(g, xi);
  return solve_trig_linear(c.Q, c.R, std::cos(g.beta) - c.P);
}

TransferSolutions vertex_transfer_inverse(const VertexGermAngles& g, double eta) {
  return vertex_transfer({g.gamma, g.beta, g.alpha, g.delta}, eta);
}

std::array<double, 4> coupling_residuals(const NetAngles& net, const DihedralState& s) {
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) {
    const CouplingTerms c = coupling_terms(net[i], s[xi_index(i)]);
    const double eta = s[eta_index(i)];
    out[static_cast<std::size_t>(i)] =
        std::cos(net[i].beta) - (c.P + c.Q * std::cos(eta) + c.R * std::sin(eta));
  }
  return out;
}

double max_coupling_residual(const NetAngles& net, const DihedralState& s) {
  double m = 0.0;
  for (double r : coupling_residuals(net, s)) m = std::max(m, std::abs(r));
  return m;
}

Propagation propagate_from(const NetAngles& net, int driver, double value,
                           const std::array<int, 4>& branch) {
  if (driver < 0 || driver > 3) throw Error(ErrorCode::Domain, "driver index must be 0..3");
  Propagation out;
  out.state[driver] = wrap_angle(value);
  double closing = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto [v, forward] = kChain[(static_cast<std::size_t>(driver) + k) % 4];
    const TransferSolutions sol = forward ? vertex_transfer(net[v], out.state[xi_index(v)])
                                          : vertex_transfer_inverse(net[v], out.state[eta_index(v)]);
    if (sol.empty()) {
      throw Error(ErrorCode::PropagationDead,
                  "no real transfer at vertex A" + std::to_string(v + 1));
    }
    const double x = sol.pick(branch[k]);
    if (k == 3) closing = x;
    else out.state[forward ? eta_index(v) : xi_index(v)] = x;
  }
  out.closureResidual = angle_distance(closing, out.state[driver]);
  return out;
}

Propagation propagate(const NetAngles& net, double theta1, const std::array<int, 4>& branch) {
  return propagate_from(net, 0, theta1, branch);
}

namespace {

std::array<int, 4> branch_from_mask(int mask) {
  std::array<int, 4> br{};
  for (int k = 0; k < 4; ++k) br[static_cast<std::size_t>(k)] = (mask >> k) & 1 ? 1 : -1;
  return br;
}

}  // namespace

DihedralState refine_state(const NetAngles& net, const DihedralState& s0, int driver) {
  DihedralState s = s0;
  double r = max_coupling_residual(net, s);
  for (int it = 0; it < 8 && r > 1e-15; ++it) {
    Eigen::Matrix<double, 4, 3> J = Eigen::Matrix<double, 4, 3>::Zero();
    Eigen::Vector4d f;
    const auto res = coupling_residuals(net, s);
    for (int v = 0; v < 4; ++v) {
      const auto& g = net[v];
      const double xi = s[xi_index(v)], eta = s[eta_index(v)];
      const double sa = std::sin(g.alpha), sc = std::sin(g.gamma), cc = std::cos(g.gamma);
      const double sd = std::sin(g.delta), cd = std::cos(g.delta);
      const double sx = std::sin(xi), cx = std::cos(xi);
      const CouplingTerms c = coupling_terms(g, xi);
      const double dP = -sx * sa * cc * sd, dQ = sc * sx * sa * cd, dR = sa * sc * cx;
      const double dxi = -(dP + dQ * std::cos(eta) + dR * std::sin(eta));
      const double deta = c.Q * std::sin(eta) - c.R * std::cos(eta);
      f[v] = res[static_cast<std::size_t>(v)];
      int col = 0;
      for (int k = 0; k < 4; ++k) {
        if (k == driver) continue;
        if (k == xi_index(v)) J(v, col) += dxi;
        if (k == eta_index(v)) J(v, col) += deta;
        ++col;
      }
    }
    const Eigen::Vector3d step = J.colPivHouseholderQr().solve(-f);
    if (!step.allFinite()) break;
    DihedralState n = s;
    int col = 0;
    for (int k = 0; k < 4; ++k) {
      if (k == driver) continue;
      n[k] = wrap_angle(n[k] + step[col++]);
    }
    const double rn = max_coupling_residual(net, n);
    if (!(rn < r)) break;
    s = n;
    r = rn;
  }
  return s;
}

std::vector<Propagation> closing_states_from(const NetAngles& net, int driver, double value,
                                             double tol) {
  std::vector<Propagation> out;
  for (int mask = 0; mask < 16; ++mask) {
    try {
      Propagation p = propagate_from(net, driver, value, branch_from_mask(mask));
      if (p.closureResidual <= std::max(tol, kRefineWindow)) {
        const DihedralState r = refine_state(net, p.state, driver);
        const double res = max_coupling_residual(net, r);
        if (res < p.closureResidual) {
          p.state = r;
          p.closureResidual = res;
        }
      }
      if (p.closureResidual > tol) continue;
      const bool dup = std::any_of(out.begin(), out.end(), [&](const Propagation& q) {
        return state_distance(q.state, p.state) <= 1e-9;
      });
      if (!dup) out.push_back(p);
    } catch (const Error&) {
    }
  }
  return out;
}

std::vector<Propagation> closing_states(const NetAngles& net, double theta1, double tol) {
  return closing_states_from(net, 0, theta1, tol);
}

namespace {

DihedralState extrapolate(const DihedralState& a, const DihedralState& b, double w) {
  DihedralState p;
  for (int i = 0; i < 4; ++i) p[i] = wrap_angle(b[i] + w * wrap_angle(b[i] - a[i]));
  return p;
}

enum class Step { Ok, Dead, Ambiguous };

// Closing state at the driver value nearest to the predicted state. A choice is
// accepted only if no distinct rival is comparably close; otherwise the step must shrink.
Step continue_to(const NetAngles& net, const DihedralState& prev, const DihedralState& predicted,
                 int driver, double value, DihedralState& out) {
  const double jump = std::max(0.05, 25.0 * angle_distance(value, prev[driver]));
  std::vector<DihedralState> cands;
  for (const auto& p : closing_states_from(net, driver, value, kTraceCloseTol)) cands.push_back(p.state);
  std::size_t best = cands.size();
  double bestDist = inf;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const double d = state_distance(cands[i], predicted);
    if (state_distance(cands[i], prev) <= jump && d < bestDist) {
      bestDist = d;
      best = i;
    }
  }
  if (best == cands.size()) return Step::Dead;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (i == best) continue;
    // candidates this close are one state seen through a near-double root
    if (state_distance(cands[i], cands[best]) <= 1e-7) continue;
    if (state_distance(cands[i], predicted) < 2.0 * bestDist) return Step::Ambiguous;
  }
  out = cands[best];
  return Step::Ok;
}

// Walks from (t0, s0) to t1 with adaptive substeps; back is the state before s0, if any.
std::optional<DihedralState> walk(const NetAngles& net, int driver, double t0, const DihedralState& s0,
                                  const std::optional<std::pair<double, DihedralState>>& back, double t1,
                                  std::string& diag, std::optional<std::pair<double, DihedralState>>& last) {
  constexpr int kSub = 8;
  double t = t0;
  DihedralState s = s0;
  std::optional<std::pair<double, DihedralState>> prev = back;
  const double h0 = (t1 - t0) / kSub;
  double h = h0;
  const double hMin = std::abs(t1 - t0) * 1e-9 + 1e-14;
  while (t != t1) {
    double tn = t + h;
    if ((h > 0 && tn > t1) || (h < 0 && tn < t1) || tn == t) tn = t1;
    DihedralState predicted = s;
    if (prev && prev->first != t) predicted = extrapolate(prev->second, s, (tn - t) / (t - prev->first));
    DihedralState next;
    const Step r = continue_to(net, s, predicted, driver, angle_from_cot_half(tn, 1.0), next);
    if (r == Step::Ok) {
      prev = std::pair{t, s};
      s = next;
      t = tn;
      if (std::abs(2 * h) <= std::abs(h0)) h *= 2;
      continue;
    }
    h *= 0.5;
    if (std::abs(h) < hMin) {
      std::ostringstream os;
      os << (r == Step::Dead ? "branch lost" : "branches indistinguishable") << " near t = " << t;
      diag = os.str();
      return std::nullopt;
    }
  }
  last = prev;
  return s;
}

}  // namespace

FlexionTrace flexion_trace(const NetAngles& net, const DihedralState& start, double tMin,
                           double tMax, int steps, int driver) {
  if (steps < 1 || !(tMin <= tMax)) throw Error(ErrorCode::Domain, "invalid trace range");
  if (driver < 0 || driver > 3) throw Error(ErrorCode::Domain, "driver index must be 0..3");
  const double r0 = max_coupling_residual(net, start);
  if (r0 > 1e-10) {
    std::ostringstream os;
    os << "start state does not close (residual " << r0 << ")";
    throw Error(ErrorCode::Domain, os.str());
  }
  std::vector<double> grid;
  for (int i = 0; i < steps; ++i) {
    grid.push_back(steps == 1 ? tMin : tMin + (tMax - tMin) * i / (steps - 1));
  }
  const double ts = cot_half(start[driver]);

  FlexionTrace out;
  // Upward from the start, then downward; stitch in ascending order.
  std::vector<std::pair<double, DihedralState>> up, down;
  {
    double t = ts;
    DihedralState s = start;
    std::optional<std::pair<double, DihedralState>> back;
    for (double g : grid) {
      if (g < ts) continue;
      std::string diag;
      auto next = walk(net, driver, t, s, back, g, diag, back);
      if (!next) {
        out.truncated = true;
        out.diagnostic = diag;
        break;
      }
      t = g;
      s = *next;
      up.emplace_back(g, s);
    }
  }
  {
    double t = ts;
    DihedralState s = start;
    std::optional<std::pair<double, DihedralState>> back;
    for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
      const double g = *it;
      if (g >= ts) continue;
      std::string diag;
      auto next = walk(net, driver, t, s, back, g, diag, back);
      if (!next) {
        out.truncated = true;
        if (!out.diagnostic.empty()) out.diagnostic += "; ";
        out.diagnostic += diag;
        break;
      }
      t = g;
      s = *next;
      down.emplace_back(g, s);
    }
  }
  for (auto it = down.rbegin(); it != down.rend(); ++it) {
    out.t.push_back(it->first);
    out.states.push_back(it->second);
  }
  for (const auto& [t, s] : up) {
    out.t.push_back(t);
    out.states.push_back(s);
  }
  return out;
}

BricardCoefficients bricard_coefficients(const DihedralState& s) {
  BricardCoefficients out;
  for (int i = 1; i <= 4; ++i) {
    const double ti = s[i - 1];
    const double tp = s[(i + 2) % 4];  // theta_{i-1}, theta0 = theta4
    for (int j = 1; j <= 4; ++j) {
      const double jj = j * (j - 1);
      const double c1 = std::cos(ti / 2 + pi / 4 * i * jj + pi * j / 2);
      const double c2 = std::cos(tp / 2 + pi / 4 * (i - 1) * jj + pi * j / 2);
      out.A[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] = 4 * c1 * c1 * c2 * c2;
    }
  }
  return out;
}

double Biquadratic::eval(double w1, double w2) const {
  const double X = w1 * w1, Y = w2 * w2;
  return c22 * X * Y + c20 * X + c02 * Y + 2 * c11 * w1 * w2 + c00;
}

Biquadratic vertex_biquadratic(const VertexGermAngles& g) {
  const double ca = std::cos(g.alpha), sa = std::sin(g.alpha);
  const double cc = std::cos(g.gamma), sc = std::sin(g.gamma);
  const double cd = std::cos(g.delta), sd = std::sin(g.delta);
  const double A0 = ca * cc * cd, A1 = sa * cc * sd;
  const double B0 = sc * ca * sd, B1 = -sc * sa * cd;
  const double C1 = sa * sc;
  const double e = A0 - std::cos(g.beta);
  return {e + A1 + B0 + B1, e + A1 - B0 - B1, e - A1 + B0 - B1, 2 * C1, e - A1 - B0 + B1};
}

std::array<double, 8> eq13_residuals(const NetAngles& net, const DihedralState& s) {
  std::array<double, 8> out{};
  const BricardCoefficients bc = bricard_coefficients(s);
  for (int i = 0; i < 4; ++i) {
    const DerivedVertexQuantities q = derive(net[i]);
    const double u = q.u, x = q.x, y = q.y, z = q.z;
    const double den = 2 * guarded_sqrt(x * y * u * (1 + z) * (1 + u * z), "cos delta relation");
    const auto& A = bc.A[static_cast<std::size_t>(i)];
    const double lhsD = std::cos(net[i].delta);
    const double rhsD = q.epsilon * (1 - y * z * u - x * z * u + x * y * u) / den;
    const double lhsT = std::sin(s[i]) * std::sin(s[(i + 3) % 4]);
    const double rhsT = q.epsilon * (A[0] + A[1] * y * z * u + A[2] * x * z * u + A[3] * x * y * u) / den;
    out[static_cast<std::size_t>(i)] = lhsD - rhsD;
    out[static_cast<std::size_t>(4 + i)] = lhsT - rhsT;
  }
  return out;
}

std::array<double, 9> SearchParameters::to_array() const {
  return {u, x1, x3, y1, y2, z[0], z[1], z[2], z[3]};
}

SearchParameters SearchParameters::from_array(const std::array<double, 9>& a) {
  SearchParameters p;
  p.u = a[0];
  p.x1 = a[1];
  p.x3 = a[2];
  p.y1 = a[3];
  p.y2 = a[4];
  p.z = {a[5], a[6], a[7], a[8]};
  return p;
}

NetAngles recover_flat_angles(const SearchParameters& p, const std::array<int, 4>& eps) {
  const double u = p.u;
  if (u == 0.0 || u >= 1.0) throw Error(ErrorCode::Inadmissible, "u must be nonzero and below 1");
  NetAngles net;
  for (int i = 0; i < 4; ++i) {
    const double x = p.x(i), y = p.y(i), z = p.z[static_cast<std::size_t>(i)];
    for (double w : {x, y, z}) {
      if (w == 0.0 || w == -1.0 || u * w == -1.0) {
        throw Error(ErrorCode::Inadmissible, "parameter guard violated at A" + std::to_string(i + 1));
      }
    }
    const double e = eps[static_cast<std::size_t>(i)] < 0 ? -1.0 : 1.0;
    const double ca = e * (1 - y * z * u + x * z * u - x * y * u) /
                      (2 * guarded_sqrt(x * z * u * (1 + y) * (1 + u * y), "cos alpha"));
    const double cg = e * (1 + y * z * u - x * z * u - x * y * u) /
                      (2 * guarded_sqrt(y * z * u * (1 + x) * (1 + u * x), "cos gamma"));
    const double cd = e * (1 - y * z * u - x * z * u + x * y * u) /
                      (2 * guarded_sqrt(x * y * u * (1 + z) * (1 + u * z), "cos delta"));
    const double cs = (1 - u * (x * y + x * z + y * z + 2 * x * y * z)) /
                      (2 * guarded_sqrt(x * y * z * u * u * (1 + x) * (1 + y) * (1 + z), "cos sigma"));
    const double cb =
        e * (u * (1 + x) * (1 + y) * (1 + z) + (1 + u * x) * (1 + u * y) * (1 + u * z) -
             u * x * y * z * (u - 1) * (u - 1)) /
        (2 * guarded_sqrt(u * (1 + x) * (1 + y) * (1 + z) * (1 + u * x) * (1 + u * y) * (1 + u * z),
                          "cos beta"));
    VertexGermAngles g{checked_acos(ca, "alpha", i), checked_acos(cb, "beta", i),
                       checked_acos(cg, "gamma", i), checked_acos(cd, "delta", i)};
    const double halfSum = std::cos(0.5 * (g.alpha + g.beta + g.gamma + g.delta));
    if (!(std::abs(halfSum - cs) <= 1e-10)) {
      std::ostringstream os;
      os << "half-sum cosine mismatch at A" << i + 1 << " (" << std::abs(halfSum - cs) << ")";
      throw Error(ErrorCode::NonRealAngles, os.str());
    }
    net[i] = g;
  }
  return net;
}

const char* to_string(RigidityVerdict v) noexcept {
  switch (v) {
    case RigidityVerdict::Flexes: return "Flexes";
    case RigidityVerdict::Isolated: return "Isolated";
    case RigidityVerdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

RigidityReport rigidity_probe(const NetAngles& net, const DihedralState& state,
                              const RigidityConfig& cfg) {
  const double r0 = max_coupling_residual(net, state);
  if (r0 > 1e-10) {
    std::ostringstream os;
    os << "probe base state does not close (residual " << r0 << ")";
    throw Error(ErrorCode::Domain, os.str());
  }
  RigidityReport rep;
  rep.closing = -1;
  double globalMin = inf;
  bool anyBelowIsolated = false;
  for (int driver = 0; driver < 4; ++driver) {
    int samples = 0, closing = 0;
    double maxRes = 0.0;
    for (int side : {-1, 1}) {
      for (int k = 1; k <= cfg.samplesPerSide; ++k) {
        const double d = side * cfg.radius * k / cfg.samplesPerSide;
        double best = inf;
        for (int mask = 0; mask < 16; ++mask) {
          try {
            const Propagation p =
                propagate_from(net, driver, state[driver] + d, branch_from_mask(mask));
            if (state_distance(p.state, state) > cfg.nearnessFactor * std::abs(d)) continue;
            best = std::min(best, p.closureResidual);
          } catch (const Error&) {
          }
        }
        ++samples;
        if (best <= cfg.closeTol) ++closing;
        if (best <= cfg.isolatedTol) anyBelowIsolated = true;
        globalMin = std::min(globalMin, best);
        maxRes = std::max(maxRes, best);
      }
    }
    if (closing > rep.closing) {
      rep.driver = driver;
      rep.samples = samples;
      rep.closing = closing;
      rep.maxResidual = maxRes;
    }
  }
  rep.minResidual = globalMin;
  if (rep.closing >= cfg.flexFraction * rep.samples) rep.verdict = RigidityVerdict::Flexes;
  else if (!anyBelowIsolated) rep.verdict = RigidityVerdict::Isolated;
  else rep.verdict = RigidityVerdict::Inconclusive;
  return rep;
}

}  // namespace kokonet
