#include "kokonet/search.hpp"

#include <Eigen/Core>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "kokonet/error.hpp"
#include "kokonet/units.hpp"

namespace kokonet {
namespace {

constexpr double kPenaltyScale = 1e6;

double guard_penalty(const SearchParameters& p, double margin) {
  double pen = 0.0;
  auto add = [&](double q) {
    if (std::abs(q) < margin) pen += kPenaltyScale * (margin - std::abs(q));
  };
  const double u = p.u;
  add(u);
  for (double x : {p.x1, p.x3}) {
    add(x);
    add(1 + x);
    add(1 + u * x);
  }
  for (double y : {p.y1, p.y2}) {
    add(y);
    add(1 + y);
    add(1 + u * y);
  }
  for (double z : p.z) {
    add(z);
    add(1 + z);
    add(1 + u * z);
  }
  return pen;
}

struct VertexTerms {
  double X;       // x y u (1+z)(1+uz)
  double numD;    // numerator of the cos(delta) relation
  double numT;    // numerator of the sin-product relation
};

VertexTerms vertex_terms(const SearchParameters& p, const BricardCoefficients& bc, int i) {
  const double u = p.u, x = p.x(i), y = p.y(i), z = p.z[static_cast<std::size_t>(i)];
  const auto& A = bc.A[static_cast<std::size_t>(i)];
  return {x * y * u * (1 + z) * (1 + u * z), 1 - y * z * u - x * z * u + x * y * u,
          A[0] + A[1] * y * z * u + A[2] * x * z * u + A[3] * x * y * u};
}

DihedralState cfg_state(const SearchConfig& cfg) {
  DihedralState s;
  s.theta = cfg.thetas;
  return s;
}

std::array<int, 4> eps_from_mask(int mask) {
  std::array<int, 4> e{};
  for (int k = 0; k < 4; ++k) e[static_cast<std::size_t>(k)] = (mask >> k) & 1 ? -1 : 1;
  return e;
}

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Central-difference Jacobian shared by the solver functors.
template <typename F>
void numeric_jacobian(F&& f, const Vec& x, Mat& J, int m) {
  J.resize(m, x.size());
  Vec xp = x, fp(m), fm(m);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = 1e-7 * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + h;
    f(xp, fp);
    xp[j] = x[j] - h;
    f(xp, fm);
    xp[j] = x[j];
    J.col(j) = (fp - fm) / (2 * h);
  }
}

SearchParameters to_params(const Vec& v) {
  std::array<double, 9> a{};
  for (int i = 0; i < 9; ++i) a[static_cast<std::size_t>(i)] = v[i];
  return SearchParameters::from_array(a);
}

Vec to_vec(const SearchParameters& p) {
  const auto a = p.to_array();
  Vec v(9);
  for (int i = 0; i < 9; ++i) v[i] = a[static_cast<std::size_t>(i)];
  return v;
}

struct SystemFunctor : Eigen::DenseFunctor<double> {
  const SearchConfig* cfg;
  explicit SystemFunctor(const SearchConfig& c) : Eigen::DenseFunctor<double>(9, 9), cfg(&c) {}

  int operator()(const Vec& x, Vec& f) const {
    const auto r = residual_system(to_params(x), *cfg);
    f.resize(9);
    for (int i = 0; i < 9; ++i) f[i] = r[static_cast<std::size_t>(i)];
    return 0;
  }
  int df(const Vec& x, Mat& J) const {
    numeric_jacobian([this](const Vec& a, Vec& b) { (*this)(a, b); }, x, J, 9);
    return 0;
  }
};

// Relations (weighted) plus flat angles alpha, beta, gamma against a target net.
struct SnapFunctor : Eigen::DenseFunctor<double> {
  const SearchConfig* cfg;
  NetAngles target;
  std::array<int, 4> eps;
  SnapFunctor(const SearchConfig& c, const NetAngles& t, const std::array<int, 4>& e)
      : Eigen::DenseFunctor<double>(9, 20), cfg(&c), target(t), eps(e) {}

  int operator()(const Vec& x, Vec& f) const {
    f.resize(20);
    const SearchParameters p = to_params(x);
    const auto r = residual_system(p, *cfg);
    for (int i = 0; i < 8; ++i) f[i] = kPenaltyScale * r[static_cast<std::size_t>(i)];
    NetAngles net;
    bool ok = true;
    try {
      net = recover_flat_angles(p, eps);
    } catch (const Error&) {
      ok = false;
    }
    for (int i = 0; i < 4; ++i) {
      f[8 + 3 * i] = ok ? net[i].alpha - target[i].alpha : 10.0;
      f[9 + 3 * i] = ok ? net[i].beta - target[i].beta : 10.0;
      f[10 + 3 * i] = ok ? net[i].gamma - target[i].gamma : 10.0;
    }
    return 0;
  }
  int df(const Vec& x, Mat& J) const {
    numeric_jacobian([this](const Vec& a, Vec& b) { (*this)(a, b); }, x, J, 20);
    return 0;
  }
};

template <typename Functor>
Vec run_lm(Functor& fn, Vec x, int maxIter, const std::function<bool(const Vec&)>& done) {
  Eigen::LevenbergMarquardt<Functor> lm(fn);
  lm.setFtol(0.0);
  lm.setXtol(0.0);
  lm.setGtol(0.0);
  lm.setMaxfev(100 * (maxIter + 1));
  if (done(x)) return x;
  if (lm.minimizeInit(x) == Eigen::LevenbergMarquardtSpace::ImproperInputParameters) return x;
  for (int it = 0; it < maxIter; ++it) {
    const auto status = lm.minimizeOneStep(x);
    if (done(x)) break;
    if (status != Eigen::LevenbergMarquardtSpace::Running) break;
  }
  return x;
}

double max_abs(const std::array<double, 9>& r) {
  double m = 0.0;
  for (double v : r) m = std::max(m, std::isfinite(v) ? std::abs(v) : std::numeric_limits<double>::infinity());
  return m;
}

}  // namespace

void SearchConfig::validate() const {
  double sum = 0.0;
  for (double d : deltas) {
    if (!(d > 0.0 && d < pi)) throw Error(ErrorCode::Domain, "every delta must lie in (0, 180) deg");
    sum += d;
  }
  if (std::abs(sum - 2 * pi) > 1e-12) {
    std::ostringstream os;
    os << "deltas sum to " << to_deg(sum) << " deg, not 360";
    throw Error(ErrorCode::Domain, os.str());
  }
  for (double t : thetas) {
    if (!(t > 0.0 && t < pi)) throw Error(ErrorCode::Domain, "every theta must lie in (0, 180) deg");
  }
  if (seedCount < 0 || solverMaxIter < 1) throw Error(ErrorCode::Domain, "invalid seed or iteration count");
}

std::array<double, 9> residual_system(const SearchParameters& p, const SearchConfig& cfg) {
  std::array<double, 9> out{};
  const double pen = guard_penalty(p, cfg.guardMargin);
  if (pen > 0.0) {
    for (int i = 0; i < 8; ++i) out[static_cast<std::size_t>(i)] = pen;
    return out;
  }
  const DihedralState s = cfg_state(cfg);
  const BricardCoefficients bc = bricard_coefficients(s);
  for (int i = 0; i < 4; ++i) {
    const VertexTerms v = vertex_terms(p, bc, i);
    const double cd = std::cos(cfg.deltas[static_cast<std::size_t>(i)]);
    const double st = std::sin(s[i]) * std::sin(s[(i + 3) % 4]);
    out[static_cast<std::size_t>(i)] = cd * cd - v.numD * v.numD / (4 * v.X);
    out[static_cast<std::size_t>(4 + i)] = st * st - v.numT * v.numT / (4 * v.X);
  }
  return out;
}

std::array<double, 8> unsquared_residuals(const SearchParameters& p, const std::array<int, 4>& eps,
                                          const SearchConfig& cfg) {
  std::array<double, 8> out{};
  const DihedralState s = cfg_state(cfg);
  const BricardCoefficients bc = bricard_coefficients(s);
  for (int i = 0; i < 4; ++i) {
    const VertexTerms v = vertex_terms(p, bc, i);
    if (!(v.X > 0.0)) {
      throw Error(ErrorCode::Inadmissible, "non-positive radicand at A" + std::to_string(i + 1));
    }
    const double e = eps[static_cast<std::size_t>(i)] < 0 ? -1.0 : 1.0;
    const double den = 2 * std::sqrt(v.X);
    out[static_cast<std::size_t>(i)] = std::cos(cfg.deltas[static_cast<std::size_t>(i)]) - e * v.numD / den;
    out[static_cast<std::size_t>(4 + i)] = std::sin(s[i]) * std::sin(s[(i + 3) % 4]) - e * v.numT / den;
  }
  return out;
}

SearchParameters parameters_from_net(const NetAngles& net) {
  std::array<DerivedVertexQuantities, 4> q;
  for (int i = 0; i < 4; ++i) q[static_cast<std::size_t>(i)] = derive(net[i]);
  SearchParameters p;
  p.u = q[0].u;
  p.x1 = q[0].x;
  p.x3 = q[2].x;
  p.y1 = q[0].y;
  p.y2 = q[1].y;
  for (int i = 0; i < 4; ++i) p.z[static_cast<std::size_t>(i)] = q[static_cast<std::size_t>(i)].z;
  return p;
}

bool parameters_admissible(const SearchParameters& p) {
  const double M = 1.0 - p.u;
  if (!(M > 0.0)) return false;
  for (int i = 0; i < 4; ++i) {
    const double r = 1 + 1 / p.x(i), s = 1 + 1 / p.y(i), f = 1 + 1 / p.z[static_cast<std::size_t>(i)];
    if (!(r > 0 && s > 0 && f > 0)) return false;
    if (!((r - 1) * (r - M) > 0 && (s - 1) * (s - M) > 0 && (f - 1) * (f - M) > 0)) return false;
    if (!((r - 1) * (s - 1) * (f - 1) * (1 - M) > 0)) return false;
  }
  return true;
}

SeedSampler::SeedSampler(const SearchConfig& cfg) : bounds_(cfg.bounds), rng_(cfg.rngSeed) {}

double SeedSampler::draw_free(double u) {
  std::uniform_real_distribution<double> dist(-bounds_.absMax, bounds_.absMax);
  const double ex = bounds_.exclusion;
  for (;;) {
    const double w = dist(rng_);
    if (std::abs(w) < ex || std::abs(1 + w) < ex || std::abs(1 + u * w) < ex) continue;
    return w;
  }
}

SearchParameters SeedSampler::next() {
  std::uniform_real_distribution<double> udist(bounds_.uMin, 1.0);
  for (;;) {
    ++attempts_;
    SearchParameters p;
    do {
      p.u = udist(rng_);
    } while (std::abs(p.u) < bounds_.exclusion || 1.0 - p.u < bounds_.exclusion);
    p.x1 = draw_free(p.u);
    p.x3 = draw_free(p.u);
    p.y1 = draw_free(p.u);
    p.y2 = draw_free(p.u);
    for (double& z : p.z) z = draw_free(p.u);
    if (parameters_admissible(p)) {
      ++accepted_;
      return p;
    }
  }
}

std::optional<SearchParameters> solve_from_seed(const SearchParameters& seed, const SearchConfig& cfg) {
  SystemFunctor fn(cfg);
  const double tol = cfg.tolerances.converge;
  auto done = [&](const Vec& x) { return max_abs(residual_system(to_params(x), cfg)) <= tol; };
  const Vec x = run_lm(fn, to_vec(seed), cfg.solverMaxIter, done);
  if (!x.allFinite() || !done(x)) return std::nullopt;
  return to_params(x);
}

std::optional<VerifiedSolution> verify_candidate(const SearchParameters& p, const SearchConfig& cfg,
                                                 SearchStats& stats) {
  const ToleranceLadder& tol = cfg.tolerances;
  // Sign resolution over all 16 assignments.
  int passing = 0, passMask = -1;
  bool otherClose = false;
  double best = std::numeric_limits<double>::infinity();
  try {
    for (int mask = 0; mask < 16; ++mask) {
      double m = 0.0;
      for (double r : unsquared_residuals(p, eps_from_mask(mask), cfg)) m = std::max(m, std::abs(r));
      if (m <= tol.validate) {
        ++passing;
        passMask = mask;
        best = m;
      } else if (m < tol.signReject) {
        otherClose = true;
      }
    }
  } catch (const Error&) {
    ++stats.nonReal;
    return std::nullopt;
  }
  if (passing == 0) {
    ++stats.signInconsistent;
    return std::nullopt;
  }
  if (passing > 1 || otherClose) {
    ++stats.ambiguousSigns;
    return std::nullopt;
  }
  VerifiedSolution sol;
  sol.params = p;
  sol.epsilons = eps_from_mask(passMask);
  sol.residualMax = best;
  try {
    sol.net = recover_flat_angles(p, sol.epsilons);
  } catch (const Error&) {
    ++stats.nonReal;
    return std::nullopt;
  }
  for (int i = 0; i < 4; ++i) {
    if (!is_elliptic(sol.net[i])) {
      ++stats.nonElliptic;
      return std::nullopt;
    }
    if (derive(sol.net[i]).epsilon != sol.epsilons[static_cast<std::size_t>(i)]) {
      ++stats.ambiguousSigns;
      return std::nullopt;
    }
  }
  const DihedralState s = cfg_state(cfg);
  if (max_coupling_residual(sol.net, s) > tol.validate) {
    ++stats.residualRejected;
    return std::nullopt;
  }
  try {
    sol.report = classify(sol.net, tol.validate);
  } catch (const Error&) {
    ++stats.nonElliptic;
    return std::nullopt;
  }
  if (!sol.report.verdict) {
    if (sol.report.moduliEqual && sol.report.amplitudesMatch) ++stats.periodRejected;
    else ++stats.classifyRejected;
    return std::nullopt;
  }
  ++stats.verified;
  return sol;
}

SearchResult run_search(const SearchConfig& cfg) {
  cfg.validate();
  SearchResult res;
  const auto n = static_cast<std::size_t>(cfg.seedCount);
  std::vector<SearchParameters> seeds;
  seeds.reserve(n);
  SeedSampler sampler(cfg);
  for (std::size_t i = 0; i < n; ++i) seeds.push_back(sampler.next());
  res.stats.seeds = n;
  res.stats.samplerAttempts = sampler.attempts();

  std::vector<std::optional<SearchParameters>> solved(n);
  unsigned nt = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  nt = std::max(1u, std::min<unsigned>(nt, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::atomic<std::size_t> cursor{0};
  auto work = [&] {
    for (std::size_t i; (i = cursor.fetch_add(1)) < n;) solved[i] = solve_from_seed(seeds[i], cfg);
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < nt; ++t) pool.emplace_back(work);
    work();
  }

  std::vector<std::pair<std::size_t, SearchParameters>> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (!solved[i]) continue;
    ++res.stats.converged;
    const SearchParameters& p = *solved[i];
    if (!(p.u < 1.0)) {
      ++res.stats.nonPhysical;
      continue;
    }
    const auto a = p.to_array();
    const bool dup = std::any_of(kept.begin(), kept.end(), [&](const auto& k) {
      const auto b = k.second.to_array();
      double d = 0.0;
      for (std::size_t j = 0; j < 9; ++j) d = std::max(d, std::abs(a[j] - b[j]));
      return d < cfg.dedupeRadius;
    });
    if (dup) {
      ++res.stats.duplicates;
      continue;
    }
    kept.emplace_back(i, p);
  }
  for (const auto& [idx, p] : kept) {
    if (auto sol = verify_candidate(p, cfg, res.stats)) {
      sol->seedIndex = idx;
      res.solutions.push_back(std::move(*sol));
    }
  }
  std::stable_sort(res.solutions.begin(), res.solutions.end(),
                   [](const VerifiedSolution& a, const VerifiedSolution& b) {
                     return a.residualMax < b.residualMax;
                   });
  return res;
}

std::optional<VerifiedSolution> snap_to_family(const NetAngles& approx, const SearchConfig& cfg) {
  std::array<int, 4> eps{};
  for (int i = 0; i < 4; ++i) eps[static_cast<std::size_t>(i)] = derive(approx[i]).epsilon;
  SnapFunctor fn(cfg, approx, eps);
  auto never = [](const Vec&) { return false; };
  const Vec fitted = run_lm(fn, to_vec(parameters_from_net(approx)), 10 * cfg.solverMaxIter, never);
  if (!fitted.allFinite()) return std::nullopt;
  const auto polished = solve_from_seed(to_params(fitted), cfg);
  if (!polished) return std::nullopt;
  SearchStats stats;
  return verify_candidate(*polished, cfg, stats);
}

}  // namespace kokonet
