#include <doctest.h>

#include <random>

#include "kokonet/error.hpp"
#include "kokonet/search.hpp"
#include "reference.hpp"

using namespace kokonet;

namespace {

SearchConfig config_for(const ref::TabulatedNet& p) {
  SearchConfig c;
  for (std::size_t i = 0; i < 4; ++i) {
    c.deltas[i] = deg(p.deltasDeg[i]);
    c.thetas[i] = deg(p.thetasDeg[i]);
  }
  return c;
}

// Rational-modulus net at a state of its upper branch, in (0, pi).
SearchConfig rational_config() {
  SearchConfig c;
  const NetAngles n = ref::rational_modulus_net();
  const DihedralState s = ref::rational_modulus_flexion(0.7, -1);
  for (int i = 0; i < 4; ++i) {
    c.deltas[static_cast<std::size_t>(i)] = n[i].delta;
    c.thetas[static_cast<std::size_t>(i)] = s[i];
  }
  return c;
}

double max_abs(const auto& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("config validation") {
  SearchConfig c = rational_config();
  CHECK_NOTHROW(c.validate());
  SearchConfig bad = c;
  bad.deltas[0] += 1e-6;
  CHECK_THROWS_AS(bad.validate(), Error);
  SearchConfig bad2 = c;
  bad2.thetas[2] = 0.0;
  CHECK_THROWS_AS(bad2.validate(), Error);
}

TEST_CASE("residual system vanishes at the rational-modulus parameters") {
  const SearchConfig cfg = rational_config();
  const SearchParameters p = parameters_from_net(ref::rational_modulus_net());
  CHECK(parameters_admissible(p));
  const auto r = residual_system(p, cfg);
  CHECK(max_abs(r) <= 1e-12);
  CHECK(r[8] == 0.0);
  std::array<int, 4> eps{};
  for (int i = 0; i < 4; ++i) eps[static_cast<std::size_t>(i)] = derive(ref::rational_modulus_net()[i]).epsilon;
  CHECK(max_abs(unsquared_residuals(p, eps, cfg)) <= 1e-12);
  // a seed at the exact parameters is a fixed point
  const auto solved = solve_from_seed(p, cfg);
  REQUIRE(solved.has_value());
  const auto a = solved->to_array(), b = p.to_array();
  for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10);
}

TEST_CASE("guards give finite penalties, not errors") {
  const SearchConfig cfg = rational_config();
  SearchParameters zero;
  const auto r = residual_system(zero, cfg);
  for (double v : r) CHECK(std::isfinite(v));
  CHECK(max_abs(r) > 1.0);
  SearchParameters edge = parameters_from_net(ref::rational_modulus_net());
  edge.x1 = -1.0;
  CHECK_NOTHROW(residual_system(edge, cfg));
  const auto s = solve_from_seed(edge, cfg);
  if (s) CHECK(parameters_admissible(*s));
}

TEST_CASE("parameter array round trip") {
  SearchParameters p;
  p.u = 0.3;
  p.x1 = 1;
  p.x3 = 2;
  p.y1 = 3;
  p.y2 = 4;
  p.z = {5, 6, 7, 8};
  const auto q = SearchParameters::from_array(p.to_array());
  CHECK(q.to_array() == p.to_array());
  CHECK(p.x(1) == 1);
  CHECK(p.x(3) == 2);
  CHECK(p.y(3) == 3);
  CHECK(p.y(2) == 4);
}

TEST_CASE("seed sampler: guards, determinism, acceptance") {
  const SearchConfig cfg = config_for(ref::numerical_net_a());
  SeedSampler a(cfg), b(cfg);
  for (int i = 0; i < 10000; ++i) {
    const SearchParameters p = a.next();
    const SearchParameters q = b.next();
    CHECK(p.to_array() == q.to_array());
    REQUIRE(parameters_admissible(p));
    CHECK(p.u < 1.0);
    CHECK(p.u > cfg.bounds.uMin);
    CHECK(p.u != 0.0);
    for (double v : {p.x1, p.x3, p.y1, p.y2, p.z[0], p.z[1], p.z[2], p.z[3]}) {
      CHECK(std::abs(v) <= cfg.bounds.absMax);
      CHECK(std::abs(v) >= cfg.bounds.exclusion);
      CHECK(std::abs(v + 1.0) >= cfg.bounds.exclusion);
    }
    for (double z : p.z) CHECK(std::abs(p.u * z + 1.0) >= cfg.bounds.exclusion);
  }
  CHECK(a.accepted() == 10000);
  CHECK(a.attempts() >= a.accepted());
  CHECK(a.attempts() == b.attempts());
  SearchConfig other = cfg;
  other.rngSeed = 2;
  SeedSampler c(other);
  CHECK(c.next().to_array() != SeedSampler(cfg).next().to_array());
}

TEST_CASE("snapping a truncated tabulated net onto the solution family") {
  for (const auto& pub : {ref::numerical_net_a(), ref::numerical_net_b()}) {
    const SearchConfig cfg = config_for(pub);
    const auto s = snap_to_family(pub.net, cfg);
    REQUIRE(s.has_value());
    CHECK(s->report.verdict);
    CHECK(std::abs(s->report.M - pub.M) < 1e-2);
    CHECK(s->residualMax <= cfg.tolerances.validate);
    double worst = 0.0;
    for (int i = 0; i < 4; ++i) {
      worst = std::max({worst, std::abs(s->net[i].alpha - pub.net[i].alpha), std::abs(s->net[i].beta - pub.net[i].beta),
                        std::abs(s->net[i].gamma - pub.net[i].gamma)});
      CHECK(std::abs(s->net[i].delta - pub.net[i].delta) < 1e-12);
    }
    CHECK(to_deg(worst) < 0.05);
    // the residual system vanishes there and nearby seeds fall back to it
    CHECK(max_abs(residual_system(s->params, cfg)) <= 1e-10);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> P(-1e-2, 1e-2);
    int back = 0;
    for (int k = 0; k < 10; ++k) {
      auto a = s->params.to_array();
      for (double& v : a) v += P(rng) * std::max(1.0, std::abs(v));
      const auto r = solve_from_seed(SearchParameters::from_array(a), cfg);
      if (r && max_abs(residual_system(*r, cfg)) <= cfg.tolerances.converge) ++back;
    }
    CHECK(back >= 5);
  }
}

TEST_CASE("search pipeline: invariants, determinism across thread counts") {
  SearchConfig cfg = config_for(ref::numerical_net_b());
  cfg.seedCount = 3000;
  cfg.rngSeed = 5;
  cfg.threads = 1;
  const SearchResult a = run_search(cfg);
  cfg.threads = 3;
  const SearchResult b = run_search(cfg);
  REQUIRE(a.solutions.size() == b.solutions.size());
  for (std::size_t i = 0; i < a.solutions.size(); ++i) {
    CHECK(a.solutions[i].params.to_array() == b.solutions[i].params.to_array());
    CHECK(a.solutions[i].seedIndex == b.solutions[i].seedIndex);
  }
  CHECK(a.stats.seeds == 3000);
  CHECK(a.stats.converged == b.stats.converged);
  CHECK(a.stats.verified == a.solutions.size());
  CHECK(a.stats.converged >= a.stats.verified);

  for (std::size_t i = 0; i < a.solutions.size(); ++i) {
    const auto& s = a.solutions[i];
    CHECK(s.report.verdict);
    CHECK(s.params.u < 1.0);
    CHECK(s.residualMax <= 1e-9);
    CHECK(max_abs(unsquared_residuals(s.params, s.epsilons, cfg)) <= 1e-9);
    CHECK(s.report.periodResidual <= 1e-9);
    for (int v = 0; v < 4; ++v) {
      CHECK(is_elliptic(s.net[v]));
      CHECK(std::abs(derive(s.net[v]).M - s.report.M) <= 1e-9);
    }
    CHECK(std::abs(derive(s.net[0]).r - derive(s.net[1]).r) <= 1e-9);
    CHECK(std::abs(derive(s.net[2]).r - derive(s.net[3]).r) <= 1e-9);
    CHECK(std::abs(derive(s.net[0]).s - derive(s.net[3]).s) <= 1e-9);
    CHECK(std::abs(derive(s.net[1]).s - derive(s.net[2]).s) <= 1e-9);
    if (i > 0) CHECK(a.solutions[i - 1].residualMax <= s.residualMax);
    for (std::size_t j = 0; j < i; ++j) {
      const auto x = s.params.to_array(), y = a.solutions[j].params.to_array();
      double d = 0.0;
      for (std::size_t k = 0; k < 9; ++k) d = std::max(d, std::abs(x[k] - y[k]));
      CHECK(d >= cfg.dedupeRadius);
    }
  }
}

TEST_CASE("adversarial targets terminate cleanly") {
  SearchConfig cfg;
  cfg.deltas = {pi / 2, pi / 2, pi / 2, pi / 2};
  cfg.thetas = {deg(1), deg(1), deg(1), deg(1)};
  cfg.seedCount = 300;
  const SearchResult r = run_search(cfg);
  CHECK(r.stats.seeds == 300);
  CHECK(r.solutions.size() == r.stats.verified);
}
