#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "kokonet/angles.hpp"
#include "kokonet/classify.hpp"
#include "kokonet/kinematics.hpp"

namespace kokonet {

struct ToleranceLadder {
  double converge = 1e-11;   // max |residual_system| accepted from the solver
  double validate = 1e-9;    // unsquared relations, coupling closure, classification
  double signReject = 1e-6;  // every other sign assignment must fail by at least this
};

// Seeding box: u in (uMin, 1), |x|, |y|, |z| <= absMax, staying exclusion away from
// the excluded values 0, -1 and u w = -1.
struct SeedBounds {
  double uMin = -10.0;
  double absMax = 50.0;
  double exclusion = 1e-3;
};

struct SearchConfig {
  std::array<double, 4> deltas{};
  std::array<double, 4> thetas{};
  int seedCount = 20000;
  std::uint64_t rngSeed = 1;
  int solverMaxIter = 200;
  double dedupeRadius = 1e-6;
  double guardMargin = 1e-6;
  int threads = 0;  // 0: hardware concurrency
  ToleranceLadder tolerances;
  SeedBounds bounds;

  // Throws Domain unless the deltas sum to 2 pi (1e-12) and all angles lie in (0, pi).
  void validate() const;
};

// Squared cos(delta) relations (0..3), squared sin-product relations (4..7), dummy 0 (8).
// Near a guard the first eight entries carry a penalty instead.
std::array<double, 9> residual_system(const SearchParameters& p, const SearchConfig& cfg);

// Same relations before squaring, for the given signs. Throws Inadmissible on a
// non-positive radicand.
std::array<double, 8> unsquared_residuals(const SearchParameters& p, const std::array<int, 4>& eps,
                                          const SearchConfig& cfg);

// Parameters of a net read off its derived quantities (u from vertex 1).
SearchParameters parameters_from_net(const NetAngles& net);

// Sign conditions a realizable vertex imposes on (u, x, y, z).
bool parameters_admissible(const SearchParameters& p);

class SeedSampler {
 public:
  explicit SeedSampler(const SearchConfig& cfg);

  SearchParameters next();
  std::uint64_t attempts() const { return attempts_; }
  std::uint64_t accepted() const { return accepted_; }

 private:
  double draw_free(double u);

  SeedBounds bounds_;
  std::mt19937_64 rng_;
  std::uint64_t attempts_ = 0;
  std::uint64_t accepted_ = 0;
};

std::optional<SearchParameters> solve_from_seed(const SearchParameters& seed, const SearchConfig& cfg);

struct VerifiedSolution {
  SearchParameters params;
  std::array<int, 4> epsilons{};
  NetAngles net;
  ClassificationReport report;
  double residualMax = 0.0;
  std::size_t seedIndex = 0;
};

struct SearchStats {
  std::size_t seeds = 0;
  std::uint64_t samplerAttempts = 0;
  std::size_t converged = 0;
  std::size_t nonPhysical = 0;
  std::size_t duplicates = 0;
  std::size_t signInconsistent = 0;  // no sign assignment satisfies the unsquared relations
  std::size_t ambiguousSigns = 0;
  std::size_t residualRejected = 0;  // coupling closure fails
  std::size_t nonReal = 0;
  std::size_t nonElliptic = 0;
  std::size_t periodRejected = 0;
  std::size_t classifyRejected = 0;
  std::size_t verified = 0;
};

struct SearchResult {
  std::vector<VerifiedSolution> solutions;
  SearchStats stats;
};

// Full validation of one converged parameter vector; rejections are counted in stats.
std::optional<VerifiedSolution> verify_candidate(const SearchParameters& p, const SearchConfig& cfg,
                                                 SearchStats& stats);

SearchResult run_search(const SearchConfig& cfg);

// Nearest verified point of the solution family to a net given with truncated angles:
// fits the parameters to the flat angles under the relations, then polishes and verifies.
std::optional<VerifiedSolution> snap_to_family(const NetAngles& approx, const SearchConfig& cfg);

}  // namespace kokonet
