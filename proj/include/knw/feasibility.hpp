#ifndef KNW_FEASIBILITY_HPP
#define KNW_FEASIBILITY_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "knw/kernel.hpp"

namespace knw {

struct BetaInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool exact = false;  // exact iff the bracket is also sufficient
  bool empty() const { return lo > hi; }
};

// Exact feasibility bracket for the covariance of a pair when one site is
// simulated conditional on the other alone. States sitting at a weight pmf's
// mean impose no constraint and are skipped.
BetaInterval beta_bounds_singleton(const Pmf& pi_s, const Pmf& tilde_s, const Pmf& pi_t,
                                   const Pmf& tilde_t);

// Necessary-only bracket when one site shares a single covariance value with
// all its neighbors: the intersection of the per-neighbor singleton brackets.
BetaInterval beta_bounds_shared(const Pmf& pi_s, const Pmf& tilde_s,
                                const std::vector<std::pair<Pmf, Pmf>>& neighbors);

enum class ValidationMode { exhaustive, spot };

struct PairBound {
  int s = -1;
  int t = -1;
  double beta = 0.0;
  BetaInterval interval;
  bool within = false;
};

struct RegularityIssue {
  int site = -1;
  SiteSet base;
  std::vector<int> base_states;
  int state = -1;
  double value = 0.0;
};

struct FeasibilityReport {
  bool pass = false;
  double max_excursion = 0.0;  // worst distance outside [0,1] over checked rows
  std::vector<PairBound> pair_bounds;
  std::vector<RegularityIssue> issues;
  std::size_t rows_checked = 0;
  std::size_t skipped_zero_marginals = 0;
};

// Checks every conditional row of the setup for membership in [0,1]
// (exhaustive mode enumerates all base configurations, guarded by
// kSamplerGuard; spot mode draws up to 64 per site from `seed`). The verdict
// comes from row excursions; the per-edge singleton brackets are reported for
// diagnosis and do not decide it.
FeasibilityReport validate_spec(const FieldSpec& spec, const ValidSetup& setup,
                                ValidationMode mode = ValidationMode::exhaustive,
                                std::uint64_t seed = 0);

}  // namespace knw

#endif  // KNW_FEASIBILITY_HPP
