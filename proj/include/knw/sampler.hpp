#ifndef KNW_SAMPLER_HPP
#define KNW_SAMPLER_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "knw/kernel.hpp"
#include "knw/rng.hpp"

namespace knw {

// State indices per site; -1 marks unassigned entries.
using Configuration = std::vector<int>;

inline constexpr std::size_t kSamplerGuard = std::size_t{1} << 24;

// Memoized base-set marginals, keyed by (sites, their state indices). The two
// modes answer with different laws and must not share a cache:
//   component_base     — the base set is replayed as its own field, each inner
//                        site attaching one connected component of its earlier
//                        neighbors (the same rule the setup builder uses);
//   full_neighborhood  — inner sites attach all earlier neighbors, the rule the
//                        Markov-mode sampler uses.
class MarginalCache {
 public:
  enum class Mode { component_base, full_neighborhood };

  explicit MarginalCache(Mode mode = Mode::component_base,
                         ComponentPolicy policy = ComponentPolicy::prefer_recent)
      : mode_(mode), policy_(policy) {}

  double base_marginal(const FieldSpec& spec, const SiteSet& base, const Configuration& config);

  Mode mode() const { return mode_; }
  std::size_t entries() const { return values_.size(); }

 private:
  struct Plan {
    std::vector<int> order;
    std::vector<SiteSet> bases;
  };
  const Plan& plan_for(const FieldSpec& spec, const SiteSet& base);

  Mode mode_;
  ComponentPolicy policy_;
  std::map<SiteSet, Plan> plans_;
  std::map<std::pair<SiteSet, std::vector<int>>, double> values_;
};

// Marginal of the base set at `position` by summing the product of the first
// rows of the setup over unassigned sites. Only defined when the base lies
// inside the ordered prefix (no known sites). Table size is capped by
// kSamplerGuard.
double base_marginal_multiplication(const FieldSpec& spec, const ValidSetup& setup,
                                    std::size_t position, const Configuration& config);

// Recursive-route marginal: the cache's mode decides the inner base rule.
double base_marginal_recursive(const FieldSpec& spec, const SiteSet& base,
                               const Configuration& config, MarginalCache& cache);

struct SampleRun {
  std::uint64_t seed = 0;
  std::vector<Configuration> replicates;
};

// One-pass sequential sampling along the setup order; replicate r draws from
// stream r of the seed, so results do not depend on the thread count. Requires
// a setup without known sites (use inpaint otherwise).
SampleRun sample_one_pass(const FieldSpec& spec, const ValidSetup& setup, std::uint64_t seed,
                          int replicates, int threads = 1);

// Samples the unknown region conditioned on `known_config` values at the
// setup's known sites. Base-set marginals still come from the unconditional
// replayed law evaluated at the known states — a pragmatic reading for known
// regions; tests document the resulting behavior.
Configuration inpaint(const FieldSpec& spec, const ValidSetup& setup,
                      const Configuration& known_config, std::uint64_t seed);

// Markov-mode sampling: any site order, base set = all earlier neighbors,
// marginals exclusively via the full_neighborhood recursion. Requires
// hat == pi termwise. The sampled law is order-invariant and Markov w.r.t. the
// graph when the nonzero covariances span a single clique; for general
// supports different orders genuinely yield different laws (the unit tests
// measure a witness).
Configuration sample_markov(const FieldSpec& spec, std::uint64_t seed);
Configuration sample_markov(const FieldSpec& spec, const std::vector<int>& order,
                            std::uint64_t seed);
// Replicate-level control for callers managing their own streams and cache.
Configuration sample_markov(const FieldSpec& spec, const std::vector<int>& order, Rng& rng,
                            MarginalCache& cache);

// Base sets the Markov mode pairs with `order`: all earlier neighbors.
std::vector<SiteSet> markov_base_sets(const SiteGraph& graph, const std::vector<int>& order);

}  // namespace knw

#endif  // KNW_SAMPLER_HPP
