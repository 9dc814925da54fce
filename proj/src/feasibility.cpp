#include "knw/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "knw/errors.hpp"
#include "knw/rng.hpp"
#include "knw/sampler.hpp"

namespace knw {

BetaInterval beta_bounds_singleton(const Pmf& pi_s, const Pmf& tilde_s, const Pmf& pi_t,
                                   const Pmf& tilde_t) {
  const Moments ms = tilde_s.cached_moments();
  const Moments mt = tilde_t.cached_moments();
  if (ms.variance <= 0.0 || mt.variance <= 0.0)
    throw DegenerateTilde("weight pmf with zero variance has no usable bracket");

  BetaInterval interval;
  interval.lo = -std::numeric_limits<double>::infinity();
  interval.hi = std::numeric_limits<double>::infinity();
  interval.exact = true;
  for (std::size_t i = 0; i < pi_s.size(); ++i) {
    const double dev_s = pi_s.state(i) - ms.mean;
    const double w_s = tilde_s.prob(i);
    if (dev_s == 0.0 || w_s == 0.0) continue;
    for (std::size_t j = 0; j < pi_t.size(); ++j) {
      const double dev_t = pi_t.state(j) - mt.mean;
      const double w_t = tilde_t.prob(j);
      if (dev_t == 0.0 || w_t == 0.0) continue;
      const double denom = w_s * w_t * dev_s * dev_t;
      const double scale = ms.variance * mt.variance / denom;
      const double a = -scale * pi_s.prob(i) * pi_t.prob(j);
      const double b = scale * (1.0 - pi_s.prob(i)) * pi_t.prob(j);
      interval.lo = std::max(interval.lo, std::min(a, b));
      interval.hi = std::min(interval.hi, std::max(a, b));
    }
  }
  return interval;
}

BetaInterval beta_bounds_shared(const Pmf& pi_s, const Pmf& tilde_s,
                                const std::vector<std::pair<Pmf, Pmf>>& neighbors) {
  BetaInterval interval;
  interval.lo = -std::numeric_limits<double>::infinity();
  interval.hi = std::numeric_limits<double>::infinity();
  interval.exact = false;
  for (const auto& [pi_t, tilde_t] : neighbors) {
    const BetaInterval one = beta_bounds_singleton(pi_s, tilde_s, pi_t, tilde_t);
    interval.lo = std::max(interval.lo, one.lo);
    interval.hi = std::min(interval.hi, one.hi);
  }
  return interval;
}

namespace {

constexpr std::size_t kMaxRecordedIssues = 64;
constexpr int kSpotDrawsPerSite = 64;

void check_row(const FieldSpec& spec, int site, const SiteSet& base,
               const Configuration& config, MarginalCache& cache, FeasibilityReport& report) {
  const double m = base.empty() ? 1.0 : cache.base_marginal(spec, base, config);
  if (!base.empty() && m == 0.0) {
    ++report.skipped_zero_marginals;
    return;
  }
  const std::vector<double> probs = conditional_row_raw(spec, site, base, config, m);
  ++report.rows_checked;
  for (std::size_t u = 0; u < probs.size(); ++u) {
    const double p = probs[u];
    const double excursion = std::max({0.0 - p, p - 1.0, 0.0});
    report.max_excursion = std::max(report.max_excursion, excursion);
    if (excursion > kRegularityTol) {
      if (report.issues.size() < kMaxRecordedIssues) {
        RegularityIssue issue;
        issue.site = site;
        issue.base = base;
        for (int t : base) issue.base_states.push_back(config[static_cast<std::size_t>(t)]);
        issue.state = static_cast<int>(u);
        issue.value = p;
        report.issues.push_back(std::move(issue));
      }
      report.pass = false;
    }
  }
}

}  // namespace

FeasibilityReport validate_spec(const FieldSpec& spec, const ValidSetup& setup,
                                ValidationMode mode, std::uint64_t seed) {
  FeasibilityReport report;
  report.pass = true;

  std::vector<int> order_pos(static_cast<std::size_t>(spec.n_sites()), -1);
  for (std::size_t i = 0; i < setup.order.size(); ++i)
    order_pos[static_cast<std::size_t>(setup.order[i])] = static_cast<int>(i);
  for (const auto& [a, b] : setup.cov_pairs) {
    // Orient the bracket as (later site | earlier site) under the setup order;
    // known sites count as earliest.
    int later = a, earlier = b;
    if (order_pos[static_cast<std::size_t>(a)] < order_pos[static_cast<std::size_t>(b)])
      std::swap(later, earlier);
    PairBound bound;
    bound.s = later;
    bound.t = earlier;
    bound.beta = spec.beta_at(a, b);
    bound.interval = beta_bounds_singleton(
        spec.pi[static_cast<std::size_t>(later)], spec.tilde[static_cast<std::size_t>(later)],
        spec.pi[static_cast<std::size_t>(earlier)], spec.tilde[static_cast<std::size_t>(earlier)]);
    bound.within = bound.beta >= bound.interval.lo && bound.beta <= bound.interval.hi;
    report.pair_bounds.push_back(bound);
  }

  MarginalCache cache(MarginalCache::Mode::component_base);
  Configuration config(static_cast<std::size_t>(spec.n_sites()), -1);
  Rng rng(seed, 0);
  for (std::size_t i = 0; i < setup.order.size(); ++i) {
    const int s = setup.order[i];
    const SiteSet& base = setup.base_sets[i];
    if (base.empty()) {
      ++report.rows_checked;  // the row equals pi and cannot leave [0,1]
      continue;
    }
    std::vector<std::size_t> dims;
    std::size_t combos = 1;
    for (int t : base) {
      const std::size_t d = spec.pi[static_cast<std::size_t>(t)].size();
      dims.push_back(d);
      if (combos > kSamplerGuard / d)
        throw ExplosionGuard("base enumeration exceeds the size guard");
      combos *= d;
    }

    if (mode == ValidationMode::exhaustive) {
      std::vector<int> digits(base.size(), 0);
      for (std::size_t c = 0; c < combos; ++c) {
        for (std::size_t k = 0; k < base.size(); ++k)
          config[static_cast<std::size_t>(base[k])] = digits[k];
        check_row(spec, s, base, config, cache, report);
        for (std::size_t k = 0; k < digits.size(); ++k) {
          if (++digits[k] < static_cast<int>(dims[k])) break;
          digits[k] = 0;
        }
      }
    } else {
      for (int draw = 0; draw < kSpotDrawsPerSite; ++draw) {
        for (std::size_t k = 0; k < base.size(); ++k)
          config[static_cast<std::size_t>(base[k])] =
              static_cast<int>(rng.next_below(static_cast<std::uint64_t>(dims[k])));
        check_row(spec, s, base, config, cache, report);
      }
    }
    for (int t : base) config[static_cast<std::size_t>(t)] = -1;
  }
  return report;
}

}  // namespace knw
