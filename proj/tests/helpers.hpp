#ifndef KNW_TESTS_HELPERS_HPP
#define KNW_TESTS_HELPERS_HPP

#include <algorithm>
#include <map>
#include <utility>
#include <vector>

#include "knw/consistency.hpp"
#include "knw/feasibility.hpp"
#include "knw/graph.hpp"
#include "knw/kernel.hpp"
#include "knw/pmf.hpp"
#include "knw/rng.hpp"

namespace knwtest {

// 5-site benchmark graph used across the suites: a 5-cycle with two chords,
// non-chordal, and with one non-adjacent pair (0,3) that the natural-order
// setup never matches.
inline knw::SiteGraph bench_graph() {
  return knw::SiteGraph(5, {{0, 1}, {0, 3}, {1, 2}, {1, 4}, {2, 3}, {2, 4}, {3, 4}});
}

inline knw::Pmf coin(double p_high) {
  return knw::Pmf({-1.0, 1.0}, {1.0 - p_high, p_high});
}

inline knw::Pmf uniform_coin() { return knw::Pmf::uniform({-1.0, 1.0}); }

// Complete 4-site field over {-1,1}: uniform weights, marginal p at +1, mixing
// p_hat at +1, the same covariance on every pair.
inline knw::FieldSpec four_clique_field(double p, double p_hat, double beta) {
  knw::SiteGraph k4(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  std::map<std::pair<int, int>, double> b;
  for (const auto& e : k4.edges()) b[e] = beta;
  std::vector<knw::Pmf> pi(4, coin(p)), tilde(4, uniform_coin()), hat(4, coin(p_hat));
  return knw::make_general(std::move(k4), std::move(pi), std::move(tilde), std::move(hat), b);
}

inline knw::CliqueSpec four_clique(double p, double p_hat, double beta) {
  knw::CliqueSpec clique;
  clique.pi.assign(4, coin(p));
  clique.tilde.assign(4, uniform_coin());
  clique.hat.assign(4, coin(p_hat));
  clique.beta.assign(4, std::vector<double>(4, beta));
  for (int i = 0; i < 4; ++i) clique.beta[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0.0;
  return clique;
}

inline knw::Pmf random_pmf(knw::Rng& rng, const std::vector<double>& states) {
  std::vector<double> probs(states.size());
  double sum = 0.0;
  for (double& p : probs) sum += (p = 0.05 + rng.next_double());
  for (double& p : probs) p /= sum;
  return knw::Pmf(states, probs);
}

// Random general-variant field on the bench graph, shrunk until every
// conditional row of the natural setup lies in [0,1]. Covariances start well
// inside the per-pair brackets (both orientations) and halve on failure;
// beta == 0 always passes, so this terminates.
inline knw::FieldSpec random_feasible_bench_field(knw::Rng& rng, bool ternary,
                                                  double safety = 0.6) {
  const knw::SiteGraph graph = bench_graph();
  const std::vector<double> states =
      ternary ? std::vector<double>{-1.0, 0.0, 1.0} : std::vector<double>{-1.0, 1.0};
  std::vector<knw::Pmf> pi, tilde, hat;
  for (int s = 0; s < graph.n_sites(); ++s) {
    pi.push_back(random_pmf(rng, states));
    tilde.push_back(random_pmf(rng, states));
    hat.push_back(random_pmf(rng, states));
  }
  std::map<std::pair<int, int>, double> beta;
  for (const auto& [a, b] : graph.edges()) {
    const auto sa = static_cast<std::size_t>(a), sb = static_cast<std::size_t>(b);
    const knw::BetaInterval fwd = knw::beta_bounds_singleton(pi[sb], tilde[sb], pi[sa], tilde[sa]);
    const knw::BetaInterval rev = knw::beta_bounds_singleton(pi[sa], tilde[sa], pi[sb], tilde[sb]);
    const double lo = std::max(fwd.lo, rev.lo), hi = std::min(fwd.hi, rev.hi);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo) * safety;
    beta[{a, b}] = mid + (2.0 * rng.next_double() - 1.0) * half;
  }

  const knw::ValidSetup setup = knw::build_valid_setup(graph, graph.all_sites());
  for (int attempt = 0; attempt < 64; ++attempt) {
    knw::FieldSpec spec = knw::make_general(graph, pi, tilde, hat, beta);
    if (knw::validate_spec(spec, setup).pass) return spec;
    for (auto& [key, value] : beta) value *= 0.5;
  }
  std::map<std::pair<int, int>, double> zero;
  for (const auto& e : graph.edges()) zero[e] = 0.0;
  return knw::make_general(graph, pi, tilde, hat, zero);
}

}  // namespace knwtest

#endif  // KNW_TESTS_HELPERS_HPP
