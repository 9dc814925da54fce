#ifndef KNW_ORACLE_HPP
#define KNW_ORACLE_HPP

#include <cstddef>
#include <vector>

#include "knw/kernel.hpp"
#include "knw/sampler.hpp"

namespace knw {

inline constexpr std::size_t kOracleGuard = std::size_t{1} << 20;

// Dense joint law over a set of sites. Axes are ascending site ids; entry
// codes are mixed-radix with the first axis fastest.
struct JointTable {
  std::vector<int> sites;
  std::vector<int> dims;
  std::vector<std::vector<double>> states;  // per axis, aligned with dims
  std::vector<double> p;

  std::size_t size() const { return p.size(); }
  std::size_t code(const std::vector<int>& digits) const;
  std::vector<int> digits(std::size_t code) const;
  int axis_of(int site) const;  // -1 when absent
  double total() const;
};

// Exact law of the one-pass construction for the given setup. A setup with
// known sites needs their states in `known_config`. Capped by kOracleGuard.
JointTable enumerate_joint(const FieldSpec& spec, const ValidSetup& setup,
                           const Configuration& known_config = {});

// Exact law of the Markov-mode construction for the given site order.
JointTable enumerate_markov(const FieldSpec& spec, const std::vector<int>& order);

// Sum out every axis not in `keep` (keep must be a subset of table.sites).
JointTable marginal_of(const JointTable& table, const SiteSet& keep);

// Per-state marginal probabilities of one site.
std::vector<double> site_marginal(const JointTable& table, int site);

double covariance_of(const JointTable& table, int s, int t);

struct MarkovCheck {
  double residual = 0.0;    // worst |P(x_s | rest) - P(x_s | neighbors)|
  std::size_t skipped = 0;  // zero-probability conditioning events
};

// Requires the table to cover every site of the graph.
MarkovCheck markov_residual(const JointTable& table, const SiteGraph& graph);

// Max pairwise difference between one-pass laws built under the given
// orderings (each ordering must be a valid setup hint for the graph).
double permutation_residual(const FieldSpec& spec,
                            const std::vector<std::vector<int>>& orderings);

// Tables must cover identical sites with identical state lists.
double max_abs_diff(const JointTable& a, const JointTable& b);

}  // namespace knw

#endif  // KNW_ORACLE_HPP
