#ifndef KNW_KERNEL_HPP
#define KNW_KERNEL_HPP

#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "knw/graph.hpp"
#include "knw/pmf.hpp"

namespace knw {

// Conditional probabilities may stray this far outside [0,1] before the spec
// is declared infeasible; smaller excursions are clamped.
inline constexpr double kRegularityTol = 1e-12;

enum class Variant {
  general,           // independent pi / tilde / hat per site
  equal_tilde_hat,   // hat == tilde
  all_equal,         // tilde == hat == pi
  uniform,           // tilde == hat == uniform on each site's states
  uniform_hat,       // tilde == pi, hat uniform
  permutation_safe,  // hat == pi
  shared_modifiers,  // one tilde and one hat shared by all sites
  captcha,           // shared state space, tilde == hat == uniform
};

const char* variant_name(Variant v);
std::optional<Variant> variant_from_name(std::string_view name);

// A correlated-field specification: per-site target marginals pi, weight pmfs
// tilde, mixing pmfs hat (all on the same per-site state list), and covariance
// targets beta on neighbor pairs (absent pairs count as zero).
struct FieldSpec {
  SiteGraph graph;
  std::vector<Pmf> pi;
  std::vector<Pmf> tilde;
  std::vector<Pmf> hat;
  std::map<std::pair<int, int>, double> beta;  // canonical (lo, hi) keys
  Variant variant = Variant::general;

  int n_sites() const { return graph.n_sites(); }
  double beta_at(int s, int t) const;
  bool hat_equals_pi(double tol = 1e-12) const;
};

FieldSpec make_general(SiteGraph graph, std::vector<Pmf> pi, std::vector<Pmf> tilde,
                       std::vector<Pmf> hat,
                       const std::map<std::pair<int, int>, double>& beta);
FieldSpec make_equal_tilde_hat(SiteGraph graph, std::vector<Pmf> pi, std::vector<Pmf> tilde,
                               const std::map<std::pair<int, int>, double>& beta);
FieldSpec make_all_equal(SiteGraph graph, std::vector<Pmf> pi,
                         const std::map<std::pair<int, int>, double>& beta);
FieldSpec make_uniform(SiteGraph graph, std::vector<Pmf> pi,
                       const std::map<std::pair<int, int>, double>& beta);
FieldSpec make_uniform_hat(SiteGraph graph, std::vector<Pmf> pi,
                           const std::map<std::pair<int, int>, double>& beta);
FieldSpec make_permutation_safe(SiteGraph graph, std::vector<Pmf> pi, std::vector<Pmf> tilde,
                                const std::map<std::pair<int, int>, double>& beta);
FieldSpec make_shared_modifiers(SiteGraph graph, std::vector<Pmf> pi, const Pmf& tilde,
                                const Pmf& hat,
                                const std::map<std::pair<int, int>, double>& beta);
FieldSpec make_captcha(SiteGraph graph, std::vector<Pmf> pi,
                       const std::map<std::pair<int, int>, double>& beta);

struct ConditionalRow {
  int site = -1;
  SiteSet base;               // sorted base sites
  std::vector<double> probs;  // one entry per state of `site`
};

// Distribution of `site` given the states of its base set. `config` supplies
// state indices for at least the base sites; `base_marginal` is the
// probability of that base configuration and must be positive when the base is
// nonempty. Entries outside [0,1] beyond kRegularityTol raise
// RegularityViolation; smaller excursions are clamped.
ConditionalRow conditional_row(const FieldSpec& spec, int site, const SiteSet& base,
                               const std::vector<int>& config, double base_marginal);

// Same evaluation without clamping or range errors; used to measure excursions.
std::vector<double> conditional_row_raw(const FieldSpec& spec, int site, const SiteSet& base,
                                        const std::vector<int>& config, double base_marginal);

}  // namespace knw

#endif  // KNW_KERNEL_HPP
