#include "knw/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "knw/errors.hpp"

namespace knw {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::general: return "general";
    case Variant::equal_tilde_hat: return "equal-tilde-hat";
    case Variant::all_equal: return "all-equal";
    case Variant::uniform: return "uniform";
    case Variant::uniform_hat: return "uniform-hat";
    case Variant::permutation_safe: return "permutation-safe";
    case Variant::shared_modifiers: return "shared-modifiers";
    case Variant::captcha: return "captcha";
  }
  return "general";
}

std::optional<Variant> variant_from_name(std::string_view name) {
  for (Variant v : {Variant::general, Variant::equal_tilde_hat, Variant::all_equal,
                    Variant::uniform, Variant::uniform_hat, Variant::permutation_safe,
                    Variant::shared_modifiers, Variant::captcha}) {
    if (name == variant_name(v)) return v;
  }
  return std::nullopt;
}

double FieldSpec::beta_at(int s, int t) const {
  const auto it = beta.find({std::min(s, t), std::max(s, t)});
  return it == beta.end() ? 0.0 : it->second;
}

bool FieldSpec::hat_equals_pi(double tol) const {
  for (std::size_t s = 0; s < hat.size(); ++s)
    for (std::size_t u = 0; u < hat[s].size(); ++u)
      if (std::abs(hat[s].prob(u) - pi[s].prob(u)) > tol) return false;
  return true;
}

namespace {

void check_spec(const FieldSpec& spec) {
  const std::size_t n = static_cast<std::size_t>(spec.graph.n_sites());
  if (spec.pi.size() != n || spec.tilde.size() != n || spec.hat.size() != n)
    throw VariantConstraintViolation("pmf collections must cover every site");
  for (std::size_t s = 0; s < n; ++s) {
    if (!spec.pi[s].strictly_positive())
      throw VariantConstraintViolation(
          "target marginal has a zero entry at site " + std::to_string(s) +
          "; drop the state instead");
    if (spec.tilde[s].states() != spec.pi[s].states() ||
        spec.hat[s].states() != spec.pi[s].states())
      throw VariantConstraintViolation("pi, tilde and hat of site " + std::to_string(s) +
                                       " must share one state list");
    if (spec.tilde[s].cached_moments().variance <= 0.0)
      throw DegenerateTilde("weight pmf of site " + std::to_string(s) + " has zero variance");
  }
  for (const auto& [pair, value] : spec.beta) {
    if (pair.first >= pair.second || !spec.graph.adjacent(pair.first, pair.second))
      throw VariantConstraintViolation("covariance assigned to a non-neighbor pair (" +
                                       std::to_string(pair.first) + "," +
                                       std::to_string(pair.second) + ")");
    if (!std::isfinite(value))
      throw VariantConstraintViolation("covariance value is not finite");
  }
}

std::vector<Pmf> uniform_like(const std::vector<Pmf>& pi) {
  std::vector<Pmf> out;
  out.reserve(pi.size());
  for (const Pmf& p : pi) out.push_back(Pmf::uniform(p.states()));
  return out;
}

void require_shared_states(const std::vector<Pmf>& pi, const char* what) {
  for (std::size_t s = 1; s < pi.size(); ++s)
    if (pi[s].states() != pi[0].states())
      throw VariantConstraintViolation(std::string(what) +
                                       " requires one state list shared by all sites");
}

}  // namespace

FieldSpec make_general(SiteGraph graph, std::vector<Pmf> pi, std::vector<Pmf> tilde,
                       std::vector<Pmf> hat,
                       const std::map<std::pair<int, int>, double>& beta) {
  FieldSpec spec{std::move(graph), std::move(pi), std::move(tilde), std::move(hat), beta,
                 Variant::general};
  check_spec(spec);
  return spec;
}

FieldSpec make_equal_tilde_hat(SiteGraph graph, std::vector<Pmf> pi, std::vector<Pmf> tilde,
                               const std::map<std::pair<int, int>, double>& beta) {
  std::vector<Pmf> hat = tilde;
  FieldSpec spec{std::move(graph), std::move(pi), std::move(tilde), std::move(hat), beta,
                 Variant::equal_tilde_hat};
  check_spec(spec);
  return spec;
}

FieldSpec make_all_equal(SiteGraph graph, std::vector<Pmf> pi,
                         const std::map<std::pair<int, int>, double>& beta) {
  std::vector<Pmf> tilde = pi, hat = pi;
  FieldSpec spec{std::move(graph), std::move(pi), std::move(tilde), std::move(hat), beta,
                 Variant::all_equal};
  check_spec(spec);
  return spec;
}

FieldSpec make_uniform(SiteGraph graph, std::vector<Pmf> pi,
                       const std::map<std::pair<int, int>, double>& beta) {
  std::vector<Pmf> tilde = uniform_like(pi), hat = uniform_like(pi);
  FieldSpec spec{std::move(graph), std::move(pi), std::move(tilde), std::move(hat), beta,
                 Variant::uniform};
  check_spec(spec);
  return spec;
}

FieldSpec make_uniform_hat(SiteGraph graph, std::vector<Pmf> pi,
                           const std::map<std::pair<int, int>, double>& beta) {
  std::vector<Pmf> tilde = pi, hat = uniform_like(pi);
  FieldSpec spec{std::move(graph), std::move(pi), std::move(tilde), std::move(hat), beta,
                 Variant::uniform_hat};
  check_spec(spec);
  return spec;
}

FieldSpec make_permutation_safe(SiteGraph graph, std::vector<Pmf> pi, std::vector<Pmf> tilde,
                                const std::map<std::pair<int, int>, double>& beta) {
  std::vector<Pmf> hat = pi;
  FieldSpec spec{std::move(graph), std::move(pi), std::move(tilde), std::move(hat), beta,
                 Variant::permutation_safe};
  check_spec(spec);
  return spec;
}

FieldSpec make_shared_modifiers(SiteGraph graph, std::vector<Pmf> pi, const Pmf& tilde,
                                const Pmf& hat,
                                const std::map<std::pair<int, int>, double>& beta) {
  require_shared_states(pi, "shared-modifiers");
  if (!pi.empty() && (tilde.states() != pi[0].states() || hat.states() != pi[0].states()))
    throw VariantConstraintViolation(
        "shared-modifiers requires tilde and hat on the shared state list");
  std::vector<Pmf> tildes(pi.size(), tilde), hats(pi.size(), hat);
  FieldSpec spec{std::move(graph), std::move(pi), std::move(tildes), std::move(hats), beta,
                 Variant::shared_modifiers};
  check_spec(spec);
  return spec;
}

FieldSpec make_captcha(SiteGraph graph, std::vector<Pmf> pi,
                       const std::map<std::pair<int, int>, double>& beta) {
  require_shared_states(pi, "captcha");
  std::vector<Pmf> tilde = uniform_like(pi), hat = uniform_like(pi);
  FieldSpec spec{std::move(graph), std::move(pi), std::move(tilde), std::move(hat), beta,
                 Variant::captcha};
  check_spec(spec);
  return spec;
}

std::vector<double> conditional_row_raw(const FieldSpec& spec, int site, const SiteSet& base,
                                        const std::vector<int>& config, double base_marginal) {
  const Pmf& pi_s = spec.pi[static_cast<std::size_t>(site)];
  const Pmf& tilde_s = spec.tilde[static_cast<std::size_t>(site)];
  if (base.empty()) return pi_s.probs();
  if (!(base_marginal > 0.0))
    throw ZeroBaseMarginal("conditioning event of site " + std::to_string(site) +
                           " has zero probability");

  const std::size_t m = base.size();
  // Weighted deviations of the base states and prefix/suffix hat products, so
  // each leave-one-out hat product is formed without dividing by hat entries
  // (which may be zero).
  std::vector<double> w(m), hat_prefix(m + 1, 1.0), hat_suffix(m + 1, 1.0);
  for (std::size_t k = 0; k < m; ++k) {
    const int t = base[k];
    const int u = config[static_cast<std::size_t>(t)];
    const Pmf& tilde_t = spec.tilde[static_cast<std::size_t>(t)];
    const Moments& mt = tilde_t.cached_moments();
    w[k] = tilde_t.prob(static_cast<std::size_t>(u)) *
           (tilde_t.state(static_cast<std::size_t>(u)) - mt.mean) / mt.variance;
    hat_prefix[k + 1] =
        hat_prefix[k] *
        spec.hat[static_cast<std::size_t>(t)].prob(static_cast<std::size_t>(u));
  }
  for (std::size_t k = m; k-- > 0;) {
    const int t = base[k];
    const int u = config[static_cast<std::size_t>(t)];
    hat_suffix[k] = hat_suffix[k + 1] *
                    spec.hat[static_cast<std::size_t>(t)].prob(static_cast<std::size_t>(u));
  }

  double correction = 0.0;
  for (std::size_t k = 0; k < m; ++k)
    correction += hat_prefix[k] * hat_suffix[k + 1] * spec.beta_at(site, base[k]) * w[k];
  correction /= base_marginal;

  const Moments& ms = tilde_s.cached_moments();
  std::vector<double> probs(pi_s.size());
  for (std::size_t u = 0; u < pi_s.size(); ++u) {
    const double v = tilde_s.prob(u) * (tilde_s.state(u) - ms.mean) / ms.variance;
    probs[u] = pi_s.prob(u) + v * correction;
  }
  return probs;
}

ConditionalRow conditional_row(const FieldSpec& spec, int site, const SiteSet& base,
                               const std::vector<int>& config, double base_marginal) {
  ConditionalRow row;
  row.site = site;
  row.base = base;
  row.probs = conditional_row_raw(spec, site, base, config, base_marginal);
  for (std::size_t u = 0; u < row.probs.size(); ++u) {
    double& p = row.probs[u];
    if (p < -kRegularityTol || p > 1.0 + kRegularityTol) {
      std::vector<int> base_states;
      base_states.reserve(base.size());
      for (int t : base) base_states.push_back(config[static_cast<std::size_t>(t)]);
      std::ostringstream msg;
      msg << "conditional probability " << p << " of site " << site << " state " << u
          << " leaves [0,1]: covariances infeasible at this configuration";
      throw RegularityViolation(site, base, std::move(base_states), static_cast<int>(u), p,
                                msg.str());
    }
    p = std::clamp(p, 0.0, 1.0);
  }
  return row;
}

}  // namespace knw
