#include "knw/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "knw/errors.hpp"
#include "knw/graph.hpp"

namespace knw {

std::size_t JointTable::code(const std::vector<int>& digit_values) const {
  std::size_t c = 0, radix = 1;
  for (std::size_t a = 0; a < dims.size(); ++a) {
    c += static_cast<std::size_t>(digit_values[a]) * radix;
    radix *= static_cast<std::size_t>(dims[a]);
  }
  return c;
}

std::vector<int> JointTable::digits(std::size_t c) const {
  std::vector<int> out(dims.size());
  for (std::size_t a = 0; a < dims.size(); ++a) {
    const std::size_t d = static_cast<std::size_t>(dims[a]);
    out[a] = static_cast<int>(c % d);
    c /= d;
  }
  return out;
}

int JointTable::axis_of(int site) const {
  const auto it = std::lower_bound(sites.begin(), sites.end(), site);
  if (it == sites.end() || *it != site) return -1;
  return static_cast<int>(it - sites.begin());
}

double JointTable::total() const { return std::accumulate(p.begin(), p.end(), 0.0); }

namespace {

JointTable table_shell(const FieldSpec& spec, const std::vector<int>& covered) {
  JointTable table;
  table.sites = covered;
  std::sort(table.sites.begin(), table.sites.end());
  std::size_t size = 1;
  for (int s : table.sites) {
    const Pmf& pi = spec.pi[static_cast<std::size_t>(s)];
    table.dims.push_back(static_cast<int>(pi.size()));
    table.states.push_back(pi.states());
    if (size > kOracleGuard / pi.size())
      throw ExplosionGuard("joint enumeration exceeds the size guard");
    size *= pi.size();
  }
  table.p.assign(size, 0.0);
  return table;
}

// Walks every configuration of `order`, multiplying the construction's rows,
// and deposits the products into the table. `config` carries any fixed states.
void fill_by_rows(JointTable& table, const FieldSpec& spec, const std::vector<int>& order,
                  const std::vector<SiteSet>& bases, Configuration config,
                  MarginalCache& cache) {
  if (order.empty()) {
    table.p[0] = 1.0;
    return;
  }
  std::vector<int> dims(order.size());
  std::vector<std::size_t> axis(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    dims[i] = static_cast<int>(spec.pi[static_cast<std::size_t>(order[i])].size());
    axis[i] = static_cast<std::size_t>(table.axis_of(order[i]));
  }

  std::vector<int> digits(order.size(), 0);
  std::vector<int> table_digits(table.dims.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < order.size(); ++i)
      config[static_cast<std::size_t>(order[i])] = digits[i];
    double p = 1.0;
    for (std::size_t i = 0; i < order.size() && p != 0.0; ++i) {
      const SiteSet& base = bases[i];
      const double m = base.empty() ? 1.0 : cache.base_marginal(spec, base, config);
      if (!base.empty() && m == 0.0) {
        p = 0.0;
        break;
      }
      const ConditionalRow row = conditional_row(spec, order[i], base, config, m);
      p *= row.probs[static_cast<std::size_t>(digits[i])];
    }
    for (std::size_t i = 0; i < order.size(); ++i) table_digits[axis[i]] = digits[i];
    table.p[table.code(table_digits)] = p;

    std::size_t k = 0;
    while (k < digits.size() && ++digits[k] == dims[k]) digits[k++] = 0;
    if (k == digits.size()) break;
  }
}

}  // namespace

JointTable enumerate_joint(const FieldSpec& spec, const ValidSetup& setup,
                           const Configuration& known_config) {
  JointTable table = table_shell(spec, setup.order);
  Configuration config(static_cast<std::size_t>(spec.n_sites()), -1);
  if (!setup.known_sites.empty()) {
    if (known_config.size() != static_cast<std::size_t>(spec.n_sites()))
      throw Error("setup has known sites; pass their states in known_config");
    for (int s : setup.known_sites) {
      const int u = known_config[static_cast<std::size_t>(s)];
      if (u < 0 || u >= static_cast<int>(spec.pi[static_cast<std::size_t>(s)].size()))
        throw Error("known state index out of range at site " + std::to_string(s));
      config[static_cast<std::size_t>(s)] = u;
    }
  }
  MarginalCache cache(MarginalCache::Mode::component_base);
  fill_by_rows(table, spec, setup.order, setup.base_sets, std::move(config), cache);
  return table;
}

JointTable enumerate_markov(const FieldSpec& spec, const std::vector<int>& order) {
  if (!spec.hat_equals_pi())
    throw HatPiMismatch("markov mode requires hat == pi at every site");
  const std::size_t n = static_cast<std::size_t>(spec.n_sites());
  if (order.size() != n) throw InvalidOrdering("order must cover every site exactly once");
  std::vector<bool> seen(n, false);
  for (int s : order) {
    if (s < 0 || s >= spec.n_sites() || seen[static_cast<std::size_t>(s)])
      throw InvalidOrdering("order must be a permutation of the sites");
    seen[static_cast<std::size_t>(s)] = true;
  }
  JointTable table = table_shell(spec, order);
  MarginalCache cache(MarginalCache::Mode::full_neighborhood);
  fill_by_rows(table, spec, order, markov_base_sets(spec.graph, order),
               Configuration(n, -1), cache);
  return table;
}

JointTable marginal_of(const JointTable& table, const SiteSet& keep) {
  JointTable out;
  out.sites = keep;
  std::size_t size = 1;
  std::vector<std::size_t> keep_axis;
  for (int s : keep) {
    const int a = table.axis_of(s);
    if (a < 0) throw Error("marginal target site " + std::to_string(s) + " not in table");
    keep_axis.push_back(static_cast<std::size_t>(a));
    out.dims.push_back(table.dims[static_cast<std::size_t>(a)]);
    out.states.push_back(table.states[static_cast<std::size_t>(a)]);
    size *= static_cast<std::size_t>(table.dims[static_cast<std::size_t>(a)]);
  }
  out.p.assign(size, 0.0);

  std::vector<int> digits(table.dims.size(), 0);
  std::vector<int> kept(keep.size(), 0);
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    for (std::size_t a = 0; a < keep_axis.size(); ++a) kept[a] = digits[keep_axis[a]];
    out.p[out.code(kept)] += table.p[idx];
    for (std::size_t a = 0; a < digits.size(); ++a) {
      if (++digits[a] < table.dims[a]) break;
      digits[a] = 0;
    }
  }
  return out;
}

std::vector<double> site_marginal(const JointTable& table, int site) {
  return marginal_of(table, SiteSet{site}).p;
}

double covariance_of(const JointTable& table, int s, int t) {
  if (s == t) {
    const JointTable m = marginal_of(table, SiteSet{s});
    double mean = 0.0, second = 0.0;
    for (std::size_t u = 0; u < m.size(); ++u) {
      mean += m.states[0][u] * m.p[u];
      second += m.states[0][u] * m.states[0][u] * m.p[u];
    }
    return second - mean * mean;
  }
  const JointTable m = marginal_of(table, SiteSet{std::min(s, t), std::max(s, t)});
  double mean_a = 0.0, mean_b = 0.0, cross = 0.0;
  std::vector<int> digits(2, 0);
  for (std::size_t idx = 0; idx < m.size(); ++idx) {
    const double a = m.states[0][static_cast<std::size_t>(digits[0])];
    const double b = m.states[1][static_cast<std::size_t>(digits[1])];
    mean_a += a * m.p[idx];
    mean_b += b * m.p[idx];
    cross += a * b * m.p[idx];
    if (++digits[0] == m.dims[0]) {
      digits[0] = 0;
      ++digits[1];
    }
  }
  return cross - mean_a * mean_b;
}

MarkovCheck markov_residual(const JointTable& table, const SiteGraph& graph) {
  if (static_cast<int>(table.sites.size()) != graph.n_sites())
    throw Error("markov residual needs the full joint law");
  for (int s = 0; s < graph.n_sites(); ++s)
    if (table.axis_of(s) < 0) throw Error("markov residual needs the full joint law");

  MarkovCheck check;
  for (int s = 0; s < graph.n_sites(); ++s) {
    const std::size_t a = static_cast<std::size_t>(table.axis_of(s));
    const std::size_t d = static_cast<std::size_t>(table.dims[a]);
    std::size_t radix = 1;
    for (std::size_t k = 0; k < a; ++k) radix *= static_cast<std::size_t>(table.dims[k]);

    // Mass of each conditioning event over the complement of {s}: compact the
    // code by dropping the digit of axis `a`.
    std::vector<double> rest_mass(table.size() / d, 0.0);
    for (std::size_t idx = 0; idx < table.size(); ++idx) {
      const std::size_t low = idx % radix;
      const std::size_t high = idx / (radix * d);
      rest_mass[low + high * radix] += table.p[idx];
    }

    SiteSet closure = graph.neighbors(s);
    closure.insert(std::lower_bound(closure.begin(), closure.end(), s), s);
    const JointTable nb = marginal_of(table, closure);
    const std::size_t na = static_cast<std::size_t>(nb.axis_of(s));
    std::size_t nb_radix = 1;
    for (std::size_t k = 0; k < na; ++k) nb_radix *= static_cast<std::size_t>(nb.dims[k]);
    std::vector<double> nb_mass(nb.size() / d, 0.0);
    for (std::size_t idx = 0; idx < nb.size(); ++idx) {
      const std::size_t low = idx % nb_radix;
      const std::size_t high = idx / (nb_radix * d);
      nb_mass[low + high * nb_radix] += nb.p[idx];
    }

    std::vector<std::size_t> nb_axes;
    for (int t : closure) nb_axes.push_back(static_cast<std::size_t>(table.axis_of(t)));
    std::vector<int> digits(table.dims.size(), 0);
    std::vector<int> nb_digits(closure.size(), 0);
    std::vector<bool> rest_counted(rest_mass.size(), false);
    for (std::size_t idx = 0; idx < table.size(); ++idx) {
      const std::size_t low = idx % radix;
      const std::size_t high = idx / (radix * d);
      const std::size_t rest_key = low + high * radix;
      if (rest_mass[rest_key] == 0.0) {
        if (!rest_counted[rest_key]) {
          rest_counted[rest_key] = true;
          ++check.skipped;
        }
      } else {
        for (std::size_t k = 0; k < nb_axes.size(); ++k) nb_digits[k] = digits[nb_axes[k]];
        const std::size_t nb_idx = nb.code(nb_digits);
        const std::size_t nb_key = nb_idx % nb_radix + (nb_idx / (nb_radix * d)) * nb_radix;
        const double p_rest = table.p[idx] / rest_mass[rest_key];
        const double p_nb = nb.p[nb_idx] / nb_mass[nb_key];
        check.residual = std::max(check.residual, std::abs(p_rest - p_nb));
      }
      for (std::size_t k = 0; k < digits.size(); ++k) {
        if (++digits[k] < table.dims[k]) break;
        digits[k] = 0;
      }
    }
  }
  return check;
}

double permutation_residual(const FieldSpec& spec,
                            const std::vector<std::vector<int>>& orderings) {
  std::vector<JointTable> tables;
  tables.reserve(orderings.size());
  for (const auto& order : orderings) {
    const ValidSetup setup = build_valid_setup(spec.graph, spec.graph.all_sites(), order);
    tables.push_back(enumerate_joint(spec, setup));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < tables.size(); ++i)
    for (std::size_t j = i + 1; j < tables.size(); ++j)
      worst = std::max(worst, max_abs_diff(tables[i], tables[j]));
  return worst;
}

double max_abs_diff(const JointTable& a, const JointTable& b) {
  if (a.sites != b.sites || a.dims != b.dims)
    throw Error("joint tables cover different sites");
  double worst = 0.0;
  for (std::size_t idx = 0; idx < a.size(); ++idx)
    worst = std::max(worst, std::abs(a.p[idx] - b.p[idx]));
  return worst;
}

}  // namespace knw
