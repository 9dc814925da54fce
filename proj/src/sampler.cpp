#include "knw/sampler.hpp"

#include <algorithm>
#include <string>
#include <thread>

#include "knw/errors.hpp"

namespace knw {

namespace {

SiteSet intersect_sorted(const SiteSet& a, const SiteSet& b) {
  SiteSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool contains_sorted(const SiteSet& set, int s) {
  return std::binary_search(set.begin(), set.end(), s);
}

void insert_sorted(SiteSet& set, int s) {
  auto it = std::lower_bound(set.begin(), set.end(), s);
  if (it == set.end() || *it != s) set.insert(it, s);
}

std::vector<int> states_of(const SiteSet& base, const Configuration& config) {
  std::vector<int> states;
  states.reserve(base.size());
  for (int t : base) states.push_back(config[static_cast<std::size_t>(t)]);
  return states;
}

int draw_state(const std::vector<double>& probs, double u) {
  double cum = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    cum += probs[j];
    if (u < cum) return static_cast<int>(j);
  }
  return static_cast<int>(probs.size()) - 1;  // u landed on accumulated rounding
}

}  // namespace

const MarginalCache::Plan& MarginalCache::plan_for(const FieldSpec& spec, const SiteSet& base) {
  auto it = plans_.find(base);
  if (it != plans_.end()) return it->second;

  Plan plan;
  // Grow each induced component from its smallest member, always appending the
  // smallest unplaced member adjacent to the placed part — the same growth the
  // setup builder uses when the base is replayed as its own field.
  std::vector<int> position_of(static_cast<std::size_t>(spec.graph.n_sites()), -2);
  SiteSet placed;
  SiteSet remaining = base;
  while (!remaining.empty()) {
    SiteSet component{remaining.front()};
    while (true) {
      int next = -1;
      for (int cand : remaining) {
        if (contains_sorted(component, cand)) continue;
        bool adjacent_to_component = false;
        for (int t : spec.graph.neighbors(cand)) {
          if (contains_sorted(component, t)) {
            adjacent_to_component = true;
            break;
          }
        }
        if (adjacent_to_component && (next == -1 || cand < next)) next = cand;
      }
      if (next == -1) break;
      insert_sorted(component, next);
    }

    // Order the component by the same smallest-eligible growth.
    SiteSet placed_in_component;
    while (placed_in_component.size() < component.size()) {
      int next = -1;
      for (int cand : component) {
        if (contains_sorted(placed_in_component, cand)) continue;
        if (placed_in_component.empty()) {
          next = cand;
          break;
        }
        bool eligible = false;
        for (int t : spec.graph.neighbors(cand))
          if (contains_sorted(placed_in_component, t)) {
            eligible = true;
            break;
          }
        if (eligible && (next == -1 || cand < next)) next = cand;
      }
      const SiteSet earlier = intersect_sorted(spec.graph.neighbors(next), placed_in_component);
      SiteSet inner_base;
      if (!earlier.empty()) {
        if (mode_ == Mode::full_neighborhood) {
          inner_base = earlier;
        } else {
          // One connected component of the earlier neighbors, picked like the
          // setup builder: largest, then newest member, then smallest member.
          std::vector<SiteSet> components;
          {
            SiteSet seen;
            for (int start : earlier) {
              if (contains_sorted(seen, start)) continue;
              SiteSet comp{start};
              insert_sorted(seen, start);
              std::size_t scan = 0;
              std::vector<int> frontier{start};
              while (scan < frontier.size()) {
                const int s = frontier[scan++];
                for (int t : spec.graph.neighbors(s))
                  if (contains_sorted(earlier, t) && !contains_sorted(seen, t)) {
                    insert_sorted(seen, t);
                    insert_sorted(comp, t);
                    frontier.push_back(t);
                  }
              }
              components.push_back(std::move(comp));
            }
          }
          const SiteSet* best = &components.front();
          for (const SiteSet& c : components) {
            if (c.size() != best->size()) {
              if (c.size() > best->size()) best = &c;
              continue;
            }
            if (policy_ == ComponentPolicy::prefer_recent) {
              int rc = -1, rb = -1;
              for (int s : c) rc = std::max(rc, position_of[static_cast<std::size_t>(s)]);
              for (int s : *best) rb = std::max(rb, position_of[static_cast<std::size_t>(s)]);
              if (rc > rb || (rc == rb && c.front() < best->front())) best = &c;
            } else if (c.front() < best->front()) {
              best = &c;
            }
          }
          inner_base = *best;
        }
      }
      position_of[static_cast<std::size_t>(next)] = static_cast<int>(plan.order.size());
      plan.order.push_back(next);
      plan.bases.push_back(std::move(inner_base));
      insert_sorted(placed_in_component, next);
      insert_sorted(placed, next);
    }

    SiteSet rest;
    for (int s : remaining)
      if (!contains_sorted(component, s)) rest.push_back(s);
    remaining = std::move(rest);
  }
  return plans_.emplace(base, std::move(plan)).first->second;
}

double MarginalCache::base_marginal(const FieldSpec& spec, const SiteSet& base,
                                    const Configuration& config) {
  if (base.empty()) return 1.0;
  const auto key = std::make_pair(base, states_of(base, config));
  auto hit = values_.find(key);
  if (hit != values_.end()) return hit->second;

  const Plan& plan = plan_for(spec, base);
  double p = 1.0;
  for (std::size_t i = 0; i < plan.order.size() && p != 0.0; ++i) {
    const int t = plan.order[i];
    const SiteSet& inner = plan.bases[i];
    double m = 1.0;
    if (!inner.empty()) {
      m = base_marginal(spec, inner, config);
      if (m == 0.0) {
        // Zero-probability sub-event: every extension has zero probability.
        p = 0.0;
        break;
      }
    }
    const ConditionalRow row = conditional_row(spec, t, inner, config, m);
    p *= row.probs[static_cast<std::size_t>(config[static_cast<std::size_t>(t)])];
  }
  values_.emplace(key, p);
  return p;
}

double base_marginal_recursive(const FieldSpec& spec, const SiteSet& base,
                               const Configuration& config, MarginalCache& cache) {
  return cache.base_marginal(spec, base, config);
}

double base_marginal_multiplication(const FieldSpec& spec, const ValidSetup& setup,
                                    std::size_t position, const Configuration& config) {
  if (position >= setup.order.size()) throw Error("setup position out of range");
  const SiteSet& target = setup.base_sets[position];
  if (target.empty()) return 1.0;

  std::vector<int> order_pos(static_cast<std::size_t>(spec.graph.n_sites()), -1);
  for (std::size_t i = 0; i < setup.order.size(); ++i)
    order_pos[static_cast<std::size_t>(setup.order[i])] = static_cast<int>(i);

  std::size_t last = 0;
  for (int t : target) {
    const int pos = order_pos[static_cast<std::size_t>(t)];
    if (pos < 0 || pos >= static_cast<int>(position))
      throw BaseOutsidePrefix("base of position " + std::to_string(position) +
                              " is not inside the ordered prefix");
    last = std::max(last, static_cast<std::size_t>(pos));
  }
  const std::size_t prefix_len = last + 1;

  std::vector<int> dims(prefix_len);
  std::size_t table_size = 1;
  for (std::size_t k = 0; k < prefix_len; ++k) {
    dims[k] = static_cast<int>(spec.pi[static_cast<std::size_t>(setup.order[k])].size());
    if (table_size > kSamplerGuard / static_cast<std::size_t>(dims[k]))
      throw ExplosionGuard("prefix enumeration exceeds the size guard");
    table_size *= static_cast<std::size_t>(dims[k]);
  }

  // Product of the first rows, built one site at a time; the running table is
  // the law of the prefix, so summing it over sites outside a base gives that
  // base's marginal exactly as the row product defines it.
  std::vector<double> table{1.0};
  Configuration scratch(static_cast<std::size_t>(spec.graph.n_sites()), -1);
  for (std::size_t k = 0; k < prefix_len; ++k) {
    const int s = setup.order[k];
    const SiteSet& base_k = setup.base_sets[k];
    std::vector<std::size_t> base_axis;  // prefix positions of base sites
    std::size_t group_size = 1;
    for (int t : base_k) {
      const int pos = order_pos[static_cast<std::size_t>(t)];
      if (pos < 0 || pos >= static_cast<int>(k))
        throw BaseOutsidePrefix("base of position " + std::to_string(k) +
                                " is not inside the ordered prefix");
      base_axis.push_back(static_cast<std::size_t>(pos));
      group_size *= static_cast<std::size_t>(dims[static_cast<std::size_t>(pos)]);
    }

    std::vector<double> group_sum(group_size, 0.0);
    std::vector<int> digits(k, 0);
    if (!base_k.empty()) {
      for (std::size_t idx = 0; idx < table.size(); ++idx) {
        std::size_t code = 0, radix = 1;
        for (std::size_t a : base_axis) {
          code += static_cast<std::size_t>(digits[a]) * radix;
          radix *= static_cast<std::size_t>(dims[a]);
        }
        group_sum[code] += table[idx];
        for (std::size_t a = 0; a < k; ++a) {
          if (++digits[a] < dims[a]) break;
          digits[a] = 0;
        }
      }
    }

    const std::size_t d_s = static_cast<std::size_t>(dims[k]);
    std::vector<double> next(table.size() * d_s, 0.0);
    std::fill(digits.begin(), digits.end(), 0);
    for (std::size_t idx = 0; idx < table.size(); ++idx) {
      if (table[idx] != 0.0 || base_k.empty()) {
        double m = 1.0;
        bool dead = false;
        if (!base_k.empty()) {
          std::size_t code = 0, radix = 1;
          for (std::size_t a : base_axis) {
            code += static_cast<std::size_t>(digits[a]) * radix;
            radix *= static_cast<std::size_t>(dims[a]);
          }
          m = group_sum[code];
          dead = (m == 0.0);
        }
        if (!dead) {
          for (std::size_t a = 0; a < k; ++a)
            scratch[static_cast<std::size_t>(setup.order[a])] = digits[a];
          const ConditionalRow row = conditional_row(spec, s, base_k, scratch, m);
          for (std::size_t u = 0; u < d_s; ++u)
            next[idx + u * table.size()] = table[idx] * row.probs[u];
        }
      }
      for (std::size_t a = 0; a < k; ++a) {
        if (++digits[a] < dims[a]) break;
        digits[a] = 0;
      }
    }
    table = std::move(next);
  }

  // Sum the prefix law over every site outside the target base.
  std::vector<std::size_t> target_axis;
  for (int t : target) target_axis.push_back(static_cast<std::size_t>(order_pos[static_cast<std::size_t>(t)]));
  double result = 0.0;
  std::vector<int> digits(prefix_len, 0);
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    bool match = true;
    for (std::size_t a = 0; a < target.size(); ++a) {
      const int want = config[static_cast<std::size_t>(target[a])];
      if (digits[target_axis[a]] != want) {
        match = false;
        break;
      }
    }
    if (match) result += table[idx];
    for (std::size_t a = 0; a < prefix_len; ++a) {
      if (++digits[a] < dims[a]) break;
      digits[a] = 0;
    }
  }
  return result;
}

namespace {

void draw_into(const FieldSpec& spec, const ValidSetup& setup, Rng& rng, MarginalCache& cache,
               Configuration& config) {
  for (std::size_t i = 0; i < setup.order.size(); ++i) {
    const int s = setup.order[i];
    const SiteSet& base = setup.base_sets[i];
    const double m = base.empty() ? 1.0 : cache.base_marginal(spec, base, config);
    const ConditionalRow row = conditional_row(spec, s, base, config, m);
    config[static_cast<std::size_t>(s)] = draw_state(row.probs, rng.next_double());
  }
}

}  // namespace

SampleRun sample_one_pass(const FieldSpec& spec, const ValidSetup& setup, std::uint64_t seed,
                          int replicates, int threads) {
  if (!setup.known_sites.empty())
    throw Error("setup has known sites; use inpaint with their values");
  if (replicates < 0) throw Error("negative replicate count");

  SampleRun run;
  run.seed = seed;
  run.replicates.assign(static_cast<std::size_t>(replicates),
                        Configuration(static_cast<std::size_t>(spec.n_sites()), -1));

  const int worker_count = std::max(1, std::min(threads, replicates));
  auto work = [&](int worker) {
    MarginalCache cache(MarginalCache::Mode::component_base);
    for (int r = worker; r < replicates; r += worker_count) {
      Rng rng(seed, static_cast<std::uint64_t>(r));
      draw_into(spec, setup, rng, cache, run.replicates[static_cast<std::size_t>(r)]);
    }
  };
  if (worker_count <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(worker_count));
    for (int w = 0; w < worker_count; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  return run;
}

Configuration inpaint(const FieldSpec& spec, const ValidSetup& setup,
                      const Configuration& known_config, std::uint64_t seed) {
  if (known_config.size() != static_cast<std::size_t>(spec.n_sites()))
    throw Error("known configuration must cover every site slot");
  Configuration config(static_cast<std::size_t>(spec.n_sites()), -1);
  for (int s : setup.known_sites) {
    const int u = known_config[static_cast<std::size_t>(s)];
    if (u < 0 || u >= static_cast<int>(spec.pi[static_cast<std::size_t>(s)].size()))
      throw Error("known state index out of range at site " + std::to_string(s));
    config[static_cast<std::size_t>(s)] = u;
  }
  Rng rng(seed, 0);
  MarginalCache cache(MarginalCache::Mode::component_base);
  draw_into(spec, setup, rng, cache, config);
  return config;
}

std::vector<SiteSet> markov_base_sets(const SiteGraph& graph, const std::vector<int>& order) {
  std::vector<SiteSet> bases;
  bases.reserve(order.size());
  SiteSet placed;
  for (int s : order) {
    bases.push_back(intersect_sorted(graph.neighbors(s), placed));
    insert_sorted(placed, s);
  }
  return bases;
}

Configuration sample_markov(const FieldSpec& spec, const std::vector<int>& order, Rng& rng,
                            MarginalCache& cache) {
  if (!spec.hat_equals_pi())
    throw HatPiMismatch("markov mode requires hat == pi at every site");
  if (cache.mode() != MarginalCache::Mode::full_neighborhood)
    throw Error("markov mode needs a full_neighborhood cache");
  const std::size_t n = static_cast<std::size_t>(spec.n_sites());
  if (order.size() != n) throw InvalidOrdering("order must cover every site exactly once");
  std::vector<bool> seen(n, false);
  for (int s : order) {
    if (s < 0 || s >= spec.n_sites() || seen[static_cast<std::size_t>(s)])
      throw InvalidOrdering("order must be a permutation of the sites");
    seen[static_cast<std::size_t>(s)] = true;
  }

  Configuration config(n, -1);
  SiteSet placed;
  for (int s : order) {
    const SiteSet base = intersect_sorted(spec.graph.neighbors(s), placed);
    const double m = base.empty() ? 1.0 : cache.base_marginal(spec, base, config);
    const ConditionalRow row = conditional_row(spec, s, base, config, m);
    config[static_cast<std::size_t>(s)] = draw_state(row.probs, rng.next_double());
    insert_sorted(placed, s);
  }
  return config;
}

Configuration sample_markov(const FieldSpec& spec, const std::vector<int>& order,
                            std::uint64_t seed) {
  Rng rng(seed, 0);
  MarginalCache cache(MarginalCache::Mode::full_neighborhood);
  return sample_markov(spec, order, rng, cache);
}

Configuration sample_markov(const FieldSpec& spec, std::uint64_t seed) {
  Rng rng(seed, 0);
  std::vector<int> order(static_cast<std::size_t>(spec.n_sites()));
  for (int s = 0; s < spec.n_sites(); ++s) order[static_cast<std::size_t>(s)] = s;
  rng.shuffle(order);
  MarginalCache cache(MarginalCache::Mode::full_neighborhood);
  return sample_markov(spec, order, rng, cache);
}

}  // namespace knw
