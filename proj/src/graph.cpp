#include "knw/graph.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "knw/errors.hpp"

namespace knw {

namespace {

bool set_contains(const SiteSet& set, int s) {
  return std::binary_search(set.begin(), set.end(), s);
}

void set_insert(SiteSet& set, int s) {
  auto it = std::lower_bound(set.begin(), set.end(), s);
  if (it == set.end() || *it != s) set.insert(it, s);
}

}  // namespace

SiteGraph::SiteGraph(int n_sites, const std::vector<std::pair<int, int>>& edges)
    : adjacency_(static_cast<std::size_t>(n_sites)) {
  if (n_sites < 0) throw InvalidGraph("negative site count");
  for (auto [s, t] : edges) {
    if (s < 0 || s >= n_sites || t < 0 || t >= n_sites)
      throw InvalidGraph("edge endpoint out of range");
    if (s == t) throw InvalidGraph("loops are not allowed");
    if (s > t) std::swap(s, t);
    edges_.emplace_back(s, t);
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (auto [s, t] : edges_) {
    adjacency_[static_cast<std::size_t>(s)].push_back(t);
    adjacency_[static_cast<std::size_t>(t)].push_back(s);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

const SiteSet& SiteGraph::neighbors(int s) const {
  if (s < 0 || s >= n_sites()) throw InvalidGraph("site out of range");
  return adjacency_[static_cast<std::size_t>(s)];
}

bool SiteGraph::adjacent(int s, int t) const { return set_contains(neighbors(s), t); }

bool SiteGraph::complete() const {
  const std::size_t n = adjacency_.size();
  return edges_.size() == n * (n - 1) / 2;
}

SiteSet SiteGraph::all_sites() const {
  SiteSet all(static_cast<std::size_t>(n_sites()));
  for (int s = 0; s < n_sites(); ++s) all[static_cast<std::size_t>(s)] = s;
  return all;
}

SiteSet neighborhood_of_set(const SiteGraph& graph, const SiteSet& sites) {
  if (sites.empty()) return graph.all_sites();
  SiteSet result;
  for (int s : sites)
    for (int t : graph.neighbors(s))
      if (!set_contains(sites, t)) set_insert(result, t);
  return result;
}

bool is_connected(const SiteGraph& graph, const SiteSet& sites) {
  if (sites.size() <= 1) return true;
  SiteSet seen{sites.front()};
  std::deque<int> frontier{sites.front()};
  while (!frontier.empty()) {
    const int s = frontier.front();
    frontier.pop_front();
    for (int t : graph.neighbors(s)) {
      if (set_contains(sites, t) && !set_contains(seen, t)) {
        set_insert(seen, t);
        frontier.push_back(t);
      }
    }
  }
  return seen.size() == sites.size();
}

std::vector<SiteSet> connected_components(const SiteGraph& graph, const SiteSet& sites) {
  std::vector<SiteSet> components;
  SiteSet seen;
  for (int start : sites) {
    if (set_contains(seen, start)) continue;
    SiteSet comp{start};
    set_insert(seen, start);
    std::deque<int> frontier{start};
    while (!frontier.empty()) {
      const int s = frontier.front();
      frontier.pop_front();
      for (int t : graph.neighbors(s)) {
        if (set_contains(sites, t) && !set_contains(seen, t)) {
          set_insert(seen, t);
          set_insert(comp, t);
          frontier.push_back(t);
        }
      }
    }
    components.push_back(std::move(comp));
  }
  return components;
}

namespace {

// Rank of the newest member of a component: known sites rank -1, ordered sites
// their position. Drives the prefer_recent tie-break.
int newest_rank(const SiteSet& component, const std::vector<int>& position_of) {
  int best = -1;
  for (int s : component) best = std::max(best, position_of[static_cast<std::size_t>(s)]);
  return best;
}

SiteSet pick_base_component(const SiteGraph& graph, const SiteSet& eligible,
                            const std::vector<int>& position_of, ComponentPolicy policy) {
  std::vector<SiteSet> components = connected_components(graph, eligible);
  const SiteSet* best = &components.front();
  for (const SiteSet& c : components) {
    if (c.size() != best->size()) {
      if (c.size() > best->size()) best = &c;
      continue;
    }
    if (policy == ComponentPolicy::prefer_recent) {
      const int rc = newest_rank(c, position_of);
      const int rb = newest_rank(*best, position_of);
      if (rc > rb || (rc == rb && c.front() < best->front())) best = &c;
    } else {
      if (c.front() < best->front()) best = &c;
    }
  }
  return *best;
}

}  // namespace

ValidSetup build_valid_setup(const SiteGraph& graph, const SiteSet& unknown,
                             const std::vector<int>& order_hint, ComponentPolicy policy) {
  if (!is_connected(graph, graph.all_sites()))
    throw DisconnectedGraph("site graph must be connected");
  if (unknown.empty()) throw InvalidGraph("unknown region is empty");
  for (std::size_t i = 0; i < unknown.size(); ++i) {
    if (unknown[i] < 0 || unknown[i] >= graph.n_sites())
      throw InvalidGraph("unknown site out of range");
    if (i > 0 && unknown[i] <= unknown[i - 1])
      throw InvalidGraph("unknown region must be sorted and duplicate-free");
  }

  SiteSet known;
  for (int s = 0; s < graph.n_sites(); ++s)
    if (!set_contains(unknown, s)) known.push_back(s);

  // position_of: known sites -1, ordered sites their order index, -2 unplaced.
  std::vector<int> position_of(static_cast<std::size_t>(graph.n_sites()), -2);
  for (int s : known) position_of[static_cast<std::size_t>(s)] = -1;

  SiteSet accumulated = known;  // known plus ordered-so-far
  std::vector<int> order;
  order.reserve(unknown.size());

  auto eligible_set = [&]() {
    SiteSet frontier = neighborhood_of_set(graph, accumulated);
    SiteSet result;
    for (int s : frontier)
      if (set_contains(unknown, s) && position_of[static_cast<std::size_t>(s)] == -2)
        result.push_back(s);
    return result;
  };

  if (!order_hint.empty()) {
    if (order_hint.size() != unknown.size())
      throw InvalidOrderHint(0, "order hint must cover the unknown region exactly");
    for (std::size_t i = 0; i < order_hint.size(); ++i) {
      const int s = order_hint[i];
      if (!set_contains(unknown, s))
        throw InvalidOrderHint(i, "order hint site " + std::to_string(s) +
                                      " is not in the unknown region");
      if (position_of[static_cast<std::size_t>(s)] != -2)
        throw InvalidOrderHint(i, "order hint repeats site " + std::to_string(s));
      const SiteSet frontier = neighborhood_of_set(graph, accumulated);
      if (!set_contains(frontier, s))
        throw InvalidOrderHint(i, "site " + std::to_string(s) +
                                      " does not neighbor the known-plus-ordered region");
      position_of[static_cast<std::size_t>(s)] = static_cast<int>(i);
      set_insert(accumulated, s);
      order.push_back(s);
    }
  } else {
    while (order.size() < unknown.size()) {
      const SiteSet eligible = eligible_set();
      if (eligible.empty())
        throw DisconnectedGraph("unknown region is unreachable from the known region");
      const int s = eligible.front();
      position_of[static_cast<std::size_t>(s)] = static_cast<int>(order.size());
      set_insert(accumulated, s);
      order.push_back(s);
    }
  }

  ValidSetup setup;
  setup.order = order;
  setup.known_sites = known;
  setup.base_sets.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int s = order[i];
    SiteSet earlier;
    for (int t : graph.neighbors(s)) {
      const int pos = position_of[static_cast<std::size_t>(t)];
      if (pos == -1 || (pos >= 0 && pos < static_cast<int>(i))) earlier.push_back(t);
    }
    if (earlier.empty()) {
      setup.base_sets.emplace_back();
      continue;
    }
    SiteSet base = pick_base_component(graph, earlier, position_of, policy);
    for (int t : base) {
      const int lo = std::min(s, t), hi = std::max(s, t);
      setup.cov_pairs.emplace_back(lo, hi);
    }
    setup.base_sets.push_back(std::move(base));
  }
  std::sort(setup.cov_pairs.begin(), setup.cov_pairs.end());
  setup.cov_pairs.erase(std::unique(setup.cov_pairs.begin(), setup.cov_pairs.end()),
                        setup.cov_pairs.end());
  return setup;
}

int grid_index(const GridSpec& grid, int row, int col) { return col * grid.rows + row; }

GridSetup grid_graph(const GridSpec& grid) {
  if (grid.rows < 1 || grid.cols < 1) throw InvalidGraph("grid needs positive dimensions");
  if (grid.radius < 1) throw InvalidGraph("grid radius must be at least 1");
  const int m = grid.rows, n = grid.cols, r = grid.radius;

  std::vector<std::pair<int, int>> edges;
  for (int col = 0; col < n; ++col) {
    for (int row = 0; row < m; ++row) {
      const int s = grid_index(grid, row, col);
      for (int dc = 0; dc <= r; ++dc) {
        for (int dr = -r; dr <= r; ++dr) {
          if (dc == 0 && dr <= 0) continue;  // canonical direction only
          const int rr = row + dr, cc = col + dc;
          if (rr < 0 || rr >= m || cc < 0 || cc >= n) continue;
          edges.emplace_back(s, grid_index(grid, rr, cc));
        }
      }
    }
  }
  SiteGraph graph(m * n, edges);

  ValidSetup setup;
  setup.order.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(n));
  for (int col = 0; col < n; ++col) {
    for (int row = 0; row < m; ++row) {
      const int s = grid_index(grid, row, col);
      setup.order.push_back(s);
      SiteSet base;
      // Earlier columns within the radius band, then the same column above.
      for (int cc = std::max(col - r, 0); cc < col; ++cc)
        for (int rr = std::max(row - r, 0); rr <= std::min(row + r, m - 1); ++rr)
          base.push_back(grid_index(grid, rr, cc));
      for (int rr = std::max(row - r, 0); rr < row; ++rr)
        base.push_back(grid_index(grid, rr, col));
      std::sort(base.begin(), base.end());
      for (int t : base) setup.cov_pairs.emplace_back(std::min(s, t), std::max(s, t));
      setup.base_sets.push_back(std::move(base));
    }
  }
  std::sort(setup.cov_pairs.begin(), setup.cov_pairs.end());
  setup.cov_pairs.erase(std::unique(setup.cov_pairs.begin(), setup.cov_pairs.end()),
                        setup.cov_pairs.end());
  return GridSetup{std::move(graph), std::move(setup)};
}

}  // namespace knw
