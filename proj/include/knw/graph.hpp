#ifndef KNW_GRAPH_HPP
#define KNW_GRAPH_HPP

#include <utility>
#include <vector>

namespace knw {

// Sorted ascending, no duplicates.
using SiteSet = std::vector<int>;

// Undirected, irreflexive neighborhood structure over sites 0..n-1.
class SiteGraph {
 public:
  SiteGraph(int n_sites, const std::vector<std::pair<int, int>>& edges);

  int n_sites() const { return static_cast<int>(adjacency_.size()); }
  const SiteSet& neighbors(int s) const;
  bool adjacent(int s, int t) const;
  // Canonical (lo, hi) pairs, sorted.
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  bool complete() const;
  SiteSet all_sites() const;

 private:
  std::vector<SiteSet> adjacency_;
  std::vector<std::pair<int, int>> edges_;
};

// Union of the members' neighborhoods minus the set itself; the empty set maps
// to all sites.
SiteSet neighborhood_of_set(const SiteGraph& graph, const SiteSet& sites);

// Sets with at most one site are connected.
bool is_connected(const SiteGraph& graph, const SiteSet& sites);

// Induced connected components, each sorted, ordered by smallest member.
std::vector<SiteSet> connected_components(const SiteGraph& graph, const SiteSet& sites);

// Picking rule when a site's eligible neighborhood splits into several
// components. Both prefer the largest component; they differ in tie-breaks.
enum class ComponentPolicy {
  // Ties favor the component holding the most recently ordered site (known
  // sites rank older than every ordered site), then the smallest member.
  prefer_recent,
  // Ties favor the component with the smallest member.
  prefer_low_index,
};

struct ValidSetup {
  std::vector<int> order;                     // simulation order over the unknown region
  std::vector<SiteSet> base_sets;             // aligned with order
  SiteSet known_sites;                        // complement of the unknown region
  std::vector<std::pair<int, int>> cov_pairs;  // canonical (lo, hi), sorted, deduped
};

// Orders `unknown` so each site neighbors the known-plus-ordered region and
// attaches one connected component of that region's intersection with its
// neighborhood as the base set. Without a hint the order grows from the
// smallest-index eligible site, appending the smallest-index eligible site at
// each step.
ValidSetup build_valid_setup(const SiteGraph& graph, const SiteSet& unknown,
                             const std::vector<int>& order_hint = {},
                             ComponentPolicy policy = ComponentPolicy::prefer_recent);

struct GridSpec {
  int rows = 0;   // M
  int cols = 0;   // N
  int radius = 1; // neighborhood reach under the square distance
};

// Column-major site index of cell (row, col), 0-based.
int grid_index(const GridSpec& grid, int row, int col);

struct GridSetup {
  SiteGraph graph;
  ValidSetup setup;
};

// Neighborhoods from the square distance max(|dr|,|dc|) <= radius, simulation
// order column-major. Each base set is the single connected component of the
// earlier-ordered neighbors: the radius-band of earlier columns plus the
// same-column cells directly above.
GridSetup grid_graph(const GridSpec& grid);

}  // namespace knw

#endif  // KNW_GRAPH_HPP
