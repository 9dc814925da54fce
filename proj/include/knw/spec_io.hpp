#ifndef KNW_SPEC_IO_HPP
#define KNW_SPEC_IO_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "knw/graph.hpp"
#include "knw/kernel.hpp"
#include "knw/sampler.hpp"

namespace knw {

// A parsed spec file: the field itself plus layout and simulation directives.
struct SpecFile {
  FieldSpec field;
  std::optional<GridSpec> grid;  // present when the graph came from "grid"
  std::vector<int> order_hint;   // optional explicit simulation order
  SiteSet known_sites;           // optional known region
  Configuration known_values;    // state indices aligned with known_sites
  int version = 1;

  // Setup derived from the layout: grid order for grids (unless overridden),
  // default growth otherwise.
  ValidSetup setup() const;
  // Full-length configuration carrying the known values at known sites, -1
  // elsewhere.
  Configuration known_config() const;
};

SpecFile parse_spec(const nlohmann::json& j);
SpecFile load_spec(const std::string& path);
nlohmann::json spec_to_json(const SpecFile& spec);

// FNV-1a over the canonical serialization; stable across reload cycles.
std::string spec_hash(const SpecFile& spec);

}  // namespace knw

#endif  // KNW_SPEC_IO_HPP
