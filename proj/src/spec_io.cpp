#include "knw/spec_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>

#include "knw/errors.hpp"

namespace knw {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key, const char* where) {
  const auto it = j.find(key);
  if (it == j.end())
    throw SpecError(std::string(where) + " is missing required key \"" + key + "\"");
  return *it;
}

std::vector<double> number_array(const json& j, const char* where) {
  if (!j.is_array()) throw SpecError(std::string(where) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw SpecError(std::string(where) + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Pmf parse_pmf(const json& j, const std::string& where) {
  if (!j.is_object()) throw SpecError(where + " must be an object with states and probs");
  return Pmf(number_array(require(j, "states", where.c_str()), (where + ".states").c_str()),
             number_array(require(j, "probs", where.c_str()), (where + ".probs").c_str()));
}

json pmf_to_json(const Pmf& pmf) {
  return json{{"states", pmf.states()}, {"probs", pmf.probs()}};
}

int state_index(const Pmf& pi, double value, const std::string& where) {
  int best = -1;
  double best_gap = 1e-9;
  for (std::size_t u = 0; u < pi.size(); ++u) {
    const double gap = std::abs(pi.state(u) - value);
    if (gap <= best_gap) {
      best = static_cast<int>(u);
      best_gap = gap;
    }
  }
  if (best < 0)
    throw SpecError(where + ": value " + std::to_string(value) + " is not a state of the site");
  return best;
}

}  // namespace

SpecFile parse_spec(const json& j) {
  if (!j.is_object()) throw SpecError("spec root must be an object");

  const json& graph_j = require(j, "graph", "spec");
  std::optional<GridSpec> grid;
  std::optional<SiteGraph> graph;
  std::optional<ValidSetup> grid_setup;
  if (graph_j.contains("grid")) {
    const json& g = graph_j["grid"];
    GridSpec spec;
    spec.rows = require(g, "M", "graph.grid").get<int>();
    spec.cols = require(g, "N", "graph.grid").get<int>();
    spec.radius = g.value("radius", 1);
    if (spec.rows < 1 || spec.cols < 1 || spec.radius < 1)
      throw SpecError("graph.grid needs M >= 1, N >= 1, radius >= 1");
    GridSetup built = grid_graph(spec);
    grid = spec;
    graph = std::move(built.graph);
    grid_setup = std::move(built.setup);
  } else if (graph_j.contains("n_sites")) {
    const int n = graph_j["n_sites"].get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : require(graph_j, "edges", "graph")) {
      if (!e.is_array() || e.size() != 2)
        throw SpecError("graph.edges entries must be [a, b] pairs");
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    graph = SiteGraph(n, edges);
  } else {
    throw SpecError("graph needs either \"grid\" or \"n_sites\" with \"edges\"");
  }
  const int n = graph->n_sites();

  const std::string variant_str = j.value("variant", std::string("general"));
  const std::optional<Variant> variant = variant_from_name(variant_str);
  if (!variant) throw SpecError("unknown variant \"" + variant_str + "\"");

  const bool wants_tilde = *variant == Variant::general ||
                           *variant == Variant::equal_tilde_hat ||
                           *variant == Variant::permutation_safe;
  const bool wants_hat = *variant == Variant::general;

  const json& sites_j = require(j, "sites", "spec");
  if (!sites_j.is_array() || static_cast<int>(sites_j.size()) != n)
    throw SpecError("sites must be an array with one entry per site");
  std::vector<Pmf> pi, tilde, hat;
  for (int s = 0; s < n; ++s) {
    const json& site = sites_j[static_cast<std::size_t>(s)];
    const std::string where = "sites[" + std::to_string(s) + "]";
    pi.push_back(parse_pmf(require(site, "pi", where.c_str()), where + ".pi"));
    if (wants_tilde)
      tilde.push_back(parse_pmf(require(site, "tilde", where.c_str()), where + ".tilde"));
    else if (site.contains("tilde"))
      throw SpecError(where + ".tilde is derived by the " + variant_str +
                      " variant and must be omitted");
    if (wants_hat)
      hat.push_back(parse_pmf(require(site, "hat", where.c_str()), where + ".hat"));
    else if (site.contains("hat"))
      throw SpecError(where + ".hat is derived by the " + variant_str +
                      " variant and must be omitted");
  }

  std::map<std::pair<int, int>, double> beta;
  if (j.contains("beta")) {
    for (const auto& b : j["beta"]) {
      const int s = require(b, "s", "beta entry").get<int>();
      const int t = require(b, "t", "beta entry").get<int>();
      const double value = require(b, "value", "beta entry").get<double>();
      const auto key = std::minmax(s, t);
      if (!beta.emplace(std::make_pair(key.first, key.second), value).second)
        throw SpecError("duplicate beta entry for pair (" + std::to_string(key.first) + ", " +
                        std::to_string(key.second) + ")");
    }
  }

  FieldSpec field = [&]() -> FieldSpec {
    switch (*variant) {
      case Variant::general:
        return make_general(*graph, std::move(pi), std::move(tilde), std::move(hat), beta);
      case Variant::equal_tilde_hat:
        return make_equal_tilde_hat(*graph, std::move(pi), std::move(tilde), beta);
      case Variant::all_equal:
        return make_all_equal(*graph, std::move(pi), beta);
      case Variant::uniform:
        return make_uniform(*graph, std::move(pi), beta);
      case Variant::uniform_hat:
        return make_uniform_hat(*graph, std::move(pi), beta);
      case Variant::permutation_safe:
        return make_permutation_safe(*graph, std::move(pi), std::move(tilde), beta);
      case Variant::shared_modifiers:
        return make_shared_modifiers(
            *graph, std::move(pi), parse_pmf(require(j, "tilde", "spec"), "tilde"),
            parse_pmf(require(j, "hat", "spec"), "hat"), beta);
      case Variant::captcha:
        return make_captcha(*graph, std::move(pi), beta);
    }
    throw SpecError("unknown variant");
  }();

  SpecFile file{std::move(field), {}, {}, {}, {}, 1};
  file.grid = grid;
  file.version = j.value("version", 1);
  if (file.version != 1)
    throw SpecError("unsupported version " + std::to_string(file.version));

  if (j.contains("order")) {
    for (const auto& v : j["order"]) file.order_hint.push_back(v.get<int>());
  }

  if (j.contains("known")) {
    const json& known = j["known"];
    const json& sites = require(known, "sites", "known");
    const json& values = require(known, "values", "known");
    if (!sites.is_array() || !values.is_array() || sites.size() != values.size())
      throw SpecError("known.sites and known.values must be arrays of equal length");
    std::vector<std::pair<int, double>> entries;
    for (std::size_t k = 0; k < sites.size(); ++k)
      entries.emplace_back(sites[k].get<int>(), values[k].get<double>());
    std::sort(entries.begin(), entries.end());
    for (const auto& [site, value] : entries) {
      if (site < 0 || site >= n)
        throw SpecError("known site " + std::to_string(site) + " is out of range");
      if (!file.known_sites.empty() && file.known_sites.back() == site)
        throw SpecError("known site " + std::to_string(site) + " appears twice");
      file.known_sites.push_back(site);
      file.known_values.push_back(state_index(file.field.pi[static_cast<std::size_t>(site)],
                                              value, "known value of site " + std::to_string(site)));
    }
  }

  // Surface layout problems at parse time rather than first use.
  if (!file.order_hint.empty() || !file.known_sites.empty()) file.setup();
  return file;
}

SpecFile load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SpecError("cannot parse " + path + ": " + e.what());
  }
  return parse_spec(j);
}

json spec_to_json(const SpecFile& spec) {
  json j;
  j["version"] = spec.version;
  j["variant"] = variant_name(spec.field.variant);
  if (spec.grid) {
    j["graph"]["grid"] = {{"M", spec.grid->rows}, {"N", spec.grid->cols},
                          {"radius", spec.grid->radius}};
  } else {
    j["graph"]["n_sites"] = spec.field.n_sites();
    json edges = json::array();
    for (const auto& [a, b] : spec.field.graph.edges()) edges.push_back({a, b});
    j["graph"]["edges"] = std::move(edges);
  }

  const bool wants_tilde = spec.field.variant == Variant::general ||
                           spec.field.variant == Variant::equal_tilde_hat ||
                           spec.field.variant == Variant::permutation_safe;
  const bool wants_hat = spec.field.variant == Variant::general;
  json sites = json::array();
  for (int s = 0; s < spec.field.n_sites(); ++s) {
    json site;
    site["pi"] = pmf_to_json(spec.field.pi[static_cast<std::size_t>(s)]);
    if (wants_tilde) site["tilde"] = pmf_to_json(spec.field.tilde[static_cast<std::size_t>(s)]);
    if (wants_hat) site["hat"] = pmf_to_json(spec.field.hat[static_cast<std::size_t>(s)]);
    sites.push_back(std::move(site));
  }
  j["sites"] = std::move(sites);
  if (spec.field.variant == Variant::shared_modifiers) {
    j["tilde"] = pmf_to_json(spec.field.tilde[0]);
    j["hat"] = pmf_to_json(spec.field.hat[0]);
  }

  json beta = json::array();
  for (const auto& [key, value] : spec.field.beta)
    beta.push_back({{"s", key.first}, {"t", key.second}, {"value", value}});
  j["beta"] = std::move(beta);

  if (!spec.order_hint.empty()) j["order"] = spec.order_hint;
  if (!spec.known_sites.empty()) {
    json values = json::array();
    for (std::size_t k = 0; k < spec.known_sites.size(); ++k) {
      const int site = spec.known_sites[k];
      values.push_back(spec.field.pi[static_cast<std::size_t>(site)].state(
          static_cast<std::size_t>(spec.known_values[k])));
    }
    j["known"] = {{"sites", spec.known_sites}, {"values", std::move(values)}};
  }
  return j;
}

std::string spec_hash(const SpecFile& spec) {
  const std::string canonical = spec_to_json(spec).dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

ValidSetup SpecFile::setup() const {
  SiteSet unknown;
  for (int s = 0; s < field.n_sites(); ++s)
    if (!std::binary_search(known_sites.begin(), known_sites.end(), s)) unknown.push_back(s);
  if (grid && order_hint.empty() && known_sites.empty()) return grid_graph(*grid).setup;
  return build_valid_setup(field.graph, unknown, order_hint);
}

Configuration SpecFile::known_config() const {
  Configuration config(static_cast<std::size_t>(field.n_sites()), -1);
  for (std::size_t k = 0; k < known_sites.size(); ++k)
    config[static_cast<std::size_t>(known_sites[k])] = known_values[k];
  return config;
}

}  // namespace knw
