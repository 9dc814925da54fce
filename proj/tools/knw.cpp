#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "knw/consistency.hpp"
#include "knw/errors.hpp"
#include "knw/feasibility.hpp"
#include "knw/graph.hpp"
#include "knw/kernel.hpp"
#include "knw/oracle.hpp"
#include "knw/rng.hpp"
#include "knw/sampler.hpp"
#include "knw/spec_io.hpp"

using nlohmann::json;

namespace {

using namespace knw;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int resolve_threads(int flag) {
  if (const char* env = std::getenv("KNW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  if (flag > 0) return flag;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw SpecError("cannot open " + path + " for writing");
  return out;
}

void emit_report(const json& report, const std::string& out_path) {
  if (out_path.empty())
    std::cout << report.dump(2) << '\n';
  else
    open_out(out_path) << report.dump(2) << '\n';
}

json permutation_json(const FieldSpec& field) {
  const PermutationReport perm = check_permutation(clique_from_field(field, field.graph.all_sites()));
  return {{"permutable", perm.permutable},
          {"residual", perm.residual},
          {"hat_equals_pi", perm.hat_equals_pi},
          {"cme_holds", perm.cme_holds},
          {"anchor_found", perm.anchor_found},
          {"family_parameter", perm.family_parameter}};
}

int run_validate(const std::string& spec_path, const std::string& out_path, bool spot,
                 std::uint64_t seed) {
  const SpecFile file = load_spec(spec_path);
  const FeasibilityReport report = validate_spec(
      file.field, file.setup(), spot ? ValidationMode::spot : ValidationMode::exhaustive, seed);

  json bounds = json::array();
  for (const PairBound& b : report.pair_bounds)
    bounds.push_back({{"s", b.s},
                      {"t", b.t},
                      {"beta", b.beta},
                      {"lo", b.interval.lo},
                      {"hi", b.interval.hi},
                      {"exact", b.interval.exact},
                      {"within", b.within}});
  json issues = json::array();
  for (const RegularityIssue& i : report.issues)
    issues.push_back({{"site", i.site},
                      {"base", i.base},
                      {"base_states", i.base_states},
                      {"state", i.state},
                      {"value", i.value}});
  json doc{{"pass", report.pass},
           {"max_excursion", report.max_excursion},
           {"rows_checked", report.rows_checked},
           {"skipped_zero_marginals", report.skipped_zero_marginals},
           {"pair_bounds", std::move(bounds)},
           {"issues", std::move(issues)}};
  if (file.field.graph.complete() && file.known_sites.empty()) {
    try {
      doc["permutation"] = permutation_json(file.field);
    } catch (const Error& e) {
      doc["permutation"] = {{"error", e.what()}};
    }
  }
  emit_report(doc, out_path);
  return report.pass ? 0 : 2;
}

int run_sample(const std::string& spec_path, const std::string& out_path, std::uint64_t seed,
               int replicates, const std::string& mode, int threads_flag) {
  const auto t0 = std::chrono::steady_clock::now();
  const SpecFile file = load_spec(spec_path);
  const int n = file.field.n_sites();
  const int threads = resolve_threads(threads_flag);

  std::vector<Configuration> rows;
  if (mode == "markov") {
    if (!file.known_sites.empty()) throw Error("markov mode does not support known regions");
    std::vector<int> order = file.order_hint;
    if (order.empty()) {
      order.resize(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), 0);
    }
    MarginalCache cache(MarginalCache::Mode::full_neighborhood);
    rows.reserve(static_cast<std::size_t>(replicates));
    for (int r = 0; r < replicates; ++r) {
      Rng rng(seed, static_cast<std::uint64_t>(r));
      rows.push_back(sample_markov(file.field, order, rng, cache));
    }
  } else if (!file.known_sites.empty()) {
    if (replicates != 1)
      throw Error("known-region specs reconstruct one configuration per run; use -n 1");
    rows.push_back(inpaint(file.field, file.setup(), file.known_config(), seed));
  } else {
    rows = sample_one_pass(file.field, file.setup(), seed, replicates, threads).replicates;
  }

  {
    std::ofstream out = open_out(out_path);
    for (int s = 0; s < n; ++s) out << (s ? "," : "") << 's' << s;
    out << '\n';
    for (const Configuration& row : rows) {
      for (int s = 0; s < n; ++s) {
        const std::size_t u = static_cast<std::size_t>(row[static_cast<std::size_t>(s)]);
        out << (s ? "," : "") << g17(file.field.pi[static_cast<std::size_t>(s)].state(u));
      }
      out << '\n';
    }
  }

  std::vector<double> empirical_mean(static_cast<std::size_t>(n), 0.0);
  for (const Configuration& row : rows)
    for (int s = 0; s < n; ++s) {
      const std::size_t u = static_cast<std::size_t>(row[static_cast<std::size_t>(s)]);
      empirical_mean[static_cast<std::size_t>(s)] +=
          file.field.pi[static_cast<std::size_t>(s)].state(u);
    }
  for (double& m : empirical_mean) m /= static_cast<double>(rows.size());

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const json meta{{"command", "sample"},
                  {"mode", mode},
                  {"seed", seed},
                  {"replicates", replicates},
                  {"threads", threads},
                  {"rng", Rng::algorithm},
                  {"spec_hash", spec_hash(file)},
                  {"sites", n},
                  {"variant", variant_name(file.field.variant)},
                  {"empirical_mean", empirical_mean},
                  {"runtime_seconds", secs}};
  open_out(out_path + ".meta.json") << meta.dump(2) << '\n';
  return 0;
}

int run_joint(const std::string& spec_path, const std::string& out_path) {
  const SpecFile file = load_spec(spec_path);
  const ValidSetup setup = file.setup();
  const JointTable table = file.known_sites.empty()
                               ? enumerate_joint(file.field, setup)
                               : enumerate_joint(file.field, setup, file.known_config());

  std::ofstream out = open_out(out_path);
  for (int site : table.sites) out << 's' << site << ',';
  out << "probability\n";
  for (std::size_t code = 0; code < table.size(); ++code) {
    const std::vector<int> digits = table.digits(code);
    for (std::size_t a = 0; a < digits.size(); ++a)
      out << g17(table.states[a][static_cast<std::size_t>(digits[a])]) << ',';
    out << g17(table.p[code]) << '\n';
  }
  return 0;
}

int run_image(const std::string& spec_path, const std::string& out_path, std::uint64_t seed) {
  const SpecFile file = load_spec(spec_path);
  if (!file.grid) throw NotAGrid("spec has no grid layout");
  const GridSpec grid = *file.grid;

  const Configuration config =
      file.known_sites.empty()
          ? sample_one_pass(file.field, file.setup(), seed, 1).replicates.front()
          : inpaint(file.field, file.setup(), file.known_config(), seed);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Pmf& pi : file.field.pi)
    for (double x : pi.states()) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }

  std::ofstream out = open_out(out_path, std::ios::binary);
  out << "P5\n" << grid.cols << ' ' << grid.rows << "\n255\n";
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c) {
      const int site = grid_index(grid, r, c);
      const std::size_t u = static_cast<std::size_t>(config[static_cast<std::size_t>(site)]);
      const double x = file.field.pi[static_cast<std::size_t>(site)].state(u);
      const double unit = hi > lo ? (x - lo) / (hi - lo) : 0.0;
      out.put(static_cast<char>(std::lround(255.0 * unit)));
    }
  return 0;
}

int run_verify(const std::string& spec_path, const std::string& out_path, const std::string& suite,
               std::uint64_t seed) {
  const SpecFile file = load_spec(spec_path);
  const FieldSpec& field = file.field;
  // suites target the unconditional law, so known regions are folded back in
  const ValidSetup setup = file.known_sites.empty()
                               ? file.setup()
                               : build_valid_setup(field.graph, field.graph.all_sites());

  const bool want_all = suite == "all";
  json suites;
  bool pass = true;

  JointTable law;
  bool law_ready = false;
  const auto one_pass_law = [&]() -> const JointTable& {
    if (!law_ready) {
      law = enumerate_joint(field, setup);
      law_ready = true;
    }
    return law;
  };

  if (want_all || suite == "marginals") {
    double worst = 0.0;
    for (int s = 0; s < field.n_sites(); ++s) {
      const std::vector<double> got = site_marginal(one_pass_law(), s);
      const Pmf& pi = field.pi[static_cast<std::size_t>(s)];
      for (std::size_t u = 0; u < got.size(); ++u)
        worst = std::max(worst, std::abs(got[u] - pi.prob(u)));
    }
    const bool ok = worst <= 1e-10;
    suites["marginals"] = {
        {"skipped", false}, {"pass", ok}, {"max_residual", worst}, {"tolerance", 1e-10}};
    pass = pass && ok;
  }

  if (want_all || suite == "covariances") {
    double worst = 0.0;
    for (const auto& [s, t] : setup.cov_pairs)
      worst = std::max(worst, std::abs(covariance_of(one_pass_law(), s, t) - field.beta_at(s, t)));
    const bool ok = worst <= 1e-10;
    suites["covariances"] = {{"skipped", false},
                             {"pass", ok},
                             {"pairs", setup.cov_pairs.size()},
                             {"max_residual", worst},
                             {"tolerance", 1e-10}};
    pass = pass && ok;
  }

  if (want_all || suite == "markov") {
    if (!field.hat_equals_pi()) {
      suites["markov"] = {{"skipped", true}, {"reason", "mixing pmfs differ from the marginals"}};
    } else {
      std::vector<std::vector<int>> orders{setup.order};
      Rng rng(seed, 0);
      for (int k = 0; k < 2; ++k) {
        std::vector<int> shuffled = setup.order;
        rng.shuffle(shuffled);
        orders.push_back(std::move(shuffled));
      }
      std::vector<JointTable> tables;
      tables.reserve(orders.size());
      for (const auto& order : orders) tables.push_back(enumerate_markov(field, order));
      double order_diff = 0.0;
      for (std::size_t i = 0; i < tables.size(); ++i)
        for (std::size_t j = i + 1; j < tables.size(); ++j)
          order_diff = std::max(order_diff, max_abs_diff(tables[i], tables[j]));
      const MarkovCheck check = markov_residual(tables.front(), field.graph);
      const bool ok = check.residual <= 1e-10 && order_diff <= 1e-12;
      suites["markov"] = {{"skipped", false},
                          {"pass", ok},
                          {"residual", check.residual},
                          {"order_difference", order_diff},
                          {"orders", orders.size()},
                          {"zero_mass_events", check.skipped}};
      pass = pass && ok;
    }
  }

  if (want_all || suite == "permutation") {
    if (!field.graph.complete()) {
      suites["permutation"] = {{"skipped", true}, {"reason", "sites are not pairwise adjacent"}};
    } else {
      json perm = permutation_json(field);
      const bool ok = perm["permutable"].get<bool>();
      perm["skipped"] = false;
      perm["pass"] = ok;
      suites["permutation"] = std::move(perm);
      pass = pass && ok;
    }
  }

  const json doc{{"pass", pass}, {"seed", seed}, {"suites", std::move(suites)}};
  emit_report(doc, out_path);
  return pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"one-pass correlated random fields: validate, sample, enumerate, render, verify"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_path;
  std::string mode = "one-pass";
  std::string suite = "all";
  std::uint64_t seed = 0;
  int replicates = 1;
  int threads = 0;
  bool spot = false;

  CLI::App* validate =
      app.add_subcommand("validate", "check every conditional probability against [0,1]");
  validate->add_option("spec", spec_path, "field spec (JSON)")->required();
  validate->add_option("--out", out_path, "write the JSON report here instead of stdout");
  validate->add_flag("--spot", spot, "spot-check up to 64 random base configurations per site");
  validate->add_option("--seed", seed, "seed for --spot draws");

  CLI::App* sample = app.add_subcommand("sample", "draw replicates and write them as CSV");
  sample->add_option("spec", spec_path, "field spec (JSON)")->required();
  sample->add_option("--out", out_path, "output CSV path")->required();
  sample->add_option("--seed", seed, "RNG seed");
  sample->add_option("-n,--replicates", replicates, "number of replicates")
      ->check(CLI::PositiveNumber);
  sample->add_option("--mode", mode, "one-pass | markov")
      ->check(CLI::IsMember({"one-pass", "markov"}));
  sample->add_option("--threads", threads, "worker threads (0 = all cores; KNW_THREADS overrides)");

  CLI::App* joint = app.add_subcommand("joint", "enumerate the exact joint law as CSV");
  joint->add_option("spec", spec_path, "field spec (JSON)")->required();
  joint->add_option("--out", out_path, "output CSV path")->required();

  CLI::App* image = app.add_subcommand("image", "sample a grid spec and render it as a PGM");
  image->add_option("spec", spec_path, "field spec (JSON)")->required();
  image->add_option("--out", out_path, "output PGM path")->required();
  image->add_option("--seed", seed, "RNG seed");

  CLI::App* verify = app.add_subcommand("verify", "run enumeration-backed verification suites");
  verify->add_option("spec", spec_path, "field spec (JSON)")->required();
  verify->add_option("--suite", suite, "marginals | covariances | markov | permutation | all")
      ->check(CLI::IsMember({"marginals", "covariances", "markov", "permutation", "all"}));
  verify->add_option("--seed", seed, "seed for randomized orders");
  verify->add_option("--out", out_path, "write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (validate->parsed()) return run_validate(spec_path, out_path, spot, seed);
    if (sample->parsed()) return run_sample(spec_path, out_path, seed, replicates, mode, threads);
    if (joint->parsed()) return run_joint(spec_path, out_path);
    if (image->parsed()) return run_image(spec_path, out_path, seed);
    return run_verify(spec_path, out_path, suite, seed);
  } catch (const ExplosionGuard& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
