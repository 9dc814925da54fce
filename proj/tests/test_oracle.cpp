#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "helpers.hpp"
#include "knw/consistency.hpp"
#include "knw/errors.hpp"
#include "knw/oracle.hpp"

using namespace knw;
using knwtest::coin;

namespace {

std::vector<std::vector<int>> all_orderings(int n) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<int>> result;
  do {
    result.push_back(order);
  } while (std::next_permutation(order.begin(), order.end()));
  return result;
}

}  // namespace

TEST_CASE("joint tables sum to one and code arithmetic round-trips") {
  Rng rng(31, 0);
  const FieldSpec spec = knwtest::random_feasible_bench_field(rng, true);
  const ValidSetup setup = build_valid_setup(spec.graph, spec.graph.all_sites());
  const JointTable table = enumerate_joint(spec, setup);

  CHECK(table.size() == 243);
  CHECK(table.total() == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t idx = 0; idx < table.size(); idx += 17)
    CHECK(table.code(table.digits(idx)) == idx);
  CHECK(table.axis_of(3) == 3);
  CHECK(table.axis_of(9) == -1);
}

TEST_CASE("enumerated marginals and covariances hit their targets") {
  for (const bool ternary : {false, true}) {
    Rng rng(ternary ? 32u : 33u, 0);
    const FieldSpec spec = knwtest::random_feasible_bench_field(rng, ternary);
    const ValidSetup setup = build_valid_setup(spec.graph, spec.graph.all_sites());
    const JointTable table = enumerate_joint(spec, setup);

    for (int s = 0; s < 5; ++s) {
      const std::vector<double> marginal = site_marginal(table, s);
      for (std::size_t u = 0; u < marginal.size(); ++u)
        CHECK(marginal[u] ==
              doctest::Approx(spec.pi[static_cast<std::size_t>(s)].prob(u)).epsilon(1e-10));
    }
    for (const auto& [s, t] : setup.cov_pairs)
      CHECK(covariance_of(table, s, t) == doctest::Approx(spec.beta_at(s, t)).epsilon(1e-10));
  }
}

TEST_CASE("pair-law moments on a hand-checked field") {
  const SiteGraph k2(2, {{0, 1}});
  const FieldSpec spec =
      make_uniform(k2, {knwtest::uniform_coin(), knwtest::uniform_coin()}, {{{0, 1}, 0.2}});
  const JointTable table = enumerate_joint(spec, build_valid_setup(k2, {0, 1}));

  // joint(x0, x1) = 1/4 + 0.05 * x0 * x1
  CHECK(table.p[table.code({1, 1})] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(table.p[table.code({0, 1})] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(covariance_of(table, 0, 1) == doctest::Approx(0.2).epsilon(1e-13));
  CHECK(covariance_of(table, 0, 0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(site_marginal(table, 1)[0] == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("known-region law is conditional on the known states") {
  const SiteGraph g = knwtest::bench_graph();
  const FieldSpec spec = make_all_equal(g, std::vector<Pmf>(5, coin(0.4)),
                                        {{{1, 2}, 0.05}, {{2, 4}, 0.05}});
  const ValidSetup setup = build_valid_setup(g, {2, 4});
  CHECK_THROWS_AS(enumerate_joint(spec, setup), Error);

  Configuration known(5, -1);
  known[0] = 1;
  known[1] = 0;
  known[3] = 1;
  const JointTable table = enumerate_joint(spec, setup, known);
  CHECK(table.sites == SiteSet{2, 4});
  CHECK(table.size() == 4);
  CHECK(table.total() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("enumeration guard trips on oversized state spaces") {
  std::vector<std::pair<int, int>> path;
  for (int s = 0; s + 1 < 21; ++s) path.emplace_back(s, s + 1);
  const SiteGraph g(21, path);
  const FieldSpec spec = make_all_equal(g, std::vector<Pmf>(21, coin(0.5)), {});
  CHECK_THROWS_AS(enumerate_joint(spec, build_valid_setup(g, g.all_sites())), ExplosionGuard);
}

TEST_CASE("markov law is order-invariant when covariances span one clique") {
  const SiteGraph g = knwtest::bench_graph();
  const FieldSpec spec = make_all_equal(
      g, std::vector<Pmf>(5, coin(0.5)), {{{1, 2}, 0.1}, {{1, 4}, 0.1}, {{2, 4}, 0.1}});

  const JointTable natural = enumerate_markov(spec, {0, 1, 2, 3, 4});
  CHECK(max_abs_diff(natural, enumerate_markov(spec, {4, 2, 0, 3, 1})) <= 1e-12);
  CHECK(max_abs_diff(natural, enumerate_markov(spec, {3, 4, 1, 0, 2})) <= 1e-12);

  const MarkovCheck check = markov_residual(natural, g);
  CHECK(check.residual <= 1e-10);
  CHECK(check.skipped == 0);
}

TEST_CASE("markov law depends on the order once cliques overlap") {
  const SiteGraph g = knwtest::bench_graph();
  // two covariance edges sharing site 1; the second order puts both
  // neighbors of 1 before it, which adds a cross term the chain lacks
  const FieldSpec path =
      make_all_equal(g, std::vector<Pmf>(5, coin(0.5)), {{{0, 1}, 0.15}, {{1, 2}, 0.15}});
  const JointTable a = enumerate_markov(path, {0, 1, 2, 3, 4});
  const JointTable b = enumerate_markov(path, {4, 0, 2, 1, 3});
  CHECK(max_abs_diff(a, b) > 1e-6);
  // a chain simulated along the chain is still Markov...
  CHECK(markov_residual(a, g).residual <= 1e-10);

  // ...but covariances on every edge of the non-chordal graph are not
  std::map<std::pair<int, int>, double> all;
  for (const auto& e : g.edges()) all[e] = 0.15;
  const FieldSpec full = make_all_equal(g, std::vector<Pmf>(5, coin(0.5)), all);
  CHECK(markov_residual(enumerate_markov(full, {0, 1, 2, 3, 4}), g).residual > 1e-4);
}

TEST_CASE("disjoint covariance pairs factor exactly") {
  const SiteGraph g = knwtest::bench_graph();
  const FieldSpec spec =
      make_all_equal(g, std::vector<Pmf>(5, coin(0.5)), {{{0, 1}, 0.15}, {{2, 3}, 0.15}});
  const JointTable a = enumerate_markov(spec, {0, 1, 2, 3, 4});
  const JointTable b = enumerate_markov(spec, {3, 2, 4, 1, 0});
  CHECK(max_abs_diff(a, b) <= 1e-12);
  CHECK(markov_residual(a, g).residual <= 1e-10);
}

TEST_CASE("markov enumeration validates like the sampler") {
  const SiteGraph g = knwtest::bench_graph();
  const FieldSpec bad = make_uniform(g, std::vector<Pmf>(5, coin(0.4)), {});
  CHECK_THROWS_AS(enumerate_markov(bad, {0, 1, 2, 3, 4}), HatPiMismatch);
  const FieldSpec good = make_all_equal(g, std::vector<Pmf>(5, coin(0.4)), {});
  CHECK_THROWS_AS(enumerate_markov(good, {0, 1, 2, 3}), InvalidOrdering);
}

TEST_CASE("permutation residual separates the invariant family") {
  const std::vector<std::vector<int>> orderings = all_orderings(4);

  // hat == pi and the symmetric one-parameter mixing family are invariant
  CHECK(permutation_residual(knwtest::four_clique_field(0.5, 0.5, 0.2), orderings) <= 1e-12);
  CHECK(permutation_residual(knwtest::four_clique_field(0.5, 0.55, 0.2), orderings) <= 1e-12);

  // perturbing one site's mixing pmf leaves the family
  FieldSpec off = knwtest::four_clique_field(0.5, 0.55, 0.2);
  off.hat[0] = coin(0.62);
  CHECK(permutation_residual(off, orderings) > 1e-6);
}

TEST_CASE("table comparison requires identical coverage") {
  const SiteGraph k2(2, {{0, 1}});
  const FieldSpec spec = make_all_equal(k2, {coin(0.5), coin(0.5)}, {});
  const JointTable table = enumerate_joint(spec, build_valid_setup(k2, {0, 1}));
  const JointTable partial = marginal_of(table, {0});
  CHECK_THROWS_AS(max_abs_diff(table, partial), Error);
  CHECK_THROWS_AS(marginal_of(table, {5}), Error);
}
