#include <doctest.h>

#include <map>
#include <string>

#include "helpers.hpp"
#include "knw/errors.hpp"
#include "knw/kernel.hpp"

using namespace knw;
using knwtest::coin;
using knwtest::uniform_coin;

namespace {

SiteGraph k2() { return SiteGraph(2, {{0, 1}}); }
SiteGraph k3() { return SiteGraph(3, {{0, 1}, {0, 2}, {1, 2}}); }

}  // namespace

TEST_CASE("variant names round-trip") {
  for (Variant v : {Variant::general, Variant::equal_tilde_hat, Variant::all_equal,
                    Variant::uniform, Variant::uniform_hat, Variant::permutation_safe,
                    Variant::shared_modifiers, Variant::captcha}) {
    REQUIRE(variant_from_name(variant_name(v)).has_value());
    CHECK(*variant_from_name(variant_name(v)) == v);
  }
  CHECK_FALSE(variant_from_name("bogus").has_value());
}

TEST_CASE("factories enforce their constraints") {
  std::map<std::pair<int, int>, double> none;
  CHECK_THROWS_AS(make_all_equal(k2(), {coin(0.5)}, none), VariantConstraintViolation);
  CHECK_THROWS_AS(make_all_equal(k2(), {Pmf({-1.0, 1.0}, {0.0, 1.0}), coin(0.5)}, none),
                  VariantConstraintViolation);
  CHECK_THROWS_AS(
      make_general(k2(), {coin(0.5), coin(0.5)},
                   {Pmf::uniform({0.0, 1.0}), uniform_coin()},
                   {coin(0.5), coin(0.5)}, none),
      VariantConstraintViolation);
  CHECK_THROWS_AS(make_equal_tilde_hat(k2(), {coin(0.5), coin(0.5)},
                                       {Pmf({-1.0, 1.0}, {1.0, 0.0}), uniform_coin()}, none),
                  DegenerateTilde);
  CHECK_THROWS_AS(make_uniform(k2(), {coin(0.5), coin(0.5)}, {{{0, 0}, 0.1}}),
                  VariantConstraintViolation);
  CHECK_THROWS_AS(make_uniform(k3(), {coin(0.5), coin(0.5), coin(0.5)}, {{{0, 3}, 0.1}}),
                  VariantConstraintViolation);
  CHECK_THROWS_AS(
      make_captcha(k2(), {coin(0.5), Pmf::uniform({0.0, 1.0})}, none),
      VariantConstraintViolation);
  CHECK_THROWS_AS(
      make_shared_modifiers(k2(), {coin(0.5), coin(0.5)}, Pmf::uniform({0.0, 1.0}),
                            uniform_coin(), none),
      VariantConstraintViolation);
}

TEST_CASE("covariance lookup is symmetric with zero default") {
  const FieldSpec spec = make_uniform(k3(), {coin(0.5), coin(0.5), coin(0.5)}, {{{0, 1}, 0.2}});
  CHECK(spec.beta_at(0, 1) == 0.2);
  CHECK(spec.beta_at(1, 0) == 0.2);
  CHECK(spec.beta_at(0, 2) == 0.0);
}

TEST_CASE("hat equals pi exactly for the variants that pin it") {
  CHECK(make_all_equal(k2(), {coin(0.3), coin(0.7)}, {}).hat_equals_pi());
  CHECK(make_permutation_safe(k2(), {coin(0.3), coin(0.7)},
                              {uniform_coin(), uniform_coin()}, {})
            .hat_equals_pi());
  CHECK_FALSE(make_uniform(k2(), {coin(0.3), coin(0.7)}, {}).hat_equals_pi());
}

TEST_CASE("empty-base rows reproduce the marginal") {
  const FieldSpec spec = make_uniform(k2(), {coin(0.3), coin(0.6)}, {{{0, 1}, 0.1}});
  const ConditionalRow row = conditional_row(spec, 0, {}, {-1, -1}, 1.0);
  CHECK(row.probs == spec.pi[0].probs());
}

TEST_CASE("singleton uniform-coin row") {
  const FieldSpec spec =
      make_uniform(k2(), {coin(0.5), coin(0.5)}, {{{0, 1}, 0.3}});
  // row of site 1 given site 0 = +1: 1/2 + beta * x_s * x_t / 2
  const ConditionalRow row = conditional_row(spec, 1, {0}, {1, -1}, 0.5);
  CHECK(row.probs[1] == doctest::Approx(0.65).epsilon(1e-15));
  CHECK(row.probs[0] == doctest::Approx(0.35).epsilon(1e-15));

  const ConditionalRow flipped = conditional_row(spec, 1, {0}, {0, -1}, 0.5);
  CHECK(flipped.probs[1] == doctest::Approx(0.35).epsilon(1e-15));
}

TEST_CASE("rows sum to one at every base configuration") {
  Rng rng(2024, 0);
  const FieldSpec spec = knwtest::random_feasible_bench_field(rng, true);
  const ValidSetup setup = build_valid_setup(spec.graph, spec.graph.all_sites());
  std::vector<int> config(5, -1);
  for (std::size_t i = 0; i < setup.order.size(); ++i) {
    const SiteSet& base = setup.base_sets[i];
    std::vector<int> digits(base.size(), 0);
    while (true) {
      for (std::size_t k = 0; k < base.size(); ++k)
        config[static_cast<std::size_t>(base[k])] = digits[k];
      // any positive stand-in works: the sum over states kills the correction
      const auto probs = conditional_row_raw(spec, setup.order[i], base, config, 0.37);
      double sum = 0.0;
      for (double p : probs) sum += p;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      std::size_t k = 0;
      while (k < base.size() &&
             ++digits[k] == static_cast<int>(spec.pi[static_cast<std::size_t>(base[k])].size()))
        digits[k++] = 0;
      if (k == base.size()) break;
    }
    for (int t : base) config[static_cast<std::size_t>(t)] = -1;
  }
}

TEST_CASE("special-variant kernels match their general counterparts") {
  const std::vector<double> states{-1.0, 1.0};
  const std::vector<Pmf> pi{coin(0.35), coin(0.55), coin(0.7)};
  const std::vector<Pmf> tilde{coin(0.4), coin(0.5), coin(0.6)};
  const std::vector<Pmf> unif(3, uniform_coin());
  const std::map<std::pair<int, int>, double> beta{{{0, 1}, 0.05}, {{0, 2}, -0.04}, {{1, 2}, 0.03}};

  struct Pairing {
    FieldSpec special;
    FieldSpec general;
  };
  const std::vector<Pairing> pairings{
      {make_equal_tilde_hat(k3(), pi, tilde, beta), make_general(k3(), pi, tilde, tilde, beta)},
      {make_all_equal(k3(), pi, beta), make_general(k3(), pi, pi, pi, beta)},
      {make_uniform(k3(), pi, beta), make_general(k3(), pi, unif, unif, beta)},
      {make_uniform_hat(k3(), pi, beta), make_general(k3(), pi, pi, unif, beta)},
      {make_permutation_safe(k3(), pi, tilde, beta), make_general(k3(), pi, tilde, pi, beta)},
      {make_shared_modifiers(k3(), pi, tilde[1], tilde[2], beta),
       make_general(k3(), pi, {tilde[1], tilde[1], tilde[1]}, {tilde[2], tilde[2], tilde[2]}, beta)},
      {make_captcha(k3(), pi, beta), make_general(k3(), pi, unif, unif, beta)},
  };

  const std::vector<SiteSet> bases{{0}, {1}, {0, 1}, {0, 2}};
  for (const Pairing& pairing : pairings) {
    for (const SiteSet& base : bases) {
      const int site = base == SiteSet{0, 2} ? 1 : 2;
      std::vector<int> config(3, -1);
      std::vector<int> digits(base.size(), 0);
      while (true) {
        for (std::size_t k = 0; k < base.size(); ++k)
          config[static_cast<std::size_t>(base[k])] = digits[k];
        const auto a = conditional_row_raw(pairing.special, site, base, config, 0.4);
        const auto b = conditional_row_raw(pairing.general, site, base, config, 0.4);
        REQUIRE(a.size() == b.size());
        for (std::size_t u = 0; u < a.size(); ++u)
          CHECK(a[u] == doctest::Approx(b[u]).epsilon(1e-15));
        std::size_t k = 0;
        while (k < base.size() && ++digits[k] == 2) digits[k++] = 0;
        if (k == base.size()) break;
      }
    }
  }
}

TEST_CASE("zero conditioning events are rejected") {
  const FieldSpec spec = make_uniform(k2(), {coin(0.5), coin(0.5)}, {{{0, 1}, 0.3}});
  CHECK_THROWS_AS(conditional_row(spec, 1, {0}, {1, -1}, 0.0), ZeroBaseMarginal);
  CHECK_THROWS_AS(conditional_row(spec, 1, {0}, {1, -1}, -0.2), ZeroBaseMarginal);
}

TEST_CASE("infeasible rows throw with full context") {
  const FieldSpec spec = make_uniform(k2(), {coin(0.5), coin(0.5)}, {{{0, 1}, 1.5}});
  const auto raw = conditional_row_raw(spec, 1, {0}, {1, -1}, 0.5);
  CHECK(raw[1] == doctest::Approx(1.25).epsilon(1e-15));
  try {
    conditional_row(spec, 1, {0}, {1, -1}, 0.5);
    FAIL("expected RegularityViolation");
  } catch (const RegularityViolation& e) {
    CHECK(e.site == 1);
    CHECK(e.base_sites == std::vector<int>{0});
    CHECK(e.base_states == std::vector<int>{1});
    CHECK((e.value > 1.0 || e.value < 0.0));
  }
}

TEST_CASE("hairline excursions clamp instead of throwing") {
  const FieldSpec spec = make_uniform(k2(), {coin(0.5), coin(0.5)}, {{{0, 1}, 1.0 + 1e-13}});
  const ConditionalRow row = conditional_row(spec, 1, {0}, {1, -1}, 0.5);
  CHECK(row.probs[1] == 1.0);
  CHECK(row.probs[0] == 0.0);
}
