#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msmwc/expert_suites.hpp"

#include <cmath>
#include <stdexcept>

using namespace msmwc;

TEST_CASE("ceiling log2 on the values the grids use") {
  CHECK(ceil_log2(1.0) == 0);
  CHECK(ceil_log2(2.0) == 1);
  CHECK(ceil_log2(3.0) == 2);
  CHECK(ceil_log2(4.0) == 2);
  CHECK(ceil_log2(100.0) == 7);
  CHECK(ceil_log2(1024.0) == 10);
  CHECK_THROWS_AS(ceil_log2(0.0), std::invalid_argument);
}

TEST_CASE("dyadic pool covers every halved rate down to the horizon") {
  const Vec prior = Vec::Constant(3, 1.0 / 3.0);
  auto pool = build_kl(prior, 64);
  REQUIRE(pool->num_experts() == 6);  // ceil(log2(64))
  CHECK(pool->dim() == 3);
  for (int k = 0; k < 6; ++k) {
    CHECK(pool->eta(k) == doctest::Approx(1.0 / (32.0 * std::ldexp(1.0, k + 1))).epsilon(1e-15));
    CHECK(pool->label(k) == "kl/k=" + std::to_string(k + 1));
  }
  CHECK(pool->eta(0) == doctest::Approx(1.0 / 64.0));
  CHECK(pool->eta(5) == doctest::Approx(1.0 / 2048.0));

  // a zero-hint first round plays the prior
  const Vec play = pool->begin_round(Vec::Zero(3));
  for (int i = 0; i < 3; ++i) CHECK(play[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  pool->end_round(Vec::Zero(3));
}

TEST_CASE("multi-scale levels span the range interval per coordinate") {
  Vec ranges(2);
  ranges << 1.0, 4.0;
  const auto levels = multiscale_levels(ranges, 16);
  REQUIRE(levels == std::vector<int>{2, 3, 4, 5, 6});
  CHECK(multiscale_support(ranges, 2) == std::vector<int>{0});
  CHECK(multiscale_support(ranges, 3) == std::vector<int>{0});
  CHECK(multiscale_support(ranges, 4) == std::vector<int>{0, 1});
  CHECK(multiscale_support(ranges, 6) == std::vector<int>{0, 1});

  auto pool = build_multiscale(ranges, 16);
  REQUIRE(pool->num_experts() == 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(pool->eta(k) ==
          doctest::Approx(1.0 / (32.0 * std::ldexp(1.0, levels[static_cast<size_t>(k)])))
              .epsilon(1e-15));
    CHECK(pool->label(k) == "ms/k=" + std::to_string(levels[static_cast<size_t>(k)]));
  }

  // hints beyond a coordinate's range are clamped at ingestion
  Vec big(2);
  big << 0.5, 9.0;
  pool->begin_round(big);
  CHECK(pool->hint_clamp_count() == 1);
  Vec loss(2);
  loss << 0.5, 2.0;
  pool->end_round(loss);
}

TEST_CASE("level-restricted bases place no mass outside their support") {
  Vec ranges(2);
  ranges << 1.0, 4.0;
  auto pool = build_multiscale(ranges, 16);
  pool->begin_round(Vec::Zero(2));
  // slot 0 covers level 2 = coordinate 0 only
  CHECK(dynamic_cast<MsMwc&>(pool->base(0)).region().support[1] == 0);
  CHECK(dynamic_cast<MsMwc&>(pool->base(4)).region().support[1] == 1);
  pool->end_round(Vec::Zero(2));
}

TEST_CASE("switching pool floors both the aggregation and the bases") {
  const int d = 4;
  const long T = 100;
  auto pool = build_switching(d, T);
  REQUIRE(pool->num_experts() == 7);  // ceil(log2(100))
  for (int k = 0; k < 7; ++k)
    CHECK(pool->label(k) == "switch/k=" + std::to_string(k + 1));

  Vec skew = Vec::Zero(d);
  skew[0] = -1.0;
  skew[1] = 1.0;
  for (int t = 0; t < 30; ++t) {
    const Vec play = pool->begin_round(Vec::Zero(d));
    // base floors 1/(d*T) survive the aggregation, every coordinate keeps mass
    CHECK(play.minCoeff() >= 1.0 / (d * static_cast<double>(T)) - 1e-12);
    CHECK(pool->weights().minCoeff() >= 1.0 / static_cast<double>(T) - 1e-12);
    pool->end_round(skew);
  }
  const auto& base0 = dynamic_cast<MsMwc&>(pool->base(0));
  CHECK(base0.region().lower_bounds.minCoeff() ==
        doctest::Approx(1.0 / (d * static_cast<double>(T))));
}

TEST_CASE("unknown-range pool prunes rates as the range grows") {
  const Vec prior = Vec::Constant(2, 0.5);
  UnknownRangePool pool = build_unknown_range(1.0, 10, prior);
  REQUIRE(pool.master->num_experts() == 8);  // ceil(log2(2*10^2))
  CHECK(pool.master->eta(0) == doctest::Approx(1.0 / 64.0));
  CHECK(pool.master->label(7) == "ur/k=8");

  const auto count = [](const std::vector<char>& mask) {
    int n = 0;
    for (char c : mask) n += c != 0;
    return n;
  };
  CHECK(count(pool.active_rule(1.0)) == 8);  // every rate is safe at the base scale
  CHECK(count(pool.active_rule(2.0)) == 7);  // the fastest rate drops out
  CHECK(count(pool.active_rule(4.0)) == 6);
  // masks are usable directly as active sets
  pool.master->set_active(pool.active_rule(2.0));
  pool.master->begin_round(Vec::Zero(2));
  CHECK(pool.master->weights()[0] == 0.0);
  pool.master->end_round(Vec::Zero(2));
}

TEST_CASE("builders reject degenerate parameters") {
  CHECK_THROWS_AS(build_kl(Vec::Constant(2, 0.5), 1), std::invalid_argument);
  CHECK_THROWS_AS(build_switching(0, 100), std::invalid_argument);
  CHECK_THROWS_AS(build_unknown_range(0.0, 10, Vec::Constant(2, 0.5)), std::invalid_argument);
  Vec bad(2);
  bad << 1.0, -1.0;
  CHECK_THROWS_AS(build_multiscale(bad, 16), std::invalid_argument);
}
