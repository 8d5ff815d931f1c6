#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msmwc/olo_suites.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

using namespace msmwc;

namespace {

OloSuiteParams params(int d, long T, double D) {
  OloSuiteParams p;
  p.d = d;
  p.T = T;
  p.D = D;
  return p;
}

}  // namespace

TEST_CASE("second-order pool grid covers diameter and error-budget axes") {
  auto pool = build_ons(params(2, 16, 1.0));
  // diameter exponents -ceil(log2(d*T))..0, budget exponents 1..ceil(log2(T))
  REQUIRE(pool->num_experts() == 6 * 4);
  CHECK(pool->label(0) == "ons/d=-5,s=1");
  CHECK(pool->label(23) == "ons/d=0,s=4");
  CHECK(pool->eta(0) == doctest::Approx(1.0 / (64.0 * std::ldexp(1.0, -5 + 1))).epsilon(1e-15));
  std::set<std::string> labels;
  for (int k = 0; k < pool->num_experts(); ++k) labels.insert(pool->label(k));
  CHECK(labels.size() == static_cast<size_t>(pool->num_experts()));
}

TEST_CASE("gradient-descent pool grid covers its slightly smaller rectangle") {
  auto pool = build_gd(params(2, 16, 1.0));
  REQUIRE(pool->num_experts() == 5 * 4);  // diameters -4..0, budgets 1..4
  CHECK(pool->label(0) == "gd/d=-4,s=1");
  CHECK(pool->eta(0) == doctest::Approx(1.0 / (32.0 * std::ldexp(1.0, -4 + 1))).epsilon(1e-15));
}

TEST_CASE("preconditioned pool grid has three axes and honors the scale cap") {
  auto full = build_adagrad(params(2, 16, 1.0));
  // diameters -4..0, trace budgets 1..5, scales -4..5
  REQUIRE(full->num_experts() == 5 * 5 * 10);

  auto p = params(2, 16, 1.0);
  p.max_adagrad_scale_values = 3;
  auto pruned = build_adagrad(p);
  REQUIRE(pruned->num_experts() == 5 * 5 * 3);
  // both scale endpoints survive the subsampling
  std::set<std::string> labels;
  for (int k = 0; k < pruned->num_experts(); ++k) labels.insert(pruned->label(k));
  CHECK(labels.count("ag/d=-4,t=1,l=-4") == 1);
  CHECK(labels.count("ag/d=-4,t=1,l=5") == 1);
}

TEST_CASE("recentered pool uses one dyadic axis over the diameter horizon") {
  auto pool = build_metagrad(params(2, 16, 1.0));
  REQUIRE(pool->num_experts() == 5);  // ceil(log2(2*D*T))
  CHECK(pool->label(0) == "mg/k=1");
  CHECK(pool->eta(0) == doctest::Approx(1.0 / 128.0).epsilon(1e-15));
  CHECK(pool->eta(4) == doctest::Approx(1.0 / 2048.0).epsilon(1e-15));
}

TEST_CASE("the union pool concatenates the three grids") {
  auto u = build_union3(params(2, 16, 1.0));
  CHECK(u->num_experts() == 24 + 20 + 250);
  std::set<std::string> prefixes;
  for (int k = 0; k < u->num_experts(); ++k)
    prefixes.insert(u->label(k).substr(0, u->label(k).find('/')));
  CHECK(prefixes == std::set<std::string>{"ag", "gd", "ons"});
}

TEST_CASE("a vanishing diameter degenerates to the constant fallback") {
  auto pool = build_ons(params(2, 16, 0.01));  // 0.01 < 1/(2*16)
  REQUIRE(pool->num_experts() == 1);
  CHECK(pool->label(0) == "ons/fallback");
  const Vec play = pool->begin_round(Vec::Zero(2));
  CHECK(play.norm() == doctest::Approx(0.0));
  pool->end_round(Vec::Constant(2, 3.0));
}

TEST_CASE("pool decisions stay inside the diameter ball") {
  auto pool = build_gd(params(2, 8, 0.5));
  Vec loss(2);
  loss << 1.0, -1.0;
  for (int t = 0; t < 8; ++t) {
    const Vec play = pool->begin_round(Vec::Zero(2));
    CHECK(play.norm() <= 0.5 + 1e-9);
    pool->end_round(loss);
  }
}

TEST_CASE("range-adaptive pool prunes as the declared scale grows") {
  auto p = params(2, 16, 1.0);
  UnknownRangePool pool = build_onsul(p, 1.0, [](long) { return 1.0; });
  REQUIRE(pool.master->num_experts() == 8);  // ceil(log2(T^2))
  CHECK(pool.master->label(0) == "onsul/k=1");
  CHECK(pool.master->eta(0) == doctest::Approx(1.0 / 384.0).epsilon(1e-15));

  const auto count = [](const std::vector<char>& mask) {
    int n = 0;
    for (char c : mask) n += c != 0;
    return n;
  };
  CHECK(count(pool.active_rule(1.0)) == 8);
  CHECK(count(pool.active_rule(2.0)) == 8);  // eta_1 = 1/(192*2D) is still safe
  CHECK(count(pool.active_rule(4.0)) == 7);
  CHECK(count(pool.active_rule(8.0)) == 6);
}

TEST_CASE("suite builders validate their parameters") {
  CHECK_THROWS_AS(build_ons(params(0, 16, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(build_gd(params(2, 1, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(build_adagrad(params(2, 16, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(build_onsul(params(2, 16, 1.0), 0.0, [](long) { return 1.0; }),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_onsul(params(2, 16, 1.0), 1.0, nullptr), std::invalid_argument);
}
