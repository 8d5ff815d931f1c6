#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msmwc/olo_base.hpp"
#include "msmwc/scale_adaptation.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

using namespace msmwc;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// One-slot pool around a constant-play base; enough structure to drive the
// wrappers without algorithmic noise.
WrappedPool trivial_pool(long horizon) {
  std::vector<ExpertSlot> slots;
  ExpertSlot s;
  s.eta = 1.0 / 64.0;
  s.base = std::make_unique<ConstantLearner>(2);
  s.label = "c";
  slots.push_back(std::move(s));
  MasterConfig mc;
  mc.horizon = horizon;
  WrappedPool p;
  p.master = std::make_unique<Master>(std::move(slots), std::move(mc), 2);
  return p;
}

}  // namespace

TEST_CASE("the tracker keeps running maxima under its configured norm") {
  ScaleTracker inf_tracker(1.0, RangeNorm::LInf);
  inf_tracker.observe_error(v2(3.0, 4.0));
  CHECK(inf_tracker.current() == doctest::Approx(4.0));

  ScaleTracker l2_tracker(1.0, RangeNorm::L2);
  l2_tracker.observe_error(v2(3.0, 4.0));
  CHECK(l2_tracker.current() == doctest::Approx(5.0));
  l2_tracker.observe_error(v2(0.1, 0.1));  // smaller errors never shrink it
  CHECK(l2_tracker.current() == doctest::Approx(5.0));

  l2_tracker.observe_loss(v2(3.0, 4.0));
  l2_tracker.observe_loss(v2(0.0, 1.0));
  CHECK(l2_tracker.loss_norm_max() == doctest::Approx(5.0));
  CHECK(l2_tracker.loss_norm_sum() == doctest::Approx(6.0));

  CHECK(l2_tracker.restarts() == 0);
  l2_tracker.begin_epoch(5.0);
  CHECK(l2_tracker.restarts() == 1);
  CHECK(l2_tracker.epoch_base() == doctest::Approx(5.0));
  CHECK_THROWS_AS(l2_tracker.begin_epoch(2.0), std::invalid_argument);
  CHECK_THROWS_AS(ScaleTracker(0.0, RangeNorm::L2), std::invalid_argument);
}

TEST_CASE("loss truncation shrinks toward the target by the range ratio") {
  const Vec out = truncate_loss(v2(3.0, 0.0), v2(1.0, 0.0), 1.0, 2.0);
  CHECK(out[0] == doctest::Approx(2.0).epsilon(1e-12));  // 1 + (1/2)*(3-1)
  CHECK(out[1] == doctest::Approx(0.0));

  const Vec same = truncate_loss(v2(3.0, 0.0), v2(1.0, 0.0), 2.0, 2.0);
  CHECK(same[0] == doctest::Approx(3.0));  // equal ranges pass through

  CHECK_THROWS_AS(truncate_loss(v2(1.0, 0.0), v2(0.0, 0.0), 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(truncate_loss(v2(1.0, 0.0), v2(0.0, 0.0), 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(truncate_loss(v2(1.0, 0.0), Vec::Zero(3), 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("restart wrapper truncates, accumulates damage, and rebuilds on blowup") {
  int builds = 0;
  RestartWrapper wrapper(
      [&builds](double) {
        ++builds;
        return trivial_pool(100);
      },
      std::make_shared<ScaleTracker>(1.0, RangeNorm::LInf), /*horizon=*/5);
  CHECK(builds == 1);

  wrapper.begin_round(Vec::Zero(2));
  wrapper.end_round(v2(2.0, 0.0));  // range 1 -> 2, fed loss (1, 0)
  CHECK(wrapper.tracker().current() == doctest::Approx(2.0));
  CHECK(wrapper.truncation_damage() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(wrapper.events().empty());  // 2/1 <= horizon factor 5

  wrapper.begin_round(Vec::Zero(2));
  wrapper.end_round(v2(6.0, 0.0));  // range 6: 6/1 > 5 forces a rebuild
  CHECK(builds == 2);
  REQUIRE(wrapper.events().size() == 1);
  CHECK(wrapper.events()[0].kind == "restart");
  CHECK(wrapper.events()[0].round == 2);
  CHECK(wrapper.events()[0].value == doctest::Approx(6.0));
  CHECK(wrapper.tracker().restarts() == 1);
  CHECK(wrapper.tracker().epoch_base() == doctest::Approx(6.0));
  // damage: round 1 kept 1 of 2, round 2 kept 2 of 6 (both on coordinate 0)
  CHECK(wrapper.truncation_damage() == doctest::Approx(1.0 + 4.0).epsilon(1e-12));

  // losses inside the current range pass through untouched
  wrapper.begin_round(Vec::Zero(2));
  wrapper.end_round(v2(3.0, 0.0));
  CHECK(wrapper.truncation_damage() == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("restart wrapper applies the pruning rule before each round") {
  // two slots so the mask has something to remove
  std::vector<ExpertSlot> slots;
  for (int k = 0; k < 2; ++k) {
    ExpertSlot s;
    s.eta = 1.0 / 64.0;
    s.base = std::make_unique<ConstantLearner>(2);
    s.label = "c" + std::to_string(k);
    slots.push_back(std::move(s));
  }
  MasterConfig mc;
  mc.horizon = 100;
  RestartWrapper wrapper(
      [&](double) {
        WrappedPool p;
        p.master = std::make_unique<Master>(std::move(slots), mc, 2);
        p.active_rule = [](double range) {
          return range > 1.5 ? std::vector<char>{0, 1} : std::vector<char>{1, 1};
        };
        return p;
      },
      std::make_shared<ScaleTracker>(1.0, RangeNorm::LInf), /*horizon=*/100);

  wrapper.begin_round(Vec::Zero(2));
  CHECK(wrapper.pool().active()[0] == 1);
  wrapper.end_round(v2(2.0, 0.0));  // range grows past 1.5

  wrapper.begin_round(Vec::Zero(2));
  CHECK(wrapper.pool().active()[0] == 0);
  CHECK(wrapper.pool().active()[1] == 1);
  wrapper.end_round(Vec::Zero(2));
}

TEST_CASE("doubling wrapper grows the diameter past the loss-mass ratio") {
  int rebuilds = 0;
  DoublingWrapper wrapper(
      [&rebuilds](double, double B0) {
        ++rebuilds;
        return std::make_unique<RestartWrapper>(
            [](double) { return trivial_pool(100); },
            std::make_shared<ScaleTracker>(B0, RangeNorm::L2), 100);
      },
      /*B0=*/1.0, /*horizon=*/100, /*initial_diameter=*/1.0);
  CHECK(rebuilds == 1);
  CHECK(wrapper.diameter() == doctest::Approx(1.0));

  wrapper.begin_round(Vec::Zero(2));
  wrapper.end_round(v2(1.0, 0.0));  // ratio sqrt(1/1) = 1, not below D
  CHECK(wrapper.events().empty());
  CHECK(wrapper.diameter() == doctest::Approx(1.0));

  wrapper.begin_round(Vec::Zero(2));
  wrapper.end_round(v2(1.0, 0.0));  // ratio sqrt(2) > 1: double past it
  CHECK(rebuilds == 2);
  CHECK(wrapper.diameter() == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  REQUIRE(wrapper.events().size() == 1);
  CHECK(wrapper.events()[0].kind == "doubling");
  CHECK(wrapper.events()[0].round == 2);

  wrapper.begin_round(Vec::Zero(2));
  wrapper.end_round(v2(1.0, 0.0));  // ratio sqrt(3) < 2*sqrt(2): stable now
  CHECK(wrapper.events().size() == 1);
}

TEST_CASE("wrapper constructors validate their inputs") {
  CHECK_THROWS_AS(
      RestartWrapper(nullptr, std::make_shared<ScaleTracker>(1.0, RangeNorm::L2), 10),
      std::invalid_argument);
  CHECK_THROWS_AS(RestartWrapper([](double) { return trivial_pool(10); }, nullptr, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(DoublingWrapper(nullptr, 1.0, 10), std::invalid_argument);
}
