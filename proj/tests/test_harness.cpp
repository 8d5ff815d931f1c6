#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msmwc/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

using namespace msmwc;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

EnvironmentSpec gap_spec(std::uint64_t seed) {
  EnvironmentSpec s;
  s.kind = "gap_stochastic";
  s.d = 3;
  s.T = 40;
  s.seed = seed;
  s.gap = 0.2;
  s.i_star = 1;
  return s;
}

}  // namespace

TEST_CASE("environments are deterministic functions of their spec") {
  Environment a(gap_spec(7));
  Environment b(gap_spec(7));
  Environment c(gap_spec(8));
  bool all_equal = true;
  bool any_diff_seed = false;
  for (long t = 1; t <= 40; ++t) {
    if ((a.loss(t) - b.loss(t)).cwiseAbs().maxCoeff() != 0.0) all_equal = false;
    if ((a.loss(t) - c.loss(t)).cwiseAbs().maxCoeff() > 0.0) any_diff_seed = true;
    CHECK(a.loss(t).size() == 3);
    CHECK(a.loss(t).cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  }
  CHECK(all_equal);
  CHECK(any_diff_seed);
  CHECK(a.planted_best() == 1);
}

TEST_CASE("counter-based draws do not depend on call order") {
  CounterRng rng(5);
  const double first = rng.uniform(10, 2, 3);
  (void)rng.uniform(1, 1, 1);
  (void)rng.symmetric(99, 0, 0);
  CHECK(rng.uniform(10, 2, 3) == first);
  CHECK(rng.uniform(10, 2, 3) >= 0.0);
  CHECK(rng.uniform(10, 2, 3) < 1.0);
  // pm1 takes values in {-1, +1} only
  for (long t = 1; t <= 20; ++t) {
    const double x = rng.pm1(0.3, t, 0);
    CHECK((x == 1.0 || x == -1.0));
  }
}

TEST_CASE("the growing-range schedule jumps exactly once") {
  EnvironmentSpec s;
  s.kind = "growing_range";
  s.d = 2;
  s.T = 100;
  s.seed = 3;
  s.gap = 0.2;
  s.i_star = 1;
  s.base_scale = 1.0;
  s.jump_factor = 50.0;
  s.jump_round = 60;
  Environment env(s);
  CHECK(env.scale_at(1) == doctest::Approx(1.0));
  CHECK(env.scale_at(59) == doctest::Approx(1.0));
  CHECK(env.scale_at(60) == doctest::Approx(50.0));
  CHECK(env.scale_at(100) == doctest::Approx(50.0));
  bool saw_big = false;
  for (long t = 60; t <= 100; ++t) saw_big = saw_big || env.loss(t).cwiseAbs().maxCoeff() > 1.0;
  CHECK(saw_big);
}

TEST_CASE("switching environments honor an explicit partition") {
  EnvironmentSpec s;
  s.kind = "switching";
  s.d = 3;
  s.T = 30;
  s.seed = 1;
  s.gap = 0.4;
  s.partition = {{1, 10}, {11, 25}, {26, 30}};
  s.segment_best = {2, 0, 1};
  Environment env(s);
  CHECK(env.partition().size() == 3);
  CHECK(env.segment_best() == std::vector<int>{2, 0, 1});
  // inside each segment the planted coordinate has the lowest mean loss
  for (std::size_t j = 0; j < env.partition().size(); ++j) {
    Vec mean = Vec::Zero(3);
    for (long t = env.partition()[j].first; t <= env.partition()[j].second; ++t)
      mean += env.loss(t);
    int arg = 0;
    mean.minCoeff(&arg);
    CHECK(arg == env.segment_best()[j]);
  }
}

TEST_CASE("environment specs are validated") {
  EnvironmentSpec s = gap_spec(1);
  s.kind = "no_such_kind";
  CHECK_THROWS_AS(Environment{s}, std::invalid_argument);
  EnvironmentSpec bad_T = gap_spec(1);
  bad_T.T = 0;
  CHECK_THROWS_AS(Environment{bad_T}, std::invalid_argument);
}

TEST_CASE("predictor kinds parse, print, and cap rates") {
  CHECK(PredictorKind::parse("zero").type == PredictorType::Zero);
  CHECK(PredictorKind::parse("avg").name() == "avg");
  CHECK(PredictorKind::parse("running_average").name() == "avg");
  CHECK(PredictorKind::parse("last_loss").name() == "last");
  CHECK(PredictorKind::parse("bcast1").broadcast());
  CHECK(PredictorKind::parse("opt_recentered").inner == PredictorType::LastLoss);
  CHECK(PredictorKind::parse("opt_recentered:avg").name() == "opt_recentered:avg");
  CHECK(PredictorKind::parse("zero").rate_cap() == doctest::Approx(1.0 / 64.0));
  CHECK(PredictorKind::parse("opt_recentered").rate_cap() == doctest::Approx(1.0 / 128.0));
  CHECK_THROWS_AS(PredictorKind::parse("nope"), std::invalid_argument);
  CHECK_THROWS_AS(PredictorKind::parse("last:avg"), std::invalid_argument);
  CHECK_THROWS_AS(PredictorKind::parse("opt_recentered:bcast1"), std::invalid_argument);
}

TEST_CASE("prediction streams advance with observed losses") {
  Predictor p(PredictorKind::parse("avg"), 2);
  CHECK(p.pre_hint().norm() == doctest::Approx(0.0));
  p.observe(v2(1.0, 0.0));
  p.observe(v2(0.0, 1.0));
  CHECK(p.pre_hint()[0] == doctest::Approx(0.5));

  Predictor q(PredictorKind::parse("last"), 2);
  q.observe(v2(0.3, -0.3));
  CHECK(q.pre_hint()[0] == doctest::Approx(0.3));

  // broadcast kinds complete their target only once the loss is known
  Predictor b(PredictorKind::parse("bcast1"), 2);
  CHECK(b.pre_hint().norm() == doctest::Approx(0.0));
  const Vec target = b.correction_target(b.pre_hint(), v2(0.5, 0.5), v2(0.7, -0.1));
  CHECK(target[0] == doctest::Approx(0.7));
  CHECK(target[1] == doctest::Approx(0.7));
}

TEST_CASE("trace regret arithmetic over intervals") {
  RegretTrace trace(2);
  trace.add_round(v2(0.5, 0.5), v2(1.0, 0.0), Vec::Zero(2));
  trace.add_round(v2(1.0, 0.0), v2(0.0, 1.0), Vec::Zero(2), "marker");
  CHECK(trace.rounds() == 2);
  CHECK(trace.learner_cumulative() == doctest::Approx(0.5));
  CHECK(trace.regret(v2(1.0, 0.0)) == doctest::Approx(0.5 - 1.0));
  CHECK(trace.regret(v2(0.0, 1.0)) == doctest::Approx(0.5 - 1.0));
  CHECK(trace.regret(v2(1.0, 0.0), {{2, 2}}) == doctest::Approx(0.0));
  CHECK(trace.round(2).event == "marker");
  CHECK_THROWS_AS(trace.round(3), std::invalid_argument);
  CHECK_THROWS_AS(trace.regret(v2(1.0, 0.0), {{2, 1}}), std::invalid_argument);
}

TEST_CASE("fixed-rate exponential weights follow the multiplicative form") {
  HedgeLearner hedge(2, 0.5);
  Vec w = hedge.begin_round(Vec::Zero(2));
  CHECK(w[0] == doctest::Approx(0.5));
  hedge.end_round(v2(1.0, 0.0));
  w = hedge.begin_round(Vec::Zero(2));
  const double p0 = std::exp(-0.5) / (std::exp(-0.5) + 1.0);
  CHECK(w[0] == doctest::Approx(p0).epsilon(1e-12));
  hedge.end_round(Vec::Zero(2));
}

TEST_CASE("the tuned per-coordinate reference matches its closed form") {
  const Vec ref = oracle_tuned_reference({v2(1.0, 0.0), v2(0.0, 1.0)});
  CHECK(ref[0] == doctest::Approx(2.0 * std::sqrt(std::log(2.0))).epsilon(1e-12));
  CHECK(ref[1] == doctest::Approx(ref[0]).epsilon(1e-12));
}

TEST_CASE("learner factory wires each algorithm family") {
  LearnerSpec s;
  s.algo = "adaptive";
  LearnerHandle h = make_learner(s, 3, 100);
  CHECK(h.single != nullptr);
  CHECK(h.pool == nullptr);
  CHECK_FALSE(h.olo);

  s.algo = "kl";
  h = make_learner(s, 3, 100);
  CHECK(h.pool != nullptr);

  s.algo = "unknown_range";
  h = make_learner(s, 3, 100);
  CHECK(h.restart != nullptr);

  s.algo = "union3";
  s.D = 1.0;
  h = make_learner(s, 3, 100);
  CHECK(h.pool != nullptr);
  CHECK(h.olo);

  s.algo = "onsuld";
  h = make_learner(s, 3, 100);
  CHECK(h.doubling != nullptr);

  s.algo = "florble";
  CHECK_THROWS_AS(make_learner(s, 3, 100), std::invalid_argument);
}

TEST_CASE("full runs are reproducible and carry their audits") {
  RunConfig cfg;
  cfg.env = gap_spec(11);
  cfg.env.T = 60;
  cfg.learner.algo = "adaptive";
  cfg.predictor = PredictorKind::parse("last");
  const RunResult r1 = run(cfg);
  const RunResult r2 = run(cfg);
  CHECK(r1.trace.rounds() == 60);
  CHECK(r1.learner_cumulative == r2.learner_cumulative);
  CHECK_FALSE(r1.comparators.empty());
  CHECK_FALSE(r1.reports.empty());
  for (const BoundReport& rep : r1.reports) CHECK(rep.holds(1e-9));
  // every decision stays on the simplex
  for (long t = 1; t <= r1.trace.rounds(); ++t) {
    CHECK(r1.trace.round(t).decision.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r1.trace.round(t).decision.minCoeff() >= -1e-12);
  }
}

TEST_CASE("the worker pool covers the index range under any budget") {
  setenv("MSMWC_THREADS", "3", 1);
  CHECK(thread_budget() == 3);
  std::atomic<long> sum{0};
  parallel_for(100, [&sum](long i) { sum += i; });
  CHECK(sum.load() == 4950);
  setenv("MSMWC_THREADS", "1", 1);
  CHECK(thread_budget() == 1);
  std::atomic<long> sum2{0};
  parallel_for(5, [&sum2](long i) { sum2 += i; });
  CHECK(sum2.load() == 10);
  unsetenv("MSMWC_THREADS");
  CHECK(thread_budget() >= 1);
}
