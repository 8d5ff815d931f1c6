#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msmwc/olo_base.hpp"

#include <cmath>
#include <stdexcept>

using namespace msmwc;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("euclidean projections land on the nearest feasible point") {
  const auto ball = DecisionRegion::ball(2, 1.5);
  CHECK(ball.contains(v2(1.0, 0.5)));
  CHECK_FALSE(ball.contains(v2(2.0, 0.0)));
  const Vec p = ball.project_euclidean(v2(3.0, 0.0));
  CHECK(p[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.0));
  const Vec inside = ball.project_euclidean(v2(0.2, -0.3));
  CHECK(inside[0] == doctest::Approx(0.2));

  const auto box = DecisionRegion::box(v2(-1.0, 0.0), v2(1.0, 2.0));
  const Vec q = box.project_euclidean(v2(2.0, -1.0));
  CHECK(q[0] == doctest::Approx(1.0));
  CHECK(q[1] == doctest::Approx(0.0));

  const auto cap = DecisionRegion::ball_cap(v2(0.0, 0.0), v2(2.0, 2.0), 1.0);
  const Vec r = cap.project_euclidean(v2(2.0, 2.0));
  CHECK(r[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(r[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("quadratic projection onto the ball solves the secular equation") {
  Mat A = Mat::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 4.0;
  // w_i = a_i y_i / (a_i + nu) with nu making ||w|| = 1: y = (2,0) gives nu=1
  const Vec w = project_quadratic(v2(2.0, 0.0), A, DecisionRegion::ball(2, 1.0));
  CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(w[1] == doctest::Approx(0.0));
  // interior points are fixed points
  const Vec u = project_quadratic(v2(0.3, -0.2), A, DecisionRegion::ball(2, 1.0));
  CHECK(u[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(u[1] == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("quadratic projection respects anisotropy") {
  // heavier curvature on coordinate 1 keeps the solution closer to y there
  Mat A = Mat::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 100.0;
  const Vec y = v2(1.0, 1.0);
  const Vec w = project_quadratic(y, A, DecisionRegion::ball(2, 1.0));
  CHECK(w.norm() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(w[1] - 1.0) < std::abs(w[0] - 1.0));
  // optimality: no feasible tangent move improves the objective
  const auto obj = [&](const Vec& x) { return (x - y).dot(A * (x - y)); };
  Vec t = v2(-w[1], w[0]) * 1e-4;
  CHECK(obj((w + t) / (w + t).norm() * std::min(1.0, (w + t).norm())) >= obj(w) - 1e-10);
  CHECK(obj((w - t) / (w - t).norm() * std::min(1.0, (w - t).norm())) >= obj(w) - 1e-10);
}

TEST_CASE("rank-one inverse update matches the direct inverse") {
  Mat A = Mat::Identity(3, 3);
  Vec v(3);
  v << 1.0, 2.0, 0.0;
  const Mat updated = rank_one_inverse_update(A.inverse(), v);
  const Mat direct = (A + v * v.transpose()).inverse();
  CHECK((updated - direct).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("psd square root reproduces the generating factor") {
  Mat S(2, 2);
  S << 2.0, 1.0, 1.0, 3.0;  // symmetric positive definite
  const Mat R = matrix_sqrt_psd(S * S);
  CHECK((R - S).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((R * R - S * S).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("optimistic gradient descent follows the projected two-step recursion") {
  OptGdLearner gd(2, 0.5, DecisionRegion::ball(2, 1.0));
  Vec w = gd.begin_round(v2(1.0, 0.0));
  CHECK(w[0] == doctest::Approx(-0.5).epsilon(1e-12));  // Proj(0 - 0.5 * hint)
  gd.end_round(v2(1.0, 0.0));
  CHECK(gd.anchor()[0] == doctest::Approx(-0.5).epsilon(1e-12));

  w = gd.begin_round(v2(2.0, 0.0));  // Proj(-0.5 - 1.0, 0) hits the boundary
  CHECK(w[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(0.0));
  gd.end_round(v2(0.0, 0.0));
  CHECK(gd.anchor()[0] == doctest::Approx(-0.5).epsilon(1e-12));  // unchanged by zero loss
}

TEST_CASE("second-order learner trajectory matches the hand rollout") {
  OnsConfig cfg;
  cfg.dim = 2;
  cfg.eta = 0.1;
  cfg.region = DecisionRegion::ball(2, 1.0);
  OnsLearner alg(cfg);

  // round 1: geometry is eta * 8 * I (default unit range), so the step is
  // w = -(1/8) * hint / eta
  Vec w = alg.begin_round(v2(0.4, 0.0));
  CHECK(w[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(0.0));
  CHECK(alg.geometry()(0, 0) == doctest::Approx(0.8).epsilon(1e-12));

  alg.end_round(v2(0.6, 0.0));  // err = (0.2, 0)
  // corrected gradient: loss + 32*eta*<w, err>*err = (0.536, 0)
  // v = grad - target = (0.136, 0) enters the geometry
  CHECK(alg.geometry()(0, 0) == doctest::Approx(0.1 * (8.0 + 0.136 * 0.136)).epsilon(1e-10));
  CHECK(alg.geometry()(1, 1) == doctest::Approx(0.8).epsilon(1e-10));

  w = alg.begin_round(Vec::Zero(2));
  // anchor moved to -(1/8) * 0.536 / 0.1 = -0.67 on coordinate 0
  CHECK(w[0] == doctest::Approx(-0.67).epsilon(1e-9));
  alg.end_round(Vec::Zero(2));
}

TEST_CASE("second-order learner enforces its declared range") {
  OnsConfig cfg;
  cfg.dim = 2;
  cfg.eta = 0.1;
  cfg.region = DecisionRegion::ball(2, 1.0);
  OnsLearner alg(cfg);
  alg.begin_round(Vec::Zero(2));
  CHECK_THROWS_AS(alg.end_round(v2(1.5, 0.0)), std::invalid_argument);  // ||err|| > 1

  OnsConfig shrinking = cfg;
  shrinking.range_hint = [](long t) { return t == 1 ? 2.0 : 1.0; };
  OnsLearner alg2(shrinking);
  alg2.begin_round(Vec::Zero(2));
  alg2.end_round(v2(1.5, 0.0));  // fine: declared range 2
  CHECK_THROWS_AS(alg2.begin_round(Vec::Zero(2)), std::invalid_argument);  // hints shrank
}

TEST_CASE("recentering zeroes the correction at the aggregate play") {
  OnsConfig cfg;
  cfg.dim = 2;
  cfg.eta = 0.1;
  cfg.region = DecisionRegion::ball(2, 1.0);
  cfg.recentered = true;
  OnsLearner alg(cfg);
  const Vec w = alg.begin_round(v2(0.4, 0.0));
  // center == own play: the correction term vanishes, grad = loss, and the
  // anchor step uses the raw loss
  alg.end_round(v2(0.6, 0.0), v2(0.4, 0.0), w);
  CHECK(alg.geometry()(0, 0) == doctest::Approx(0.1 * (8.0 + 0.2 * 0.2)).epsilon(1e-10));

  OnsLearner alg2(cfg);
  alg2.begin_round(v2(0.4, 0.0));
  CHECK_THROWS_AS(alg2.end_round(v2(0.6, 0.0), v2(0.4, 0.0)), std::invalid_argument);
}

TEST_CASE("constant learner always plays the origin") {
  ConstantLearner c(3);
  for (int t = 0; t < 3; ++t) {
    CHECK(c.begin_round(Vec::Constant(3, 5.0)).norm() == doctest::Approx(0.0));
    c.end_round(Vec::Constant(3, -2.0));
  }
  CHECK(c.round() == 3);
}

TEST_CASE("preconditioned leader starts at a scaled reflected gradient") {
  AdaGradLearner ag(2, 0.25, 0.5, DecisionRegion::ball(2, 1.0));
  Vec w = ag.begin_round(Vec::Zero(2));
  CHECK(w.norm() == doctest::Approx(0.0));
  ag.end_round(v2(1.0, 0.0));
  CHECK(ag.accumulator()(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  // with G = diag(1, 0): w = -eta * (I + G)^{-1/2} * grad_sum = (-eta/sqrt(2), 0)
  w = ag.begin_round(Vec::Zero(2));
  CHECK(w[0] == doctest::Approx(-0.25 / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(w[1] == doctest::Approx(0.0));
  ag.end_round(Vec::Zero(2));
}

TEST_CASE("learner constructors validate their inputs") {
  CHECK_THROWS_AS(OptGdLearner(0, 0.1, DecisionRegion::ball(1, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(AdaGradLearner(2, 0.0, 0.1, DecisionRegion::ball(2, 1.0)),
                  std::invalid_argument);
  OnsConfig cfg;
  cfg.dim = 2;
  cfg.eta = 0.1;
  cfg.region = DecisionRegion::box(v2(1.0, 1.0), v2(2.0, 2.0));  // excludes the origin
  CHECK_THROWS_AS(OnsLearner{cfg}, std::invalid_argument);
}
