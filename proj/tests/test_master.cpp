#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msmwc/master.hpp"
#include "msmwc/olo_base.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

using namespace msmwc;

namespace {

// Test base that plays the same point every round.
class FixedPlay : public RoundProtocol {
 public:
  explicit FixedPlay(Vec w) : w_(std::move(w)) {}
  int dim() const override { return static_cast<int>(w_.size()); }

 protected:
  Vec do_begin(const Vec&) override { return w_; }
  void do_end(const Vec&, const Vec&, const Vec&) override {}

 private:
  Vec w_;
};

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ExpertSlot slot(double eta, Vec play, std::string label) {
  ExpertSlot s;
  s.eta = eta;
  s.base = std::make_unique<FixedPlay>(std::move(play));
  s.label = std::move(label);
  return s;
}

MasterConfig plain_config(long T) {
  MasterConfig cfg;
  cfg.horizon = T;
  return cfg;
}

}  // namespace

TEST_CASE("initial aggregation weights are proportional to squared rates") {
  std::vector<ExpertSlot> slots;
  slots.push_back(slot(0.01, Vec::Zero(3), "a"));
  slots.push_back(slot(0.02, Vec::Zero(3), "b"));
  Master master(std::move(slots), plain_config(10), 3);
  const Vec play = master.begin_round(Vec::Zero(3));
  CHECK(master.weights()[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(master.weights()[1] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(play.norm() == doctest::Approx(0.0));
  master.end_round(Vec::Zero(3));
  CHECK(master.eta(1) == doctest::Approx(0.02));
  CHECK(master.label(0) == "a");
}

TEST_CASE("identical slot losses leave the weights at the prior") {
  std::vector<ExpertSlot> slots;
  slots.push_back(slot(0.01, Vec::Zero(2), "a"));
  slots.push_back(slot(0.03, Vec::Zero(2), "b"));
  Master master(std::move(slots), plain_config(20), 2);
  for (int t = 0; t < 5; ++t) {
    master.begin_round(v2(0.3, -0.7));
    CHECK(master.weights()[0] == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(master.weights()[1] == doctest::Approx(0.9).epsilon(1e-9));
    master.end_round(v2(1.0, -2.0));  // both bases score zero on any loss
  }
}

TEST_CASE("slot losses, errors, and audit sums follow the played points") {
  std::vector<ExpertSlot> slots;
  const double eta = 1.0 / 8.0;
  slots.push_back(slot(eta, v2(1.0, 0.0), "e0"));
  slots.push_back(slot(eta, v2(0.0, 1.0), "e1"));
  MasterConfig cfg = plain_config(10);
  cfg.record_history = true;
  Master master(std::move(slots), cfg, 2);

  // round 1: zero hint
  Vec play = master.begin_round(Vec::Zero(2));
  CHECK(play[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(play[1] == doctest::Approx(0.5).epsilon(1e-12));
  master.end_round(v2(1.0, 0.0));

  // equal rates reduce the inner step to the multiplicative closed form with
  // cost g + 32*eta*e^2: g = (1, 0), e = (1, 0)
  const double cost0 = 1.0 + 32.0 * eta * 1.0;
  double q0 = 0.5 * std::exp(-eta * cost0), q1 = 0.5;
  const double z = q0 + q1;
  q0 /= z;
  q1 /= z;

  // round 2: hint = previous loss
  play = master.begin_round(v2(1.0, 0.0));
  // decision tilts the anchor by the slot hints h = (<e0, m>, <e1, m>) = (1, 0)
  double p0 = q0 * std::exp(-eta * 1.0), p1 = q1;
  const double zz = p0 + p1;
  p0 /= zz;
  p1 /= zz;
  CHECK(master.weights()[0] == doctest::Approx(p0).epsilon(1e-9));
  CHECK(master.weights()[1] == doctest::Approx(p1).epsilon(1e-9));
  CHECK(play[0] == doctest::Approx(p0).epsilon(1e-9));
  master.end_round(v2(0.0, 1.0));

  const MasterAudit& audit = master.audit();
  CHECK(audit.rounds == 2);
  CHECK(audit.cum_g[0] == doctest::Approx(1.0).epsilon(1e-12));  // 1 + 0
  CHECK(audit.cum_g[1] == doctest::Approx(1.0).epsilon(1e-12));  // 0 + 1
  // per-round errors <w_k, loss - target>: round 1 (1, 0), round 2 (-1, 1)
  CHECK(audit.cum_err_sq[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(audit.cum_err_sq[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(audit.cum_e_sq[0] == doctest::Approx(audit.cum_err_sq[0]).epsilon(1e-12));
  CHECK(audit.sum_loss[0] == doctest::Approx(1.0));
  CHECK(audit.sum_loss[1] == doctest::Approx(1.0));
  CHECK(audit.learner_cumulative == doctest::Approx(0.5 + p1).epsilon(1e-9));

  REQUIRE(master.history().size() == 2);
  CHECK(master.history()[1].h[0] == doctest::Approx(1.0));
  CHECK(master.history()[1].g[1] == doctest::Approx(1.0));
  CHECK(master.history()[1].e[0] == doctest::Approx(-1.0));
}

TEST_CASE("recentering measures slot errors against the aggregate play") {
  std::vector<ExpertSlot> slots;
  slots.push_back(slot(0.1, v2(1.0, 0.0), "e0"));
  slots.push_back(slot(0.1, v2(0.0, 1.0), "e1"));
  MasterConfig cfg = plain_config(10);
  cfg.recentered = true;
  Master master(std::move(slots), cfg, 2);
  master.begin_round(Vec::Zero(2));
  master.end_round(v2(1.0, 0.0));
  const MasterAudit& audit = master.audit();
  // raw error for e0 is 1, recentered error is <e0 - (.5,.5), (1,0)> = 0.5
  CHECK(audit.cum_err_sq[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(audit.cum_e_sq[0] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("hint clamping counts coordinates and feeds bases the clamped value") {
  std::vector<ExpertSlot> slots;
  slots.push_back(slot(0.05, v2(1.0, 0.0), "e0"));
  MasterConfig cfg = plain_config(10);
  cfg.hint_clamp = v2(0.5, 0.5);
  cfg.record_history = true;
  Master master(std::move(slots), cfg, 2);
  master.begin_round(v2(2.0, 0.2));  // first coordinate exceeds its clamp
  CHECK(master.hint_clamp_count() == 1);
  CHECK(master.history()[0].h[0] == doctest::Approx(0.5));  // <e0, clamped m>
  master.end_round(v2(0.0, 0.0));
  master.begin_round(v2(0.1, -0.1));  // inside the clamp: count unchanged
  CHECK(master.hint_clamp_count() == 1);
  master.end_round(v2(0.0, 0.0));
}

TEST_CASE("aggregation floors keep every active weight above the bound") {
  std::vector<ExpertSlot> slots;
  slots.push_back(slot(0.2, v2(1.0, 0.0), "e0"));
  slots.push_back(slot(0.2, v2(0.0, 1.0), "e1"));
  MasterConfig cfg = plain_config(100);
  cfg.lower_bound = 0.1;
  Master master(std::move(slots), cfg, 2);
  for (int t = 0; t < 40; ++t) {
    master.begin_round(Vec::Zero(2));
    CHECK(master.weights().minCoeff() >= 0.1 - 1e-12);
    master.end_round(v2(1.0, -1.0));  // slot 0 keeps losing
  }
  master.begin_round(Vec::Zero(2));
  CHECK(master.weights()[0] == doctest::Approx(0.1).epsilon(1e-9));
  master.end_round(Vec::Zero(2));
}

TEST_CASE("deactivated experts lose their mass and stay frozen") {
  std::vector<ExpertSlot> slots;
  slots.push_back(slot(0.1, v2(1.0, 0.0), "e0"));
  slots.push_back(slot(0.1, v2(0.0, 1.0), "e1"));
  slots.push_back(slot(0.1, v2(0.5, 0.5), "e2"));
  Master master(std::move(slots), plain_config(50), 2);
  master.begin_round(Vec::Zero(2));
  master.end_round(v2(0.2, -0.2));

  master.set_active({1, 0, 1});
  CHECK(master.active()[1] == 0);
  master.begin_round(Vec::Zero(2));
  CHECK(master.weights()[1] == 0.0);
  CHECK(master.weights().sum() == doctest::Approx(1.0).epsilon(1e-12));
  master.end_round(v2(0.3, 0.1));
  CHECK(master.base(1).round() == 1);  // frozen after the deactivation
  CHECK(master.base(0).round() == 2);

  CHECK_THROWS_AS(master.set_active({1, 1, 1}), std::invalid_argument);  // reactivation
  master.begin_round(Vec::Zero(2));
  CHECK_THROWS_AS(master.set_active({1, 0, 0}), std::logic_error);  // mid-round
  master.end_round(Vec::Zero(2));
}

TEST_CASE("construction rejects bad pools") {
  CHECK_THROWS_AS(Master({}, plain_config(10), 2), std::invalid_argument);

  std::vector<ExpertSlot> bad_eta;
  bad_eta.push_back(slot(0.0, Vec::Zero(2), "z"));
  CHECK_THROWS_AS(Master(std::move(bad_eta), plain_config(10), 2), std::invalid_argument);

  std::vector<ExpertSlot> wrong_dim;
  wrong_dim.push_back(slot(0.1, Vec::Zero(3), "w"));
  CHECK_THROWS_AS(Master(std::move(wrong_dim), plain_config(10), 2), std::invalid_argument);

  std::vector<ExpertSlot> two;
  two.push_back(slot(0.1, Vec::Zero(2), "a"));
  two.push_back(slot(0.1, Vec::Zero(2), "b"));
  MasterConfig infeasible = plain_config(10);
  infeasible.lower_bound = 0.6;  // 2 * 0.6 > 1
  CHECK_THROWS_AS(Master(std::move(two), infeasible, 2), std::invalid_argument);
}
