#pragma once

#include "msmwc/entropy_omd.hpp"

namespace msmwc {

// Per-coordinate learning-rate schedule. Fixed: a constant positive vector.
// Adaptive: eta_{t,i} = min(sqrt(ln(d*T) / sum_{s<t} err_{s,i}^2), cap), with
// the empty sum taking the cap branch.
struct RateSchedule {
  enum class Kind { Fixed, Adaptive };
  Kind kind = Kind::Fixed;
  Vec fixed_rates;
  double cap = 1.0 / 64.0;

  static RateSchedule fixed(Vec rates);
  static RateSchedule fixed_uniform(int dim, double rate);
  static RateSchedule adaptive(double cap = 1.0 / 64.0);
};

struct MsMwcConfig {
  int dim = 0;
  long horizon = 0;
  SimplexRegion region;
  Vec initial_anchor;  // defaults to uniform over the region support
  RateSchedule rates;
  bool record_history = false;
  EntropySolveOptions solve_options;
};

struct MsMwcHistoryRound {
  Vec rates;         // eta_t
  Vec anchor_before; // w'_t
  Vec decision;      // w_t
  Vec loss;          // l_t
  Vec target;        // m_t
};

// Optimistic mirror descent on the simplex with weighted negative entropy and
// a second-order correction: the decision solves the hint step from the
// current anchor, and the anchor update solves against loss + correction with
// correction_i = 32 * eta_{t,i} * (loss_i - target_i)^2.
class MsMwc : public RoundProtocol {
 public:
  explicit MsMwc(MsMwcConfig cfg);

  int dim() const override { return cfg_.dim; }

  // Region swap between rounds (aggregator admissible sets). The new support
  // must be a subset of coordinates carrying anchor mass; dropped mass is
  // renormalized over the surviving support.
  void set_region(const SimplexRegion& region);

  const Vec& anchor() const { return anchor_; }
  const Vec& current_rates() const { return rates_; }
  const Vec& squared_error_sums() const { return err_sq_; }
  const SimplexRegion& region() const { return cfg_.region; }
  const std::vector<MsMwcHistoryRound>& history() const { return history_; }

 protected:
  Vec do_begin(const Vec& hint) override;
  void do_end(const Vec& loss, const Vec& target, const Vec& center) override;

 private:
  Vec compute_rates() const;
  MsMwcConfig cfg_;
  Vec anchor_;
  Vec rates_;
  Vec err_sq_;
  Vec play_;
  double log_dT_ = 0;
  std::vector<MsMwcHistoryRound> history_;
};

}  // namespace msmwc
