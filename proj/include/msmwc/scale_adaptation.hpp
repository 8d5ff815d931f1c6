#pragma once

#include "msmwc/master.hpp"

#include <functional>
#include <memory>

namespace msmwc {

enum class RangeNorm { LInf, L2 };

// Running scale bookkeeping shared by the restart and doubling wrappers:
// B_t = max(B_0, max_s ||loss_s - target_s||), plus the loss-norm statistics
// the diameter test needs.
class ScaleTracker {
 public:
  ScaleTracker(double B0, RangeNorm norm);

  void observe_error(const Vec& err);  // updates B_t
  void observe_loss(const Vec& loss);  // updates G_t and the l2 running sum

  double initial() const { return B0_; }
  double current() const { return B_; }
  double epoch_base() const { return epoch_base_; }
  double loss_norm_max() const { return G_; }
  double loss_norm_sum() const { return cum_l2_; }
  int restarts() const { return restarts_; }
  RangeNorm norm() const { return norm_; }

  void begin_epoch(double base);  // B~ <- base, restart count++

 private:
  double B0_, B_, epoch_base_;
  RangeNorm norm_;
  double G_ = 0, cum_l2_ = 0;
  int restarts_ = 0;
};

// loss scaled toward the target so the error norm fits the previous range:
// target + (B_prev/B_cur) * (loss - target).
Vec truncate_loss(const Vec& loss, const Vec& target, double B_prev, double B_cur);

struct ScaleEvent {
  long round = 0;           // 1-based round at which the event fired
  std::string kind;         // "restart" or "doubling"
  double value = 0;         // new epoch base / new diameter
};

struct WrappedPool {
  std::unique_ptr<Master> master;
  std::function<std::vector<char>(double range)> active_rule;  // optional
};

// Restart wrapper: feeds truncated losses to an aggregator pool built for the
// current epoch base; when the running range outgrows the base by more than a
// factor of the horizon, rebuilds the pool for the new base. The active rule
// (when present) prunes the pool's rate grid as the range grows.
class RestartWrapper : public RoundProtocol {
 public:
  using Generator = std::function<WrappedPool(double epoch_base)>;
  RestartWrapper(Generator gen, std::shared_ptr<ScaleTracker> tracker, long horizon);

  int dim() const override { return inner_.master->dim(); }
  RangeNorm norm() const;
  const ScaleTracker& tracker() const { return *tracker_; }
  const std::shared_ptr<ScaleTracker>& tracker_ptr() const { return tracker_; }
  Master& pool() { return *inner_.master; }
  const std::vector<ScaleEvent>& events() const { return events_; }
  double truncation_damage() const { return damage_; }

 protected:
  Vec do_begin(const Vec& hint) override;
  void do_end(const Vec& loss, const Vec& target, const Vec& center) override;

 private:
  void apply_active_rule();
  Generator gen_;
  std::shared_ptr<ScaleTracker> tracker_;
  long horizon_;
  WrappedPool inner_;
  std::vector<char> last_mask_;
  std::vector<ScaleEvent> events_;
  double damage_ = 0;
  long t_ = 0;
};

// Diameter-doubling wrapper: owns a restart wrapper built for the current
// diameter; after each round, if D_t falls below sqrt(sum_s ||loss_s||_2 /
// max_s ||loss_s||_2), doubles past that value and rebuilds the restart
// wrapper with the running scale as its new base.
class DoublingWrapper : public RoundProtocol {
 public:
  // generator(D, B0) builds the restart wrapper for diameter D and scale B0.
  using Generator = std::function<std::unique_ptr<RestartWrapper>(double D, double B0)>;
  DoublingWrapper(Generator gen, double B0, long horizon, double initial_diameter = 1.0);

  int dim() const override { return inner_->dim(); }
  double diameter() const { return D_; }
  RestartWrapper& inner() { return *inner_; }
  std::vector<ScaleEvent> events() const;  // doubling + inner restarts, merged

 protected:
  Vec do_begin(const Vec& hint) override;
  void do_end(const Vec& loss, const Vec& target, const Vec& center) override;

 private:
  Generator gen_;
  long horizon_;
  double D_;
  double G_ = 0, cum_l2_ = 0;
  std::unique_ptr<RestartWrapper> inner_;
  std::vector<ScaleEvent> events_;
  long t_ = 0;
  long inner_round_offset_ = 0;
};

}  // namespace msmwc
