#include "msmwc/scale_adaptation.hpp"

#include <cmath>

namespace msmwc {

ScaleTracker::ScaleTracker(double B0, RangeNorm norm)
    : B0_(B0), B_(B0), epoch_base_(B0), norm_(norm) {
  if (!(B0 > 0) || !std::isfinite(B0))
    throw std::invalid_argument("scale tracker: base must be positive");
}

void ScaleTracker::observe_error(const Vec& err) {
  const double n = norm_ == RangeNorm::LInf ? err.lpNorm<Eigen::Infinity>() : err.norm();
  if (n > B_) B_ = n;
}

void ScaleTracker::observe_loss(const Vec& loss) {
  const double n = loss.norm();
  if (n > G_) G_ = n;
  cum_l2_ += n;
}

void ScaleTracker::begin_epoch(double base) {
  if (!(base >= epoch_base_)) throw std::invalid_argument("scale tracker: epoch base must grow");
  epoch_base_ = base;
  ++restarts_;
}

Vec truncate_loss(const Vec& loss, const Vec& target, double B_prev, double B_cur) {
  if (!(B_prev > 0) || !(B_cur > 0))
    throw std::invalid_argument("truncate: ranges must be positive");
  if (B_prev > B_cur * (1 + 1e-12))
    throw std::invalid_argument("truncate: previous range exceeds the current one");
  if (loss.size() != target.size()) throw std::invalid_argument("truncate: dimension mismatch");
  if (B_prev >= B_cur) return loss;
  return target + (B_prev / B_cur) * (loss - target);
}

RestartWrapper::RestartWrapper(Generator gen, std::shared_ptr<ScaleTracker> tracker, long horizon)
    : gen_(std::move(gen)), tracker_(std::move(tracker)), horizon_(horizon) {
  if (!gen_) throw std::invalid_argument("restart wrapper: missing generator");
  if (!tracker_) throw std::invalid_argument("restart wrapper: missing tracker");
  if (horizon_ < 1) throw std::invalid_argument("restart wrapper: bad horizon");
  inner_ = gen_(tracker_->epoch_base());
  if (!inner_.master) throw std::invalid_argument("restart wrapper: generator built no pool");
  last_mask_.clear();
}

void RestartWrapper::apply_active_rule() {
  if (!inner_.active_rule) return;
  std::vector<char> mask = inner_.active_rule(tracker_->current());
  if (mask == last_mask_) return;
  inner_.master->set_active(mask);
  last_mask_ = std::move(mask);
}

Vec RestartWrapper::do_begin(const Vec& hint) {
  apply_active_rule();
  return inner_.master->begin_round(hint);
}

void RestartWrapper::do_end(const Vec& loss, const Vec& target, const Vec& center) {
  ++t_;
  const double B_prev = tracker_->current();
  tracker_->observe_error(loss - target);
  const double B_cur = tracker_->current();
  const Vec fed = truncate_loss(loss, target, B_prev, B_cur);
  damage_ += norm() == RangeNorm::LInf ? (loss - fed).lpNorm<Eigen::Infinity>()
                                       : (loss - fed).norm();
  inner_.master->end_round(fed, target, center);
  if (B_cur / tracker_->epoch_base() > static_cast<double>(horizon_)) {
    tracker_->begin_epoch(B_cur);
    inner_ = gen_(B_cur);
    if (!inner_.master) throw std::runtime_error("restart wrapper: generator built no pool");
    last_mask_.clear();
    events_.push_back({t_, "restart", B_cur});
  }
}

RangeNorm RestartWrapper::norm() const { return tracker_->norm(); }

DoublingWrapper::DoublingWrapper(Generator gen, double B0, long horizon, double initial_diameter)
    : gen_(std::move(gen)), horizon_(horizon), D_(initial_diameter) {
  if (!gen_) throw std::invalid_argument("doubling wrapper: missing generator");
  if (horizon_ < 1) throw std::invalid_argument("doubling wrapper: bad horizon");
  if (!(D_ > 0)) throw std::invalid_argument("doubling wrapper: bad initial diameter");
  inner_ = gen_(D_, B0);
  if (!inner_) throw std::invalid_argument("doubling wrapper: generator built no wrapper");
}

Vec DoublingWrapper::do_begin(const Vec& hint) { return inner_->begin_round(hint); }

void DoublingWrapper::do_end(const Vec& loss, const Vec& target, const Vec& center) {
  ++t_;
  inner_->end_round(loss, target, center);
  const double n = loss.norm();
  if (n > G_) G_ = n;
  cum_l2_ += n;
  if (G_ > 0) {
    const double ratio = std::sqrt(cum_l2_ / G_);
    if (D_ < ratio) {
      D_ = 2.0 * ratio;
      const double B_now = inner_->tracker().current();
      for (const auto& e : inner_->events())
        events_.push_back({inner_round_offset_ + e.round, e.kind, e.value});
      inner_round_offset_ = t_;
      inner_ = gen_(D_, B_now);
      if (!inner_) throw std::runtime_error("doubling wrapper: generator built no wrapper");
      events_.push_back({t_, "doubling", D_});
    }
  }
}

std::vector<ScaleEvent> DoublingWrapper::events() const {
  std::vector<ScaleEvent> all = events_;
  for (const auto& e : inner_->events())
    all.push_back({inner_round_offset_ + e.round, e.kind, e.value});
  return all;
}

}  // namespace msmwc
