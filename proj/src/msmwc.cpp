#include "msmwc/msmwc.hpp"

#include <cmath>

namespace msmwc {

RateSchedule RateSchedule::fixed(Vec rates) {
  RateSchedule s;
  s.kind = Kind::Fixed;
  for (Eigen::Index i = 0; i < rates.size(); ++i)
    if (!(rates[i] > 0) || !std::isfinite(rates[i]))
      throw std::invalid_argument("rate schedule: fixed rates must be positive");
  s.fixed_rates = std::move(rates);
  return s;
}

RateSchedule RateSchedule::fixed_uniform(int dim, double rate) {
  return fixed(Vec::Constant(dim, rate));
}

RateSchedule RateSchedule::adaptive(double cap) {
  if (!(cap > 0)) throw std::invalid_argument("rate schedule: cap must be positive");
  RateSchedule s;
  s.kind = Kind::Adaptive;
  s.cap = cap;
  return s;
}

MsMwc::MsMwc(MsMwcConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.region.validate();
  if (cfg_.dim != cfg_.region.dim)
    throw std::invalid_argument("msmwc: dim/region mismatch");
  if (cfg_.horizon < 1) throw std::invalid_argument("msmwc: horizon must be positive");
  if (cfg_.rates.kind == RateSchedule::Kind::Fixed) {
    if (cfg_.rates.fixed_rates.size() != cfg_.dim)
      throw std::invalid_argument("msmwc: fixed-rate vector dimension mismatch");
  } else {
    // Adaptive rates use ln(d*T); require d*T >= 3 so the log stays above 1.
    if (static_cast<double>(cfg_.dim) * static_cast<double>(cfg_.horizon) < 3)
      throw std::invalid_argument("msmwc: adaptive schedule needs d*T >= 3");
  }
  log_dT_ = std::log(static_cast<double>(cfg_.dim) * static_cast<double>(cfg_.horizon));

  if (cfg_.initial_anchor.size() == 0) {
    const int n = cfg_.region.support_size();
    anchor_ = Vec::Zero(cfg_.dim);
    for (int i = 0; i < cfg_.dim; ++i)
      if (cfg_.region.support[static_cast<size_t>(i)]) anchor_[i] = 1.0 / n;
  } else {
    if (cfg_.initial_anchor.size() != cfg_.dim)
      throw std::invalid_argument("msmwc: initial anchor dimension mismatch");
    double sum = 0;
    for (int i = 0; i < cfg_.dim; ++i) {
      const bool on = cfg_.region.support[static_cast<size_t>(i)] != 0;
      const double a = cfg_.initial_anchor[i];
      if (on && !(a > 0))
        throw std::invalid_argument("msmwc: initial anchor must be positive on the support");
      if (!on && a != 0)
        throw std::invalid_argument("msmwc: initial anchor mass off support");
      sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("msmwc: initial anchor must sum to 1");
    anchor_ = cfg_.initial_anchor;
  }
  err_sq_ = Vec::Zero(cfg_.dim);
}

void MsMwc::set_region(const SimplexRegion& region) {
  if (phase() != Phase::Begin)
    throw std::logic_error("msmwc: region change only between rounds");
  region.validate();
  if (region.dim != cfg_.dim) throw std::invalid_argument("msmwc: region dimension mismatch");
  double kept = 0;
  for (int i = 0; i < cfg_.dim; ++i) {
    if (region.support[static_cast<size_t>(i)] && !(anchor_[i] > 0))
      throw std::invalid_argument("msmwc: new support includes a coordinate without anchor mass");
    if (region.support[static_cast<size_t>(i)]) kept += anchor_[i];
  }
  if (!(kept > 0)) throw std::invalid_argument("msmwc: new support carries no anchor mass");
  for (int i = 0; i < cfg_.dim; ++i)
    anchor_[i] = region.support[static_cast<size_t>(i)] ? anchor_[i] / kept : 0.0;
  cfg_.region = region;
}

Vec MsMwc::compute_rates() const {
  if (cfg_.rates.kind == RateSchedule::Kind::Fixed) return cfg_.rates.fixed_rates;
  Vec eta(cfg_.dim);
  for (int i = 0; i < cfg_.dim; ++i) {
    const double s = err_sq_[i];
    eta[i] = s > 0 ? std::min(std::sqrt(log_dT_ / s), cfg_.rates.cap) : cfg_.rates.cap;
  }
  return eta;
}

Vec MsMwc::do_begin(const Vec& hint) {
  rates_ = compute_rates();
  play_ = solve_weights({anchor_, hint, rates_, cfg_.region}, cfg_.solve_options);
  if (cfg_.record_history) {
    MsMwcHistoryRound h;
    h.rates = rates_;
    h.anchor_before = anchor_;
    h.decision = play_;
    history_.push_back(std::move(h));
  }
  return play_;
}

void MsMwc::do_end(const Vec& loss, const Vec& target, const Vec&) {
  const Vec err = loss - target;
  const Vec err_sq = err.cwiseProduct(err);
  const Vec cost = loss + 32.0 * rates_.cwiseProduct(err_sq);
  anchor_ = solve_weights({anchor_, cost, rates_, cfg_.region}, cfg_.solve_options);
  err_sq_ += err_sq;
  if (cfg_.record_history) {
    history_.back().loss = loss;
    history_.back().target = target;
  }
}

}  // namespace msmwc
