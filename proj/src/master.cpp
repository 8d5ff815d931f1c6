#include "msmwc/master.hpp"

#include <cmath>

namespace msmwc {

Master::Master(std::vector<ExpertSlot> experts, MasterConfig cfg, int decision_dim)
    : experts_(std::move(experts)), cfg_(std::move(cfg)), decision_dim_(decision_dim) {
  const int K = num_experts();
  if (K == 0) throw std::invalid_argument("master: empty expert pool");
  if (decision_dim_ <= 0) throw std::invalid_argument("master: bad decision dimension");
  if (cfg_.horizon < 1) throw std::invalid_argument("master: horizon must be positive");
  if (cfg_.lower_bound < 0 || cfg_.lower_bound * K > 1.0 + 1e-12)
    throw std::invalid_argument("master: infeasible aggregation lower bound");
  if (cfg_.hint_clamp.size() != 0 && cfg_.hint_clamp.size() != decision_dim_)
    throw std::invalid_argument("master: hint clamp dimension mismatch");

  Vec etas(K), prior(K);
  double prior_sum = 0;
  for (int k = 0; k < K; ++k) {
    auto& slot = experts_[static_cast<size_t>(k)];
    if (!slot.base) throw std::invalid_argument("master: null base learner");
    if (slot.base->dim() != decision_dim_)
      throw std::invalid_argument("master: base decision dimension mismatch");
    if (!(slot.eta > 0)) throw std::invalid_argument("master: rates must be positive");
    etas[k] = slot.eta;
    prior[k] = slot.eta * slot.eta;
    prior_sum += prior[k];
  }
  prior /= prior_sum;

  active_.assign(static_cast<size_t>(K), 1);
  MsMwcConfig inner_cfg;
  inner_cfg.dim = K;
  inner_cfg.horizon = cfg_.horizon;
  inner_cfg.region = active_region();
  inner_cfg.initial_anchor = prior;
  inner_cfg.rates = RateSchedule::fixed(etas);
  inner_ = std::make_unique<MsMwc>(std::move(inner_cfg));

  audit_.eta.assign(static_cast<size_t>(K), 0);
  for (int k = 0; k < K; ++k) audit_.eta[static_cast<size_t>(k)] = etas[k];
  audit_.cum_g.assign(static_cast<size_t>(K), 0);
  audit_.cum_err_sq.assign(static_cast<size_t>(K), 0);
  audit_.cum_e_sq.assign(static_cast<size_t>(K), 0);
  audit_.sum_loss = Vec::Zero(decision_dim_);
  base_decisions_.resize(static_cast<size_t>(K));
}

SimplexRegion Master::active_region() const {
  SimplexRegion r;
  r.dim = num_experts();
  r.support = active_;
  r.lower_bounds = Vec::Zero(r.dim);
  if (cfg_.lower_bound > 0)
    for (int k = 0; k < r.dim; ++k)
      if (active_[static_cast<size_t>(k)]) r.lower_bounds[k] = cfg_.lower_bound;
  r.validate();
  return r;
}

void Master::set_active(const std::vector<char>& active) {
  if (phase() != Phase::Begin)
    throw std::logic_error("master: active set changes only between rounds");
  if (active.size() != active_.size())
    throw std::invalid_argument("master: active mask size mismatch");
  bool shrinks = false;
  for (size_t k = 0; k < active.size(); ++k) {
    if (active[k] && !active_[k])
      throw std::invalid_argument("master: experts cannot be reactivated");
    if (!active[k] && active_[k]) shrinks = true;
  }
  if (!shrinks) return;
  active_ = active;
  inner_->set_region(active_region());
}

Vec Master::do_begin(const Vec& hint) {
  Vec m = hint;
  if (cfg_.hint_clamp.size() != 0) {
    for (int i = 0; i < decision_dim_; ++i) {
      const double c = cfg_.hint_clamp[i];
      if (m[i] > c || m[i] < -c) {
        m[i] = std::clamp(m[i], -c, c);
        ++clamp_count_;
      }
    }
  }
  m_cur_ = m;
  const int K = num_experts();
  Vec h = Vec::Zero(K);
  for (int k = 0; k < K; ++k) {
    if (!active_[static_cast<size_t>(k)]) continue;
    base_decisions_[static_cast<size_t>(k)] = experts_[static_cast<size_t>(k)].base->begin_round(m);
    h[k] = base_decisions_[static_cast<size_t>(k)].dot(m);
  }
  p_cur_ = inner_->begin_round(h);
  play_ = Vec::Zero(decision_dim_);
  for (int k = 0; k < K; ++k)
    if (active_[static_cast<size_t>(k)])
      play_ += p_cur_[k] * base_decisions_[static_cast<size_t>(k)];
  if (cfg_.record_history) {
    MasterHistoryRound r;
    r.p = p_cur_;
    r.h = h;
    history_.push_back(std::move(r));
  }
  return play_;
}

void Master::do_end(const Vec& loss, const Vec& target, const Vec&) {
  Vec m = target;
  if (cfg_.hint_clamp.size() != 0)
    for (int i = 0; i < decision_dim_; ++i) m[i] = std::clamp(m[i], -cfg_.hint_clamp[i], cfg_.hint_clamp[i]);
  const int K = num_experts();
  Vec g = Vec::Zero(K), e = Vec::Zero(K);
  for (int k = 0; k < K; ++k) {
    if (!active_[static_cast<size_t>(k)]) continue;
    const Vec& wk = base_decisions_[static_cast<size_t>(k)];
    experts_[static_cast<size_t>(k)].base->end_round(loss, m, play_);
    g[k] = wk.dot(loss);
    const double gh = g[k] - wk.dot(m);
    e[k] = cfg_.recentered ? (wk - play_).dot(loss - m) : gh;
    audit_.cum_g[static_cast<size_t>(k)] += g[k];
    audit_.cum_err_sq[static_cast<size_t>(k)] += gh * gh;
    audit_.cum_e_sq[static_cast<size_t>(k)] += e[k] * e[k];
  }
  // The inner step needs cost g + 32*eta*e^2, i.e. error g - target = e.
  inner_->end_round(g, g - e);
  audit_.sum_loss += loss;
  audit_.learner_cumulative += play_.dot(loss);
  ++audit_.rounds;
  if (cfg_.record_history) {
    history_.back().g = g;
    history_.back().e = e;
  }
}

}  // namespace msmwc
