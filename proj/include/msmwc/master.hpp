#pragma once

#include "msmwc/msmwc.hpp"

#include <memory>

namespace msmwc {

// One pooled base learner: a fixed rate for the aggregator's entropy geometry
// plus the learner itself (an expert-problem instance or a linear-losses one).
struct ExpertSlot {
  double eta = 0;
  std::unique_ptr<RoundProtocol> base;
  std::string label;
};

struct MasterConfig {
  long horizon = 0;
  // Admissible set for the aggregation weights each round: the full simplex,
  // or the simplex truncated at `lower_bound` (over the active experts).
  double lower_bound = 0;
  // Recentered correction: e_k = <w^k - play, loss - target> instead of
  // <w^k, loss - target>. Used by the recentered linear-losses pool.
  bool recentered = false;
  // Optional per-coordinate clamp applied to incoming hints (multi-scale
  // pools assume |target_i| <= ranges_i at ingestion).
  Vec hint_clamp;
  bool record_history = false;
};

struct MasterHistoryRound {
  Vec p;       // aggregation weights played
  Vec h;       // per-expert hint values (from the completed target)
  Vec g;       // per-expert realized losses
  Vec e;       // correction errors
};

// Per-expert running sums the closed-form aggregation bounds need.
struct MasterAudit {
  std::vector<double> eta;
  std::vector<double> cum_g;       // sum_t <w^k_t, loss_t>
  std::vector<double> cum_err_sq;  // sum_t <w^k_t, loss_t - target_t>^2
  std::vector<double> cum_e_sq;    // sum_t e_{t,k}^2 (differs under recentering)
  Vec sum_loss;
  double learner_cumulative = 0;
  long rounds = 0;
};

// Aggregates a pool of base learners by running the entropy mirror-descent
// step over the expert simplex with per-expert fixed rates. Initial weights
// are proportional to eta_k^2. All active bases are driven every round; bases
// removed by set_active stay frozen.
class Master : public RoundProtocol {
 public:
  Master(std::vector<ExpertSlot> experts, MasterConfig cfg, int decision_dim);

  int dim() const override { return decision_dim_; }
  int num_experts() const { return static_cast<int>(experts_.size()); }

  // Shrink the active expert set (between rounds only). Reactivation is
  // rejected; anchor mass of removed experts is renormalized away.
  void set_active(const std::vector<char>& active);
  const std::vector<char>& active() const { return active_; }

  const Vec& weights() const { return p_cur_; }   // last aggregation weights
  const Vec& play() const { return play_; }       // last aggregated decision
  double eta(int k) const { return experts_[static_cast<size_t>(k)].eta; }
  const std::string& label(int k) const { return experts_[static_cast<size_t>(k)].label; }
  RoundProtocol& base(int k) { return *experts_[static_cast<size_t>(k)].base; }
  const MsMwc& inner() const { return *inner_; }
  const MasterAudit& audit() const { return audit_; }
  long hint_clamp_count() const { return clamp_count_; }
  const std::vector<MasterHistoryRound>& history() const { return history_; }

 protected:
  Vec do_begin(const Vec& hint) override;
  void do_end(const Vec& loss, const Vec& target, const Vec& center) override;

 private:
  SimplexRegion active_region() const;
  std::vector<ExpertSlot> experts_;
  MasterConfig cfg_;
  int decision_dim_;
  std::vector<char> active_;
  std::unique_ptr<MsMwc> inner_;  // state over the expert simplex
  std::vector<Vec> base_decisions_;
  Vec m_cur_;
  Vec p_cur_;
  Vec play_;
  MasterAudit audit_;
  long clamp_count_ = 0;
  std::vector<MasterHistoryRound> history_;
};

}  // namespace msmwc
