#pragma once

#include "msmwc/core_types.hpp"

namespace msmwc {

// The prediction families. Broadcast kinds are split into the part playable
// before the round (the pre-hint the decision step sees) and a constant-offset
// completion once the loss is revealed; constant shifts do not change the
// decision step, so the split is behavior-preserving.
enum class PredictorType {
  Zero,
  RunningAverage,      // (1/(t-1)) * sum_{s<t} loss_s; zero at t=1
  LastLoss,            // loss_{t-1}; zero at t=1
  ExpertOneBroadcast,  // target = loss_{t,0} * ones (pre-hint zero)
  OwnLossBroadcast,    // target = <w_t, loss_t> * ones (pre-hint zero)
  OptimisticRecentered // target = inner_t + <w_t, loss_t - inner_t> * ones
};

struct PredictorKind {
  PredictorType type = PredictorType::Zero;
  PredictorType inner = PredictorType::Zero;  // only for OptimisticRecentered

  static PredictorKind parse(const std::string& name);
  std::string name() const;
  bool broadcast() const;
  // Rate cap the adaptive schedule pairs with this predictor.
  double rate_cap() const;
};

// Stateful prediction stream: pre_hint() before the decision,
// correction_target() once the loss is known, observe() to advance.
class Predictor {
 public:
  Predictor(PredictorKind kind, int dim);

  const PredictorKind& kind() const { return kind_; }
  int dim() const { return dim_; }

  Vec pre_hint() const;
  Vec correction_target(const Vec& pre, const Vec& decision, const Vec& loss) const;
  void observe(const Vec& loss);

 private:
  Vec plain_hint(PredictorType type) const;
  PredictorKind kind_;
  int dim_;
  long seen_ = 0;
  Vec sum_;
  Vec last_;
};

}  // namespace msmwc
