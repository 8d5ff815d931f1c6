#include "msmwc/predictors.hpp"

namespace msmwc {

PredictorKind PredictorKind::parse(const std::string& name) {
  const auto simple = [](const std::string& s, bool allow_recentered) {
    if (s == "zero") return PredictorType::Zero;
    if (s == "avg" || s == "running_average") return PredictorType::RunningAverage;
    if (s == "last" || s == "last_loss") return PredictorType::LastLoss;
    if (s == "bcast1" || s == "expert_one_broadcast") return PredictorType::ExpertOneBroadcast;
    if (s == "bcast_self" || s == "own_loss_broadcast") return PredictorType::OwnLossBroadcast;
    if (allow_recentered && (s == "opt_recentered" || s == "optimistic_recentered"))
      return PredictorType::OptimisticRecentered;
    throw std::invalid_argument("predictor: unknown kind '" + s + "'");
  };
  PredictorKind k;
  const auto colon = name.find(':');
  if (colon == std::string::npos) {
    k.type = simple(name, true);
    if (k.type == PredictorType::OptimisticRecentered) k.inner = PredictorType::LastLoss;
    return k;
  }
  const std::string head = name.substr(0, colon), tail = name.substr(colon + 1);
  if (simple(head, true) != PredictorType::OptimisticRecentered)
    throw std::invalid_argument("predictor: only the recentered kind takes an inner predictor");
  k.type = PredictorType::OptimisticRecentered;
  k.inner = simple(tail, false);
  if (k.inner == PredictorType::ExpertOneBroadcast || k.inner == PredictorType::OwnLossBroadcast)
    throw std::invalid_argument("predictor: inner predictor must be playable before the round");
  return k;
}

std::string PredictorKind::name() const {
  const auto base = [](PredictorType t) -> std::string {
    switch (t) {
      case PredictorType::Zero: return "zero";
      case PredictorType::RunningAverage: return "avg";
      case PredictorType::LastLoss: return "last";
      case PredictorType::ExpertOneBroadcast: return "bcast1";
      case PredictorType::OwnLossBroadcast: return "bcast_self";
      case PredictorType::OptimisticRecentered: return "opt_recentered";
    }
    return "?";
  };
  if (type == PredictorType::OptimisticRecentered) return base(type) + ":" + base(inner);
  return base(type);
}

bool PredictorKind::broadcast() const {
  return type == PredictorType::ExpertOneBroadcast || type == PredictorType::OwnLossBroadcast ||
         type == PredictorType::OptimisticRecentered;
}

double PredictorKind::rate_cap() const {
  // The recentered target can reach magnitude 3 for losses in [-1, 1], so its
  // schedule halves the cap.
  return type == PredictorType::OptimisticRecentered ? 1.0 / 128.0 : 1.0 / 64.0;
}

Predictor::Predictor(PredictorKind kind, int dim) : kind_(kind), dim_(dim) {
  if (dim <= 0) throw std::invalid_argument("predictor: dim must be positive");
  sum_ = Vec::Zero(dim);
  last_ = Vec::Zero(dim);
}

Vec Predictor::plain_hint(PredictorType type) const {
  switch (type) {
    case PredictorType::Zero: return Vec::Zero(dim_);
    case PredictorType::RunningAverage:
      return seen_ > 0 ? Vec(sum_ / static_cast<double>(seen_)) : Vec::Zero(dim_);
    case PredictorType::LastLoss: return last_;
    default: break;
  }
  throw std::logic_error("predictor: kind has no pre-round value");
}

Vec Predictor::pre_hint() const {
  switch (kind_.type) {
    case PredictorType::Zero:
    case PredictorType::RunningAverage:
    case PredictorType::LastLoss: return plain_hint(kind_.type);
    case PredictorType::ExpertOneBroadcast:
    case PredictorType::OwnLossBroadcast: return Vec::Zero(dim_);
    case PredictorType::OptimisticRecentered: return plain_hint(kind_.inner);
  }
  throw std::logic_error("predictor: unreachable");
}

Vec Predictor::correction_target(const Vec& pre, const Vec& decision, const Vec& loss) const {
  if (pre.size() != dim_ || loss.size() != dim_)
    throw std::invalid_argument("predictor: dimension mismatch");
  switch (kind_.type) {
    case PredictorType::Zero:
    case PredictorType::RunningAverage:
    case PredictorType::LastLoss: return pre;
    case PredictorType::ExpertOneBroadcast: return Vec::Constant(dim_, loss[0]);
    case PredictorType::OwnLossBroadcast: {
      if (decision.size() != dim_) throw std::invalid_argument("predictor: dimension mismatch");
      return Vec::Constant(dim_, decision.dot(loss));
    }
    case PredictorType::OptimisticRecentered: {
      if (decision.size() != dim_) throw std::invalid_argument("predictor: dimension mismatch");
      const double offset = decision.dot(loss - pre);
      return pre + Vec::Constant(dim_, offset);
    }
  }
  throw std::logic_error("predictor: unreachable");
}

void Predictor::observe(const Vec& loss) {
  if (loss.size() != dim_) throw std::invalid_argument("predictor: dimension mismatch");
  sum_ += loss;
  last_ = loss;
  ++seen_;
}

}  // namespace msmwc
