#include "msmwc/core_types.hpp"

#include <cmath>

namespace msmwc {

LossObservation::LossObservation(Vec l, Vec h) : loss(std::move(l)), hint(std::move(h)) {
  if (loss.size() == 0) throw std::invalid_argument("loss observation: empty loss");
  if (hint.size() == 0) hint = Vec::Zero(loss.size());
  if (hint.size() != loss.size())
    throw std::invalid_argument("loss observation: loss/hint dimension mismatch");
  if (!loss.allFinite() || !hint.allFinite())
    throw std::invalid_argument("loss observation: non-finite entries");
  error = loss - hint;
}

SimplexRegion SimplexRegion::full(int dim) {
  SimplexRegion r;
  r.dim = dim;
  r.support.assign(static_cast<size_t>(dim), 1);
  r.lower_bounds = Vec::Zero(dim);
  r.validate();
  return r;
}

SimplexRegion SimplexRegion::truncated(int dim, double bound) {
  SimplexRegion r;
  r.dim = dim;
  r.support.assign(static_cast<size_t>(dim), 1);
  r.lower_bounds = Vec::Constant(dim, bound);
  r.validate();
  return r;
}

SimplexRegion SimplexRegion::restricted(int dim, const std::vector<int>& support_set) {
  SimplexRegion r;
  r.dim = dim;
  r.support.assign(static_cast<size_t>(dim), 0);
  r.lower_bounds = Vec::Zero(dim);
  for (int i : support_set) {
    if (i < 0 || i >= dim) throw std::invalid_argument("region: support index out of range");
    r.support[static_cast<size_t>(i)] = 1;
  }
  r.validate();
  return r;
}

void SimplexRegion::validate() const {
  if (dim <= 0) throw std::invalid_argument("region: dim must be positive");
  if (static_cast<int>(support.size()) != dim || lower_bounds.size() != dim)
    throw std::invalid_argument("region: field dimension mismatch");
  double mass = 0;
  bool any = false;
  for (int i = 0; i < dim; ++i) {
    const double b = lower_bounds[i];
    if (!std::isfinite(b) || b < 0) throw std::invalid_argument("region: bad lower bound");
    if (support[static_cast<size_t>(i)]) {
      any = true;
      mass += b;
    } else if (b != 0) {
      throw std::invalid_argument("region: nonzero bound off support");
    }
  }
  if (!any) throw std::invalid_argument("region: empty support");
  if (mass > 1.0 + 1e-12) throw std::invalid_argument("region: lower bounds exceed unit mass");
}

bool SimplexRegion::contains(const Vec& w, double tol) const {
  if (w.size() != dim) return false;
  double sum = 0;
  for (int i = 0; i < dim; ++i) {
    if (!support[static_cast<size_t>(i)]) {
      if (std::abs(w[i]) > tol) return false;
      continue;
    }
    if (w[i] < lower_bounds[i] - tol) return false;
    sum += w[i];
  }
  return std::abs(sum - 1.0) <= tol;
}

int SimplexRegion::support_size() const {
  int n = 0;
  for (char s : support) n += (s != 0);
  return n;
}

bool SimplexRegion::same_as(const SimplexRegion& other) const {
  return dim == other.dim && support == other.support && lower_bounds == other.lower_bounds;
}

Vec RoundProtocol::begin_round(const Vec& hint) {
  if (phase_ != Phase::Begin)
    throw std::logic_error("protocol: begin_round called twice without end_round");
  Vec h = hint.size() == 0 ? Vec::Zero(dim()) : hint;
  if (h.size() != dim()) throw std::invalid_argument("protocol: hint dimension mismatch");
  if (!h.allFinite()) throw std::invalid_argument("protocol: non-finite hint");
  Vec w = do_begin(h);
  pending_hint_ = std::move(h);
  phase_ = Phase::End;
  return w;
}

void RoundProtocol::end_round(const Vec& loss, const Vec& target, const Vec& center) {
  if (phase_ != Phase::End)
    throw std::logic_error("protocol: end_round without a matching begin_round");
  if (loss.size() != dim()) throw std::invalid_argument("protocol: loss dimension mismatch");
  if (!loss.allFinite()) throw std::invalid_argument("protocol: non-finite loss");
  if (target.size() != dim()) throw std::invalid_argument("protocol: target dimension mismatch");
  if (!target.allFinite()) throw std::invalid_argument("protocol: non-finite target");
  do_end(loss, target, center);
  phase_ = Phase::Begin;
  ++round_;
}

void RoundProtocol::end_round(const Vec& loss, const Vec& target) {
  end_round(loss, target, Vec());
}

void RoundProtocol::end_round(const Vec& loss) {
  if (phase_ != Phase::End)
    throw std::logic_error("protocol: end_round without a matching begin_round");
  end_round(loss, pending_hint_, Vec());
}

void RegretTrace::add_round(Vec decision, Vec loss, Vec target, std::string event) {
  if (loss.size() != dim_) throw std::invalid_argument("trace: loss dimension mismatch");
  if (decision.size() != dim_) throw std::invalid_argument("trace: decision dimension mismatch");
  if (target.size() == 0) target = Vec::Zero(dim_);
  if (target.size() != dim_) throw std::invalid_argument("trace: target dimension mismatch");
  TraceRound r;
  r.learner_loss = decision.dot(loss);
  r.decision = std::move(decision);
  r.loss = std::move(loss);
  r.target = std::move(target);
  r.event = std::move(event);
  rounds_.push_back(std::move(r));
}

void RegretTrace::set_event(long t, std::string event) {
  if (t < 1 || t > rounds()) throw std::invalid_argument("trace: event round out of range");
  rounds_[static_cast<size_t>(t - 1)].event = std::move(event);
}

const TraceRound& RegretTrace::round(long t) const {
  if (t < 1 || t > rounds()) throw std::invalid_argument("trace: round out of range");
  return rounds_[static_cast<size_t>(t - 1)];
}

std::pair<long, long> RegretTrace::resolve(std::optional<std::pair<long, long>> interval) const {
  if (rounds_.empty()) throw std::invalid_argument("trace: empty");
  const long T = rounds();
  if (!interval) return {1, T};
  auto [lo, hi] = *interval;
  if (lo < 1 || hi > T || lo > hi) throw std::invalid_argument("trace: bad interval");
  return {lo, hi};
}

double RegretTrace::learner_cumulative(std::optional<std::pair<long, long>> interval) const {
  auto [lo, hi] = resolve(interval);
  double s = 0;
  for (long t = lo; t <= hi; ++t) s += rounds_[static_cast<size_t>(t - 1)].learner_loss;
  return s;
}

double RegretTrace::comparator_cumulative(const Vec& u,
                                          std::optional<std::pair<long, long>> interval) const {
  if (u.size() != dim_) throw std::invalid_argument("trace: comparator dimension mismatch");
  auto [lo, hi] = resolve(interval);
  double s = 0;
  for (long t = lo; t <= hi; ++t) s += u.dot(rounds_[static_cast<size_t>(t - 1)].loss);
  return s;
}

double RegretTrace::regret(const Vec& u, std::optional<std::pair<long, long>> interval) const {
  return learner_cumulative(interval) - comparator_cumulative(u, interval);
}

double regret(const RegretTrace& trace, const Vec& comparator,
              std::optional<std::pair<long, long>> interval) {
  return trace.regret(comparator, interval);
}

}  // namespace msmwc
