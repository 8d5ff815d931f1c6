#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace msmwc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One observed loss vector together with the prediction it was measured against.
struct LossObservation {
  Vec loss;
  Vec hint;
  Vec error;  // loss - hint

  LossObservation(Vec l, Vec h);
};

// Probability simplex over `dim` coordinates, restricted to a support mask and
// per-coordinate lower bounds. Feasible iff the supported bounds sum to <= 1.
struct SimplexRegion {
  int dim = 0;
  std::vector<char> support;  // 1 = coordinate may carry mass
  Vec lower_bounds;           // 0 off support

  static SimplexRegion full(int dim);
  static SimplexRegion truncated(int dim, double bound);
  static SimplexRegion restricted(int dim, const std::vector<int>& support_set);

  void validate() const;
  bool contains(const Vec& w, double tol = 1e-9) const;
  int support_size() const;
  bool same_as(const SimplexRegion& other) const;
};

enum class Phase { Begin, End };

// Two-phase round protocol shared by every learner in this library:
//   decision = begin_round(hint);  ...observe loss...;  end_round(loss, target, center)
// `target` is the completed prediction the correction terms use (equals `hint`
// unless a broadcast predictor finishes it after the loss is revealed).
// `center` is the aggregate play, consumed only by recentered base learners.
// Calls must strictly alternate starting with begin_round.
class RoundProtocol {
 public:
  virtual ~RoundProtocol() = default;

  Vec begin_round(const Vec& hint);
  void end_round(const Vec& loss, const Vec& target, const Vec& center);
  void end_round(const Vec& loss, const Vec& target);
  void end_round(const Vec& loss);  // target = the hint given at begin_round

  virtual int dim() const = 0;
  Phase phase() const { return phase_; }
  long round() const { return round_; }  // rounds completed

 protected:
  virtual Vec do_begin(const Vec& hint) = 0;
  virtual void do_end(const Vec& loss, const Vec& target, const Vec& center) = 0;

 private:
  Phase phase_ = Phase::Begin;
  long round_ = 0;
  Vec pending_hint_;
};

struct TraceRound {
  Vec decision;
  Vec loss;
  Vec target;
  double learner_loss = 0;
  std::string event;
};

// Full per-round record of a run: plays, losses, completed hints, and any
// restart/doubling events. Regret against arbitrary comparators is recomputed
// from the stored loss vectors.
class RegretTrace {
 public:
  explicit RegretTrace(int dim) : dim_(dim) {
    if (dim <= 0) throw std::invalid_argument("trace: dim must be positive");
  }

  void add_round(Vec decision, Vec loss, Vec target, std::string event = {});
  void set_event(long t, std::string event);  // t is 1-based

  int dim() const { return dim_; }
  long rounds() const { return static_cast<long>(rounds_.size()); }
  const TraceRound& round(long t) const;  // 1-based
  const std::vector<TraceRound>& all_rounds() const { return rounds_; }

  double learner_cumulative(std::optional<std::pair<long, long>> interval = {}) const;
  double comparator_cumulative(const Vec& u,
                               std::optional<std::pair<long, long>> interval = {}) const;
  // Reg(u) over [lo, hi] (1-based, inclusive); whole run when omitted.
  double regret(const Vec& u, std::optional<std::pair<long, long>> interval = {}) const;

 private:
  std::pair<long, long> resolve(std::optional<std::pair<long, long>> interval) const;
  int dim_;
  std::vector<TraceRound> rounds_;
};

double regret(const RegretTrace& trace, const Vec& comparator,
              std::optional<std::pair<long, long>> interval = {});

}  // namespace msmwc
