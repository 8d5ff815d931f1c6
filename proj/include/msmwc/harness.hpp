#pragma once

#include "msmwc/bounds.hpp"
#include "msmwc/olo_suites.hpp"
#include "msmwc/predictors.hpp"
#include "msmwc/scale_adaptation.hpp"

#include <cstdint>
#include <functional>
#include <memory>

namespace msmwc {

// Counter-based generator: every draw is a pure function of
// (seed, round, coordinate, salt), so parallel runs share no stream state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t integer(long t, long i, std::uint64_t salt = 0) const;
  double uniform(long t, long i, std::uint64_t salt = 0) const;    // [0, 1)
  double symmetric(long t, long i, std::uint64_t salt = 0) const;  // [-1, 1)
  // +1 with probability p_plus, else -1.
  double pm1(double p_plus, long t, long i, std::uint64_t salt = 0) const;

 private:
  std::uint64_t seed_;
};

// Synthetic loss-sequence families covering every regime the learners target.
struct EnvironmentSpec {
  std::string kind;  // gap_stochastic | bernstein | adversarial_uniform |
                     // switching | drifting | multiscale | growing_range |
                     // interval_trap | subspace
  int d = 0;
  long T = 0;
  std::uint64_t seed = 0;

  double gap = 0.1;     // per-round mean separation from the planted best
  int i_star = 0;       // planted best coordinate (1 for growing_range)
  double kappa = 1.0;   // variance-condition exponent (bernstein)
  double mean_gap = 0;  // bernstein mean; 0 = gap^(1/kappa)
  std::vector<std::pair<long, long>> partition;  // switching; empty = equal split
  std::vector<int> segment_best;                 // switching; empty = round-robin
  int segments = 0;                              // switching equal-split count
  double drift_step = 0.05;  // drifting step scale (also bounds round 1)
  Vec ranges;                // multiscale per-coordinate ranges
  double scale = 1;          // adversarial_uniform amplitude
  int subspace_rank = 2;     // subspace: dimension losses are confined to
  double base_scale = 1;     // growing_range pre-jump amplitude
  double jump_factor = 0;    // growing_range amplitude multiplier; 0 = none
  long jump_round = 0;       // growing_range jump position; 0 = T/2

  void validate() const;
};

class Environment {
 public:
  explicit Environment(EnvironmentSpec spec);

  const EnvironmentSpec& spec() const { return spec_; }
  int d() const { return spec_.d; }
  long T() const { return spec_.T; }

  Vec loss(long t) const;  // t in [1, T]; deterministic given the spec

  // Planted structure, for audits.
  int planted_best() const;  // -1 when the kind plants none
  const std::vector<std::pair<long, long>>& partition() const { return partition_; }
  const std::vector<int>& segment_best() const { return seg_best_; }
  double scale_at(long t) const;   // growing_range amplitude schedule
  Vec coordinate_ranges() const;   // per-coordinate |loss| caps
  double trap_epsilon() const { return eps_; }
  long trap_length() const { return L_; }
  long trap_flip_segment() const { return flip_segment_; }
  std::pair<long, long> trap_interval() const;

 private:
  long segment_of(long t) const;
  Vec drift_loss(long t) const;
  EnvironmentSpec spec_;
  CounterRng rng_;
  std::vector<std::pair<long, long>> partition_;
  std::vector<int> seg_best_;
  double bern_amp_ = 0, bern_mean_ = 0;
  double eps_ = 0;
  long L_ = 0, flip_segment_ = 0;
  Mat subspace_basis_;
  mutable std::vector<Vec> drift_cache_;
};

// Fixed-rate exponential weights over the full simplex (rate < 1 required;
// rate 0 plays uniform forever).
class HedgeLearner : public RoundProtocol {
 public:
  HedgeLearner(int dim, double rate);
  int dim() const override { return static_cast<int>(w_.size()); }
  double rate() const { return rate_; }

 protected:
  Vec do_begin(const Vec& hint) override;
  void do_end(const Vec& loss, const Vec& target, const Vec& center) override;

 private:
  double rate_;
  Vec w_;
};

// Per-expert optimally tuned fixed-rate reference: the minimized value of
// ln(d)/rate + rate * sum_t loss_{t,i}^2, i.e. 2*sqrt(ln(d) * sum loss^2).
Vec oracle_tuned_reference(const std::vector<Vec>& losses);

// Which algorithm to run and how to parameterize it.
struct LearnerSpec {
  std::string algo = "adaptive";
  // adaptive: single per-coordinate-rate simplex learner (the headline one)
  // fixed: same, constant rate `fixed_rate`
  // hedge: fixed-rate exponential weights baseline
  // kl | multiscale | switching | unknown_range: simplex pools
  // ons | gd | adagrad | metagrad | union3: ball pools for linear losses
  // onsul: range-adaptive ball pool; onsuld: diameter-and-range-adaptive
  double fixed_rate = 0;
  double rate_cap = 0;  // 0 = matched to the predictor kind
  Vec prior;            // kl / unknown_range (uniform when empty)
  Vec ranges;           // multiscale per-coordinate ranges
  double B0 = 1;        // unknown_range / onsul / onsuld initial range
  double D = 1;         // ball radius (olo pools)
  double hedge_rate = 0.25;
  int max_adagrad_scale_values = 0;
  bool record_history = false;

  bool olo() const;
};

// A runnable learner with observation points into the wrapper stack.
struct LearnerHandle {
  std::unique_ptr<RoundProtocol> protocol;
  MsMwc* single = nullptr;
  Master* pool = nullptr;
  RestartWrapper* restart = nullptr;
  DoublingWrapper* doubling = nullptr;
  bool olo = false;

  std::vector<ScaleEvent> events() const;
  long hint_clamps() const;
};

LearnerHandle make_learner(const LearnerSpec& spec, int d, long T,
                           double default_rate_cap = 1.0 / 64.0);

struct RunConfig {
  EnvironmentSpec env;
  LearnerSpec learner;
  PredictorKind predictor;
  std::vector<long> checkpoints;       // default {T/4, T/2, T}
  std::vector<std::string> bound_ids;  // default per learner kind
  double audit_expert = 50;
  double audit_olo = 100;
};

struct RunResult {
  RegretTrace trace;
  std::vector<std::pair<std::string, Vec>> comparators;  // label -> u
  std::vector<BoundReport> reports;
  std::vector<ScaleEvent> events;
  long hint_clamps = 0;
  double learner_cumulative = 0;
  bool olo = false;
  // Scale-wrapper telemetry (zero when the learner has no wrapper).
  double truncation_damage = 0;
  double final_range = 0;
  double final_diameter = 0;
};

// Drives the two-phase protocol for T rounds, records the trace, annotates
// restart/doubling events, and evaluates the configured bound audits at each
// checkpoint. Deterministic given the config.
RunResult run(const RunConfig& cfg);

std::vector<std::string> default_bound_ids(const std::string& algo);

// f(i) for i in [0, n), on up to MSMWC_THREADS workers (hardware concurrency
// when the variable is unset). Exceptions propagate to the caller.
void parallel_for(long n, const std::function<void(long)>& f);
int thread_budget();

}  // namespace msmwc
