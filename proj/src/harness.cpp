#include "msmwc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <set>
#include <thread>

#include <Eigen/QR>

namespace msmwc {

namespace {

void fail(const std::string& what) { throw std::invalid_argument("harness: " + what); }

constexpr std::uint64_t kSaltLoss = 0x4c4f5353ULL;
constexpr std::uint64_t kSaltSign = 0x5349474eULL;
constexpr std::uint64_t kSaltFlip = 0x464c4950ULL;
constexpr std::uint64_t kSaltBasis = 0x42415349ULL;

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::integer(long t, long i, std::uint64_t salt) const {
  std::uint64_t h = mix64(seed_ + static_cast<std::uint64_t>(t));
  h = mix64(h + static_cast<std::uint64_t>(i));
  return mix64(h + salt);
}

double CounterRng::uniform(long t, long i, std::uint64_t salt) const {
  return static_cast<double>(integer(t, i, salt) >> 11) * 0x1.0p-53;
}

double CounterRng::symmetric(long t, long i, std::uint64_t salt) const {
  return 2.0 * uniform(t, i, salt) - 1.0;
}

double CounterRng::pm1(double p_plus, long t, long i, std::uint64_t salt) const {
  return uniform(t, i, salt) < p_plus ? 1.0 : -1.0;
}

namespace {

bool known_kind(const std::string& k) {
  static const std::set<std::string> kinds = {
      "gap_stochastic", "bernstein",     "adversarial_uniform",
      "switching",      "drifting",      "multiscale",
      "growing_range",  "interval_trap", "subspace"};
  return kinds.count(k) > 0;
}

double bernstein_mean(const EnvironmentSpec& s) {
  if (s.mean_gap > 0) return s.mean_gap;
  if (s.kappa <= 0) fail("bernstein: mean_gap required when kappa = 0");
  return std::pow(s.gap, 1.0 / s.kappa);
}

double bernstein_amplitude(const EnvironmentSpec& s) {
  return std::sqrt(std::pow(bernstein_mean(s), s.kappa) / s.gap);
}

}  // namespace

void EnvironmentSpec::validate() const {
  if (!known_kind(kind)) fail("unknown environment kind " + kind);
  if (d < 1) fail("d must be >= 1");
  if (T < 1) fail("T must be >= 1");
  const bool uses_gap = kind == "gap_stochastic" || kind == "bernstein" ||
                        kind == "switching" || kind == "growing_range";
  if (uses_gap && (gap <= 0 || gap > 1)) fail("gap must lie in (0, 1]");
  if (kind == "gap_stochastic" || kind == "bernstein") {
    if (i_star < 0 || i_star >= d) fail("planted best index out of range");
  }
  if (kind == "bernstein") {
    if (kappa < 0 || kappa > 1) fail("kappa must lie in [0, 1]");
    const double g = bernstein_mean(*this);
    if (g <= 0 || g > 1) fail("bernstein mean must lie in (0, 1]");
    if (bernstein_amplitude(*this) > 1 + 1e-12) {
      fail("bernstein amplitude exceeds 1; lower mean_gap or raise gap");
    }
  }
  if (kind == "adversarial_uniform" && scale <= 0) fail("scale must be positive");
  if (kind == "switching") {
    if (d < 2) fail("switching needs d >= 2");
    if (partition.empty() && segments < 1) fail("switching needs a partition or segments");
    if (!partition.empty()) {
      long prev = 0;
      for (const auto& [lo, hi] : partition) {
        if (lo != prev + 1 || hi < lo || hi > T) fail("partition must tile [1, T]");
        prev = hi;
      }
      if (prev != T) fail("partition must cover [1, T]");
    }
    if (!segment_best.empty()) {
      const std::size_t n = partition.empty() ? static_cast<std::size_t>(segments)
                                              : partition.size();
      if (segment_best.size() != n) fail("one planted best per segment required");
      for (int b : segment_best) {
        if (b < 0 || b >= d) fail("planted best index out of range");
      }
    }
  }
  if (kind == "drifting" && (drift_step <= 0 || drift_step > 1)) {
    fail("drift_step must lie in (0, 1]");
  }
  if (kind == "multiscale") {
    if (ranges.size() != d) fail("multiscale needs one range per coordinate");
    if (!(ranges.array() > 0).all()) fail("ranges must be positive");
  }
  if (kind == "growing_range") {
    if (d < 2) fail("growing_range needs d >= 2 (coordinate 0 carries the scale)");
    if (i_star < 1 || i_star >= d) fail("growing_range planted best must avoid coordinate 0");
    if (base_scale <= 0) fail("base_scale must be positive");
    if (jump_factor != 0 && jump_factor < 1) fail("jump_factor must be 0 or >= 1");
    if (jump_round < 0 || jump_round > T) fail("jump_round out of range");
  }
  if (kind == "interval_trap") {
    if (d != 2) fail("interval_trap is a two-expert construction");
    if (T < 1024) fail("interval_trap needs T >= 1024 (small-bias regime)");
  }
  if (kind == "subspace") {
    if (subspace_rank < 1 || subspace_rank > d) fail("subspace_rank out of range");
  }
}

Environment::Environment(EnvironmentSpec spec)
    : spec_(std::move(spec)), rng_(spec_.seed) {
  spec_.validate();
  if (spec_.kind == "bernstein") {
    bern_mean_ = bernstein_mean(spec_);
    bern_amp_ = bernstein_amplitude(spec_);
  }
  if (spec_.kind == "switching") {
    if (!spec_.partition.empty()) {
      partition_ = spec_.partition;
    } else {
      const long base = spec_.T / spec_.segments;
      const long extra = spec_.T % spec_.segments;
      long lo = 1;
      for (int j = 0; j < spec_.segments; ++j) {
        const long len = base + (j < extra ? 1 : 0);
        if (len < 1) fail("switching: more segments than rounds");
        partition_.push_back({lo, lo + len - 1});
        lo += len;
      }
    }
    if (!spec_.segment_best.empty()) {
      seg_best_ = spec_.segment_best;
    } else {
      for (std::size_t j = 0; j < partition_.size(); ++j) {
        seg_best_.push_back(static_cast<int>(j % spec_.d));
      }
    }
  }
  if (spec_.kind == "interval_trap") {
    eps_ = std::pow(static_cast<double>(spec_.T), -0.2);
    L_ = static_cast<long>(std::floor(std::pow(static_cast<double>(spec_.T), 0.3)));
    const long nseg = spec_.T / L_;
    flip_segment_ = 1 + static_cast<long>(rng_.integer(0, 0, kSaltFlip) %
                                          static_cast<std::uint64_t>(nseg));
    long lo = 1;
    for (long k = 1; k <= nseg; ++k) {
      const long hi = (k == nseg) ? spec_.T : k * L_;  // tail joins the last piece
      partition_.push_back({lo, hi});
      lo = hi + 1;
      seg_best_.push_back(k < flip_segment_ ? 1 : 0);
    }
  }
  if (spec_.kind == "subspace") {
    Mat raw(spec_.d, spec_.subspace_rank);
    for (int i = 0; i < spec_.d; ++i) {
      for (int r = 0; r < spec_.subspace_rank; ++r) {
        raw(i, r) = rng_.symmetric(i, r, kSaltBasis);
      }
    }
    Eigen::HouseholderQR<Mat> qr(raw);
    subspace_basis_ = qr.householderQ() * Mat::Identity(spec_.d, spec_.subspace_rank);
  }
}

long Environment::segment_of(long t) const {
  if (spec_.kind == "interval_trap") {
    const long nseg = static_cast<long>(partition_.size());
    return std::min((t - 1) / L_ + 1, nseg);
  }
  for (std::size_t j = 0; j < partition_.size(); ++j) {
    if (t <= partition_[j].second) return static_cast<long>(j + 1);
  }
  fail("round past the partition");
  return 0;
}

double Environment::scale_at(long t) const {
  if (spec_.kind != "growing_range") return coordinate_ranges().maxCoeff();
  const long jump = spec_.jump_round > 0 ? spec_.jump_round : spec_.T / 2;
  const bool jumped = spec_.jump_factor > 0 && t >= jump;
  return spec_.base_scale * (jumped ? spec_.jump_factor : 1.0);
}

Vec Environment::drift_loss(long t) const {
  while (static_cast<long>(drift_cache_.size()) < t) {
    const long s = static_cast<long>(drift_cache_.size()) + 1;
    Vec next(spec_.d);
    for (int i = 0; i < spec_.d; ++i) {
      double x = s == 1 ? 0.0 : drift_cache_.back()[i];
      x += spec_.drift_step * rng_.symmetric(s, i, kSaltLoss);
      while (std::abs(x) > 1) x = (x > 0 ? 2.0 : -2.0) - x;  // reflect into [-1, 1]
      next[i] = x;
    }
    drift_cache_.push_back(std::move(next));
  }
  return drift_cache_[static_cast<std::size_t>(t - 1)];
}

Vec Environment::loss(long t) const {
  if (t < 1 || t > spec_.T) fail("round out of range");
  const std::string& k = spec_.kind;
  Vec l(spec_.d);
  if (k == "gap_stochastic") {
    for (int i = 0; i < spec_.d; ++i) {
      const double p = i == spec_.i_star ? 0.5 : (1.0 + spec_.gap) / 2.0;
      l[i] = rng_.pm1(p, t, i, kSaltLoss);
    }
  } else if (k == "bernstein") {
    for (int i = 0; i < spec_.d; ++i) {
      if (i == spec_.i_star) {
        l[i] = 0;
      } else {
        const double p = (1.0 + bern_mean_ / bern_amp_) / 2.0;
        l[i] = bern_amp_ * rng_.pm1(p, t, i, kSaltLoss);
      }
    }
  } else if (k == "adversarial_uniform") {
    for (int i = 0; i < spec_.d; ++i) l[i] = spec_.scale * rng_.symmetric(t, i, kSaltLoss);
  } else if (k == "switching") {
    // Low ambient noise keeps the planted structure learnable: the per-slot
    // corrections scale with squared prediction error, so coin-flip noise
    // would drown the segment signal for every pool alike.
    const int best = seg_best_[static_cast<std::size_t>(segment_of(t) - 1)];
    for (int i = 0; i < spec_.d; ++i) {
      const double mean = i == best ? -spec_.gap / 2.0 : spec_.gap / 2.0;
      l[i] = mean + 0.1 * rng_.symmetric(t, i, kSaltLoss);
    }
  } else if (k == "drifting") {
    l = drift_loss(t);
  } else if (k == "multiscale") {
    for (int i = 0; i < spec_.d; ++i) l[i] = spec_.ranges[i] * rng_.symmetric(t, i, kSaltLoss);
  } else if (k == "growing_range") {
    for (int i = 0; i < spec_.d; ++i) {
      if (i == 0) {
        l[i] = scale_at(t) * rng_.pm1(0.5, t, i, kSaltSign);
      } else if (i == spec_.i_star) {
        l[i] = spec_.base_scale * rng_.pm1((1.0 - spec_.gap) / 2.0, t, i, kSaltLoss);
      } else {
        l[i] = spec_.base_scale * rng_.symmetric(t, i, kSaltLoss);
      }
    }
  } else if (k == "interval_trap") {
    l[0] = 0;
    const bool flipped = segment_of(t) >= flip_segment_;
    const double p_plus = flipped ? 0.5 + eps_ : 0.5 - eps_;
    l[1] = rng_.pm1(p_plus, t, 1, kSaltLoss);
  } else {  // subspace
    Vec coeff(spec_.subspace_rank);
    for (int r = 0; r < spec_.subspace_rank; ++r) coeff[r] = rng_.symmetric(t, r, kSaltLoss);
    l = subspace_basis_ * coeff / std::sqrt(static_cast<double>(spec_.subspace_rank));
  }
  return l;
}

int Environment::planted_best() const {
  if (spec_.kind == "gap_stochastic" || spec_.kind == "bernstein" ||
      spec_.kind == "growing_range") {
    return spec_.i_star;
  }
  return -1;
}

Vec Environment::coordinate_ranges() const {
  const std::string& k = spec_.kind;
  if (k == "multiscale") return spec_.ranges;
  if (k == "adversarial_uniform") return Vec::Constant(spec_.d, spec_.scale);
  if (k == "bernstein") return Vec::Constant(spec_.d, bern_amp_);
  if (k == "growing_range") {
    Vec c = Vec::Constant(spec_.d, spec_.base_scale);
    const double peak = spec_.jump_factor > 0 ? spec_.jump_factor : 1.0;
    c[0] = spec_.base_scale * peak;
    return c;
  }
  return Vec::Ones(spec_.d);
}

std::pair<long, long> Environment::trap_interval() const {
  if (spec_.kind != "interval_trap") fail("no planted interval for this kind");
  return partition_[static_cast<std::size_t>(flip_segment_ - 1)];
}

HedgeLearner::HedgeLearner(int dim, double rate) : rate_(rate) {
  if (dim < 1) fail("hedge: dimension must be positive");
  if (rate < 0 || rate >= 1) fail("hedge: rate must lie in [0, 1)");
  w_ = Vec::Constant(dim, 1.0 / dim);
}

Vec HedgeLearner::do_begin(const Vec&) { return w_; }

void HedgeLearner::do_end(const Vec& loss, const Vec&, const Vec&) {
  if (loss.lpNorm<Eigen::Infinity>() > 1 + 1e-9) fail("hedge: losses must lie in [-1, 1]");
  w_ = (w_.array() * (-rate_ * loss.array()).exp()).matrix();
  w_ /= w_.sum();
}

Vec oracle_tuned_reference(const std::vector<Vec>& losses) {
  if (losses.empty()) fail("empty loss series");
  const Eigen::Index d = losses.front().size();
  Vec sq = Vec::Zero(d);
  for (const Vec& l : losses) sq += l.array().square().matrix();
  return 2.0 * (std::log(static_cast<double>(d)) * sq.array()).sqrt().matrix();
}

bool LearnerSpec::olo() const {
  return algo == "ons" || algo == "gd" || algo == "adagrad" || algo == "metagrad" ||
         algo == "union3" || algo == "onsul" || algo == "onsuld" || algo == "constant";
}

std::vector<ScaleEvent> LearnerHandle::events() const {
  if (doubling != nullptr) return doubling->events();
  if (restart != nullptr) return restart->events();
  return {};
}

long LearnerHandle::hint_clamps() const {
  if (pool != nullptr) return pool->hint_clamp_count();
  if (restart != nullptr) return restart->pool().hint_clamp_count();
  if (doubling != nullptr) return doubling->inner().pool().hint_clamp_count();
  return 0;
}

LearnerHandle make_learner(const LearnerSpec& spec, int d, long T,
                           double default_rate_cap) {
  LearnerHandle h;
  h.olo = spec.olo();
  const Vec prior = spec.prior.size() > 0 ? spec.prior : Vec::Constant(d, 1.0 / d);
  const double cap = spec.rate_cap > 0 ? spec.rate_cap : default_rate_cap;

  if (spec.algo == "adaptive" || spec.algo == "fixed") {
    MsMwcConfig cfg;
    cfg.dim = d;
    cfg.horizon = T;
    cfg.region = SimplexRegion::truncated(d, 1.0 / (static_cast<double>(d) * T));
    cfg.record_history = spec.record_history;
    if (spec.algo == "fixed") {
      if (spec.fixed_rate <= 0) fail("fixed learner needs fixed_rate > 0");
      cfg.rates = RateSchedule::fixed_uniform(d, spec.fixed_rate);
    } else {
      cfg.rates = RateSchedule::adaptive(cap);
    }
    auto inst = std::make_unique<MsMwc>(std::move(cfg));
    h.single = inst.get();
    h.protocol = std::move(inst);
  } else if (spec.algo == "hedge") {
    h.protocol = std::make_unique<HedgeLearner>(d, spec.hedge_rate);
  } else if (spec.algo == "constant") {
    h.protocol = std::make_unique<ConstantLearner>(d);
  } else if (spec.algo == "kl") {
    auto pool = build_kl(prior, T, spec.record_history);
    h.pool = pool.get();
    h.protocol = std::move(pool);
  } else if (spec.algo == "multiscale") {
    if (spec.ranges.size() != d) fail("multiscale learner needs one range per coordinate");
    auto pool = build_multiscale(spec.ranges, T, spec.record_history);
    h.pool = pool.get();
    h.protocol = std::move(pool);
  } else if (spec.algo == "switching") {
    auto pool = build_switching(d, T, spec.record_history);
    h.pool = pool.get();
    h.protocol = std::move(pool);
  } else if (spec.algo == "unknown_range") {
    if (spec.B0 <= 0) fail("unknown_range needs B0 > 0");
    auto tracker = std::make_shared<ScaleTracker>(spec.B0, RangeNorm::LInf);
    const bool rh = spec.record_history;
    auto gen = [prior, T, rh](double base) {
      UnknownRangePool p = build_unknown_range(base, T, prior, rh);
      return WrappedPool{std::move(p.master), std::move(p.active_rule)};
    };
    auto wrap = std::make_unique<RestartWrapper>(gen, tracker, T);
    h.restart = wrap.get();
    h.protocol = std::move(wrap);
  } else if (spec.algo == "ons" || spec.algo == "gd" || spec.algo == "adagrad" ||
             spec.algo == "metagrad" || spec.algo == "union3") {
    OloSuiteParams p;
    p.d = d;
    p.T = T;
    p.D = spec.D;
    p.record_history = spec.record_history;
    p.max_adagrad_scale_values = spec.max_adagrad_scale_values;
    std::unique_ptr<Master> pool;
    if (spec.algo == "ons") pool = build_ons(p);
    else if (spec.algo == "gd") pool = build_gd(p);
    else if (spec.algo == "adagrad") pool = build_adagrad(p);
    else if (spec.algo == "metagrad") pool = build_metagrad(p);
    else pool = build_union3(p);
    h.pool = pool.get();
    h.protocol = std::move(pool);
  } else if (spec.algo == "onsul") {
    if (spec.B0 <= 0) fail("onsul needs B0 > 0");
    OloSuiteParams p;
    p.d = d;
    p.T = T;
    p.D = spec.D;
    p.record_history = spec.record_history;
    auto tracker = std::make_shared<ScaleTracker>(spec.B0, RangeNorm::L2);
    auto gen = [p, tracker](double base) {
      UnknownRangePool up =
          build_onsul(p, base, [tracker](long) { return tracker->current(); });
      return WrappedPool{std::move(up.master), std::move(up.active_rule)};
    };
    auto wrap = std::make_unique<RestartWrapper>(gen, tracker, T);
    h.restart = wrap.get();
    h.protocol = std::move(wrap);
  } else if (spec.algo == "onsuld") {
    if (spec.B0 <= 0) fail("onsuld needs B0 > 0");
    const bool rh = spec.record_history;
    auto dgen = [d, T, rh](double D, double B0) {
      OloSuiteParams p;
      p.d = d;
      p.T = T;
      p.D = D;
      p.record_history = rh;
      auto tracker = std::make_shared<ScaleTracker>(B0, RangeNorm::L2);
      auto rgen = [p, tracker](double base) {
        UnknownRangePool up =
            build_onsul(p, base, [tracker](long) { return tracker->current(); });
        return WrappedPool{std::move(up.master), std::move(up.active_rule)};
      };
      return std::make_unique<RestartWrapper>(rgen, tracker, T);
    };
    auto wrap = std::make_unique<DoublingWrapper>(dgen, spec.B0, T, spec.D);
    h.doubling = wrap.get();
    h.protocol = std::move(wrap);
  } else {
    fail("unknown learner algo " + spec.algo);
  }
  return h;
}

std::vector<std::string> default_bound_ids(const std::string& algo) {
  if (algo == "adaptive" || algo == "fixed") return {"impossible_tuning"};
  if (algo == "kl") return {"kl_corrected"};
  if (algo == "multiscale") return {"multi_scale"};
  if (algo == "switching") return {"switching"};
  if (algo == "unknown_range") return {"unknown_range"};
  if (algo == "ons") return {"second_order_rank"};
  if (algo == "gd") return {"gradient_norm"};
  if (algo == "adagrad") return {"preconditioner_trace"};
  if (algo == "metagrad") return {"recentered_rank"};
  if (algo == "union3") return {"second_order_rank", "gradient_norm", "preconditioner_trace"};
  return {};
}

namespace {

const std::set<std::string>& known_bound_ids() {
  static const std::set<std::string> ids = {
      "impossible_tuning", "kl_corrected",        "multi_scale",
      "switching",         "unknown_range",       "second_order_rank",
      "gradient_norm",     "preconditioner_trace", "recentered_rank"};
  return ids;
}

bool olo_bound_id(const std::string& id) {
  return id == "second_order_rank" || id == "gradient_norm" ||
         id == "preconditioner_trace" || id == "recentered_rank";
}

// Best expert over the first `cp` rounds.
int argmin_expert(const RegretTrace& trace, long cp) {
  Vec cum = Vec::Zero(trace.dim());
  for (long t = 1; t <= cp; ++t) cum += trace.round(t).loss;
  int best = 0;
  cum.minCoeff(&best);
  return best;
}

// Loss-minimizing point of the radius-D ball over the first `cp` rounds.
Vec ball_opt(const RegretTrace& trace, long cp, double D) {
  Vec sum = Vec::Zero(trace.dim());
  for (long t = 1; t <= cp; ++t) sum += trace.round(t).loss;
  const double n = sum.norm();
  if (n == 0) return Vec::Zero(trace.dim());
  return (-D / n) * sum;
}

struct CheckpointContext {
  const RunConfig& cfg;
  const Environment& env;
  const LearnerHandle& learner;
  const RegretTrace& trace;
};

void evaluate_checkpoint(const CheckpointContext& ctx, long cp,
                         const std::vector<std::string>& ids,
                         std::vector<BoundReport>& out) {
  const RegretTrace& trace = ctx.trace;
  BoundInputs in;
  in.losses.reserve(static_cast<std::size_t>(cp));
  in.targets.reserve(static_cast<std::size_t>(cp));
  in.plays.reserve(static_cast<std::size_t>(cp));
  for (long t = 1; t <= cp; ++t) {
    in.losses.push_back(trace.round(t).loss);
    in.targets.push_back(trace.round(t).target);
    in.plays.push_back(trace.round(t).decision);
  }
  in.T = ctx.env.T();
  in.d = ctx.env.d();
  in.prior = ctx.cfg.learner.prior;
  in.ranges = ctx.cfg.learner.ranges.size() > 0 ? ctx.cfg.learner.ranges
                                                : ctx.env.coordinate_ranges();
  in.D = ctx.learner.doubling != nullptr ? ctx.learner.doubling->diameter()
                                         : ctx.cfg.learner.D;
  if (ctx.learner.restart != nullptr) {
    in.B = ctx.learner.restart->tracker().current();
  } else if (ctx.learner.doubling != nullptr) {
    in.B = ctx.learner.doubling->inner().tracker().current();
  } else {
    in.B = ctx.cfg.learner.B0;
  }

  const int best = argmin_expert(trace, cp);
  in.i_star = best;

  for (const std::string& id : ids) {
    const double audit = olo_bound_id(id) ? ctx.cfg.audit_olo : ctx.cfg.audit_expert;
    if (id == "switching") {
      // Per-segment comparators: planted when the environment declares them,
      // otherwise each segment's own best expert.
      std::vector<std::pair<long, long>> part;
      std::vector<Vec> us;
      double realized = 0;
      const auto& env_part = ctx.env.partition();
      if (!env_part.empty()) {
        for (std::size_t j = 0; j < env_part.size() && env_part[j].first <= cp; ++j) {
          part.push_back({env_part[j].first, std::min(env_part[j].second, cp)});
          us.push_back(Vec::Unit(ctx.env.d(), ctx.env.segment_best()[j]));
        }
      } else {
        part.push_back({1, cp});
        us.push_back(Vec::Unit(ctx.env.d(), best));
      }
      for (std::size_t j = 0; j < part.size(); ++j) {
        realized += trace.regret(us[j], part[j]);
      }
      in.partition = part;
      in.interval_comparators = us;
      in.u = us.front();
      in.realized = realized;
    } else if (olo_bound_id(id)) {
      in.u = ball_opt(trace, cp, in.D);
      in.realized = trace.regret(in.u, {{1, cp}});
    } else {
      in.u = Vec::Unit(ctx.env.d(), best);
      in.realized = trace.regret(in.u, {{1, cp}});
    }
    out.push_back(theorem_bound(id, in, audit));
  }
}

}  // namespace

RunResult run(const RunConfig& cfg) {
  Environment env(cfg.env);
  const int d = env.d();
  const long T = env.T();
  LearnerHandle learner = make_learner(cfg.learner, d, T, cfg.predictor.rate_cap());
  if (learner.olo && cfg.predictor.broadcast()) {
    fail("broadcast predictions are only valid for simplex learners");
  }
  Predictor predictor(cfg.predictor, d);

  std::vector<long> cps = cfg.checkpoints;
  if (cps.empty()) cps = {std::max(1L, T / 4), std::max(1L, T / 2), T};
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  for (long cp : cps) {
    if (cp < 1 || cp > T) fail("checkpoint out of range");
  }
  std::vector<std::string> ids =
      cfg.bound_ids.empty() ? default_bound_ids(cfg.learner.algo) : cfg.bound_ids;
  for (const std::string& id : ids) {
    if (known_bound_ids().count(id) == 0) fail("unknown bound id " + id);
  }

  RunResult out{RegretTrace(d), {}, {}, {}, 0, 0, learner.olo};
  std::size_t events_seen = 0;
  std::size_t next_cp = 0;
  for (long t = 1; t <= T; ++t) {
    Vec w, l, m;
    try {
      const Vec pre = predictor.pre_hint();
      w = learner.protocol->begin_round(pre);
      l = env.loss(t);
      m = predictor.correction_target(pre, w, l);
      learner.protocol->end_round(l, m);
    } catch (const std::exception& e) {
      throw std::runtime_error("round " + std::to_string(t) + ": " + e.what());
    }
    predictor.observe(l);

    std::string event;
    const std::vector<ScaleEvent> evs = learner.events();
    for (std::size_t j = events_seen; j < evs.size(); ++j) {
      if (!event.empty()) event += "|";
      event += evs[j].kind;
    }
    events_seen = evs.size();
    out.trace.add_round(std::move(w), std::move(l), std::move(m), std::move(event));

    if (next_cp < cps.size() && t == cps[next_cp]) {
      CheckpointContext ctx{cfg, env, learner, out.trace};
      evaluate_checkpoint(ctx, t, ids, out.reports);
      ++next_cp;
    }
  }

  out.events = learner.events();
  out.hint_clamps = learner.hint_clamps();
  out.learner_cumulative = out.trace.learner_cumulative();
  if (learner.restart != nullptr) {
    out.truncation_damage = learner.restart->truncation_damage();
    out.final_range = learner.restart->tracker().current();
  } else if (learner.doubling != nullptr) {
    out.truncation_damage = learner.doubling->inner().truncation_damage();
    out.final_range = learner.doubling->inner().tracker().current();
    out.final_diameter = learner.doubling->diameter();
  }
  if (learner.olo) {
    out.comparators.push_back({"ball_opt", ball_opt(out.trace, T, cfg.learner.D)});
  } else {
    for (int i = 0; i < d; ++i) {
      out.comparators.push_back({"e" + std::to_string(i + 1), Vec::Unit(d, i)});
    }
  }
  return out;
}

int thread_budget() {
  if (const char* s = std::getenv("MSMWC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && v > 0) return static_cast<int>(std::min(v, 256L));
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

void parallel_for(long n, const std::function<void(long)>& f) {
  if (n <= 0) return;
  const int workers = static_cast<int>(std::min<long>(thread_budget(), n));
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<long> next{0};
  std::mutex err_mx;
  std::exception_ptr err;
  auto body = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mx);
        if (!err) err = std::current_exception();
        next.store(n);  // stop handing out work
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int k = 0; k < workers; ++k) pool.emplace_back(body);
  for (std::thread& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace msmwc
