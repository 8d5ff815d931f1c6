#include "msmwc/olo_suites.hpp"

#include <cmath>

namespace msmwc {

namespace {

void check_params(const OloSuiteParams& p) {
  if (p.d <= 0) throw std::invalid_argument("olo pool: bad dimension");
  if (p.T < 2) throw std::invalid_argument("olo pool: horizon must be at least 2");
  if (!(p.D > 0)) throw std::invalid_argument("olo pool: diameter must be positive");
}

bool degenerate(const OloSuiteParams& p) {
  return p.D < 1.0 / (static_cast<double>(p.d) * static_cast<double>(p.T));
}

std::unique_ptr<Master> fallback(const OloSuiteParams& p, const char* tag) {
  std::vector<ExpertSlot> slots;
  ExpertSlot s;
  s.eta = 1.0 / 64.0;
  s.base = std::make_unique<ConstantLearner>(p.d);
  s.label = std::string(tag) + "/fallback";
  slots.push_back(std::move(s));
  MasterConfig mc;
  mc.horizon = p.T;
  mc.record_history = p.record_history;
  return std::make_unique<Master>(std::move(slots), std::move(mc), p.d);
}

double pow2(int k) { return std::ldexp(1.0, k); }

std::vector<ExpertSlot> ons_slots(const OloSuiteParams& p) {
  const int lo = -ceil_log2(static_cast<double>(p.d) * static_cast<double>(p.T));
  const int hi = ceil_log2(p.D);
  const int smax = ceil_log2(static_cast<double>(p.T));
  std::vector<ExpertSlot> slots;
  for (int dk = lo; dk <= hi; ++dk) {
    for (int sk = 1; sk <= smax; ++sk) {
      ExpertSlot s;
      s.eta = 1.0 / (64.0 * pow2(dk + sk));
      // the aggregator's bounded-error requirement for a radius-2^dk base
      if (32.0 * s.eta * pow2(dk) > 1.0 + 1e-12) {
        throw std::invalid_argument("olo_suites: aggregation rate too large for base radius");
      }
      OnsConfig oc;
      oc.dim = p.d;
      oc.eta = 3.0 * s.eta;
      oc.region = DecisionRegion::ball(p.d, std::min(p.D, pow2(dk)));
      s.base = std::make_unique<OnsLearner>(std::move(oc));
      s.label = "ons/d=" + std::to_string(dk) + ",s=" + std::to_string(sk);
      slots.push_back(std::move(s));
    }
  }
  return slots;
}

std::vector<ExpertSlot> gd_slots(const OloSuiteParams& p) {
  const int lo = -ceil_log2(static_cast<double>(p.T));
  const int hi = ceil_log2(p.D);
  const int smax = ceil_log2(static_cast<double>(p.T));
  std::vector<ExpertSlot> slots;
  for (int dk = lo; dk <= hi; ++dk) {
    for (int sk = 1; sk <= smax; ++sk) {
      ExpertSlot s;
      s.eta = 1.0 / (32.0 * pow2(dk + sk));
      const double internal = std::pow(4.0, dk) * s.eta;
      s.base = std::make_unique<OptGdLearner>(p.d, internal,
                                              DecisionRegion::ball(p.d, std::min(p.D, pow2(dk))));
      s.label = "gd/d=" + std::to_string(dk) + ",s=" + std::to_string(sk);
      slots.push_back(std::move(s));
    }
  }
  return slots;
}

std::vector<int> subsample_axis(int lo, int hi, int keep) {
  std::vector<int> all;
  for (int v = lo; v <= hi; ++v) all.push_back(v);
  if (keep <= 0 || static_cast<int>(all.size()) <= keep) return all;
  std::vector<int> out;
  const int n = static_cast<int>(all.size());
  for (int j = 0; j < keep; ++j) {
    const int idx = static_cast<int>(std::lround(
        static_cast<double>(j) * static_cast<double>(n - 1) / static_cast<double>(keep - 1)));
    if (out.empty() || all[static_cast<size_t>(idx)] != out.back())
      out.push_back(all[static_cast<size_t>(idx)]);
  }
  return out;
}

std::vector<ExpertSlot> adagrad_slots(const OloSuiteParams& p) {
  const int dlo = -ceil_log2(static_cast<double>(p.T));
  const int dhi = ceil_log2(p.D);
  const int tmax = ceil_log2(static_cast<double>(p.d) * static_cast<double>(p.T));
  const int llo = -ceil_log2(static_cast<double>(p.T));
  const int lhi = ceil_log2(2.0 * p.D * p.D * static_cast<double>(p.T));
  const std::vector<int> lvals = subsample_axis(llo, lhi, p.max_adagrad_scale_values);
  std::vector<ExpertSlot> slots;
  for (int dk = dlo; dk <= dhi; ++dk) {
    for (int tk = 1; tk <= tmax; ++tk) {
      for (int lk : lvals) {
        ExpertSlot s;
        s.eta = 1.0 / (64.0 * pow2(dk + tk));
        const double eta_prime = 2.0 * s.eta;
        const double internal = pow2(lk + 1) * s.eta;
        s.base = std::make_unique<AdaGradLearner>(
            p.d, internal, eta_prime, DecisionRegion::ball(p.d, std::min(p.D, pow2(dk))));
        s.label = "ag/d=" + std::to_string(dk) + ",t=" + std::to_string(tk) +
                  ",l=" + std::to_string(lk);
        slots.push_back(std::move(s));
      }
    }
  }
  return slots;
}

std::unique_ptr<Master> pool_from(std::vector<ExpertSlot> slots, const OloSuiteParams& p,
                                  bool recentered = false) {
  MasterConfig mc;
  mc.horizon = p.T;
  mc.recentered = recentered;
  mc.record_history = p.record_history;
  return std::make_unique<Master>(std::move(slots), std::move(mc), p.d);
}

}  // namespace

std::unique_ptr<Master> build_ons(const OloSuiteParams& p) {
  check_params(p);
  if (degenerate(p)) return fallback(p, "ons");
  return pool_from(ons_slots(p), p);
}

std::unique_ptr<Master> build_gd(const OloSuiteParams& p) {
  check_params(p);
  if (degenerate(p)) return fallback(p, "gd");
  return pool_from(gd_slots(p), p);
}

std::unique_ptr<Master> build_adagrad(const OloSuiteParams& p) {
  check_params(p);
  if (degenerate(p)) return fallback(p, "ag");
  return pool_from(adagrad_slots(p), p);
}

std::unique_ptr<Master> build_metagrad(const OloSuiteParams& p) {
  check_params(p);
  if (degenerate(p)) return fallback(p, "mg");
  const int K = ceil_log2(2.0 * p.D * static_cast<double>(p.T));
  std::vector<ExpertSlot> slots;
  for (int k = 1; k <= K; ++k) {
    ExpertSlot s;
    s.eta = 1.0 / (64.0 * p.D * pow2(k));
    OnsConfig oc;
    oc.dim = p.d;
    oc.eta = 4.0 * s.eta;
    oc.region = DecisionRegion::ball(p.d, p.D);
    oc.recentered = true;
    s.base = std::make_unique<OnsLearner>(std::move(oc));
    s.label = "mg/k=" + std::to_string(k);
    slots.push_back(std::move(s));
  }
  return pool_from(std::move(slots), p, /*recentered=*/true);
}

std::unique_ptr<Master> build_union3(const OloSuiteParams& p) {
  check_params(p);
  if (degenerate(p)) return fallback(p, "union3");
  std::vector<ExpertSlot> slots = ons_slots(p);
  for (auto& s : gd_slots(p)) slots.push_back(std::move(s));
  for (auto& s : adagrad_slots(p)) slots.push_back(std::move(s));
  return pool_from(std::move(slots), p);
}

UnknownRangePool build_onsul(const OloSuiteParams& p, double B0,
                             std::function<double(long)> range_hint) {
  check_params(p);
  if (!(B0 > 0)) throw std::invalid_argument("olo pool: base scale must be positive");
  if (!range_hint) throw std::invalid_argument("olo pool: missing range hints");
  const int N = ceil_log2(static_cast<double>(p.T) * static_cast<double>(p.T));
  std::vector<ExpertSlot> slots;
  std::vector<double> etas;
  for (int k = 1; k <= N; ++k) {
    ExpertSlot s;
    s.eta = 1.0 / (192.0 * p.D * B0 * pow2(k));
    etas.push_back(s.eta);
    OnsConfig oc;
    oc.dim = p.d;
    oc.eta = 3.0 * s.eta;
    oc.region = DecisionRegion::ball(p.d, p.D);
    oc.range_hint = range_hint;
    s.base = std::make_unique<OnsLearner>(std::move(oc));
    s.label = "onsul/k=" + std::to_string(k);
    slots.push_back(std::move(s));
  }
  MasterConfig mc;
  mc.horizon = p.T;
  mc.record_history = p.record_history;
  UnknownRangePool pool;
  pool.master = std::make_unique<Master>(std::move(slots), std::move(mc), p.d);
  const double D = p.D;
  pool.active_rule = [etas, D](double range) {
    std::vector<char> mask(etas.size(), 0);
    for (size_t k = 0; k < etas.size(); ++k)
      mask[k] = etas[k] <= 1.0 / (192.0 * D * range) * (1 + 1e-12) ? 1 : 0;
    return mask;
  };
  return pool;
}

}  // namespace msmwc
