#include "msmwc/expert_suites.hpp"

#include <cmath>

namespace msmwc {

int ceil_log2(double x) {
  if (!(x > 0)) throw std::invalid_argument("ceil_log2: argument must be positive");
  return static_cast<int>(std::ceil(std::log2(x) - 1e-12));
}

namespace {

std::unique_ptr<MsMwc> make_base(int d, long T, const SimplexRegion& region, Vec prior,
                                 double internal_rate, bool record) {
  MsMwcConfig cfg;
  cfg.dim = d;
  cfg.horizon = T;
  cfg.region = region;
  cfg.initial_anchor = std::move(prior);
  cfg.rates = RateSchedule::fixed_uniform(d, internal_rate);
  cfg.record_history = record;
  return std::make_unique<MsMwc>(std::move(cfg));
}

}  // namespace

std::unique_ptr<Master> build_kl(const Vec& prior, long T, bool record) {
  const int d = static_cast<int>(prior.size());
  if (d < 1) throw std::invalid_argument("kl pool: empty prior");
  if (T < 2) throw std::invalid_argument("kl pool: horizon must be at least 2");
  double ps = 0;
  for (int i = 0; i < d; ++i) {
    if (!(prior[i] > 0)) throw std::invalid_argument("kl pool: prior must be positive");
    ps += prior[i];
  }
  if (std::abs(ps - 1.0) > 1e-9) throw std::invalid_argument("kl pool: prior must sum to 1");

  const int K = ceil_log2(static_cast<double>(T));
  std::vector<ExpertSlot> slots;
  const SimplexRegion region = SimplexRegion::full(d);
  for (int k = 1; k <= K; ++k) {
    ExpertSlot s;
    s.eta = 1.0 / (32.0 * std::ldexp(1.0, k));
    s.base = make_base(d, T, region, prior, 2.0 * s.eta, record);
    s.label = "kl/k=" + std::to_string(k);
    slots.push_back(std::move(s));
  }
  MasterConfig mc;
  mc.horizon = T;
  mc.record_history = record;
  return std::make_unique<Master>(std::move(slots), std::move(mc), d);
}

std::vector<int> multiscale_levels(const Vec& ranges, long T) {
  const int d = static_cast<int>(ranges.size());
  if (d < 1) throw std::invalid_argument("multiscale pool: empty ranges");
  if (T < 1) throw std::invalid_argument("multiscale pool: bad horizon");
  for (int i = 0; i < d; ++i)
    if (!(ranges[i] > 0)) throw std::invalid_argument("multiscale pool: ranges must be positive");
  const double rt = std::sqrt(static_cast<double>(T));
  // Levels k with c_i <= 2^(k-2) <= c_i*sqrt(T) for some i.
  std::vector<int> levels;
  const int k_lo = ceil_log2(ranges.minCoeff()) + 2;
  const int k_hi = static_cast<int>(std::floor(std::log2(ranges.maxCoeff() * rt) + 1e-12)) + 2;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double scale = std::ldexp(1.0, k - 2);
    bool hit = false;
    for (int i = 0; i < d && !hit; ++i)
      hit = ranges[i] <= scale * (1 + 1e-12) && scale <= ranges[i] * rt * (1 + 1e-12);
    if (hit) levels.push_back(k);
  }
  if (levels.empty()) throw std::invalid_argument("multiscale pool: empty level set");
  return levels;
}

std::vector<int> multiscale_support(const Vec& ranges, int level) {
  std::vector<int> sup;
  const double scale = std::ldexp(1.0, level - 2);
  for (int i = 0; i < static_cast<int>(ranges.size()); ++i)
    if (ranges[i] <= scale * (1 + 1e-12)) sup.push_back(i);
  return sup;
}

std::unique_ptr<Master> build_multiscale(const Vec& ranges, long T, bool record) {
  const int d = static_cast<int>(ranges.size());
  const std::vector<int> levels = multiscale_levels(ranges, T);
  std::vector<ExpertSlot> slots;
  for (int k : levels) {
    const std::vector<int> sup = multiscale_support(ranges, k);
    ExpertSlot s;
    s.eta = 1.0 / (32.0 * std::ldexp(1.0, k));
    // The base's internal rate must keep corrections contractive on its
    // support: 32 * (2*eta_k) * c_i <= 1 there.
    for (int i : sup)
      if (64.0 * s.eta * ranges[i] > 1.0 + 1e-12)
        throw std::invalid_argument("multiscale pool: rate/range contract violated");
    Vec prior = Vec::Zero(d);
    for (int i : sup) prior[i] = 1.0 / static_cast<double>(sup.size());
    s.base = make_base(d, T, SimplexRegion::restricted(d, sup), std::move(prior), 2.0 * s.eta,
                       record);
    s.label = "ms/k=" + std::to_string(k);
    slots.push_back(std::move(s));
  }
  MasterConfig mc;
  mc.horizon = T;
  mc.record_history = record;
  mc.hint_clamp = ranges;
  return std::make_unique<Master>(std::move(slots), std::move(mc), d);
}

std::unique_ptr<Master> build_switching(int d, long T, bool record) {
  if (d < 1) throw std::invalid_argument("switching pool: bad dimension");
  if (T < 2) throw std::invalid_argument("switching pool: horizon must be at least 2");
  const int K = ceil_log2(static_cast<double>(T));
  const SimplexRegion region =
      SimplexRegion::truncated(d, 1.0 / (static_cast<double>(d) * static_cast<double>(T)));
  const Vec prior = Vec::Constant(d, 1.0 / d);
  std::vector<ExpertSlot> slots;
  for (int k = 1; k <= K; ++k) {
    ExpertSlot s;
    s.eta = 1.0 / (32.0 * std::ldexp(1.0, k));
    s.base = make_base(d, T, region, prior, 2.0 * s.eta, record);
    s.label = "switch/k=" + std::to_string(k);
    slots.push_back(std::move(s));
  }
  MasterConfig mc;
  mc.horizon = T;
  mc.lower_bound = 1.0 / static_cast<double>(T);
  mc.record_history = record;
  return std::make_unique<Master>(std::move(slots), std::move(mc), d);
}

UnknownRangePool build_unknown_range(double B0, long T, const Vec& prior, bool record) {
  if (!(B0 > 0)) throw std::invalid_argument("unknown-range pool: base scale must be positive");
  const int d = static_cast<int>(prior.size());
  if (d < 1) throw std::invalid_argument("unknown-range pool: empty prior");
  if (T < 1) throw std::invalid_argument("unknown-range pool: bad horizon");
  const int N = ceil_log2(2.0 * static_cast<double>(T) * static_cast<double>(T));
  const SimplexRegion region = SimplexRegion::full(d);
  std::vector<ExpertSlot> slots;
  std::vector<double> etas;
  for (int k = 1; k <= N; ++k) {
    ExpertSlot s;
    s.eta = 1.0 / (32.0 * B0 * std::ldexp(1.0, k));
    etas.push_back(s.eta);
    s.base = make_base(d, T, region, prior, 2.0 * s.eta, record);
    s.label = "ur/k=" + std::to_string(k);
    slots.push_back(std::move(s));
  }
  MasterConfig mc;
  mc.horizon = T;
  mc.record_history = record;
  UnknownRangePool pool;
  pool.master = std::make_unique<Master>(std::move(slots), std::move(mc), d);
  pool.active_rule = [etas](double range) {
    std::vector<char> mask(etas.size(), 0);
    for (size_t k = 0; k < etas.size(); ++k)
      mask[k] = etas[k] <= 1.0 / (64.0 * range) * (1 + 1e-12) ? 1 : 0;
    return mask;
  };
  return pool;
}

}  // namespace msmwc
