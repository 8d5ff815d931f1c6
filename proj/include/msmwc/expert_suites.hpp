#pragma once

#include "msmwc/master.hpp"

#include <functional>

namespace msmwc {

// Smallest integer k with 2^k >= x (x > 0). Tolerant of exact powers of two.
int ceil_log2(double x);

// Dyadic pool of expert-problem learners covering every tuned rate up to the
// cap: eta_k = 1/(32*2^k) for k = 1..ceil_log2(T), each base running on the
// full simplex from the given prior with internal rate 2*eta_k.
std::unique_ptr<Master> build_kl(const Vec& prior, long T, bool record_history = false);

// Multi-scale pool: scale levels 2^(k-2) spanning [c_i, c_i*sqrt(T)] for some
// coordinate; level k's base runs on the coordinates with c_i <= 2^(k-2),
// uniform prior over them. Hints are clamped to [-c, c] at ingestion.
std::unique_ptr<Master> build_multiscale(const Vec& ranges, long T, bool record_history = false);
// The scale levels and per-level coordinate sets, exposed for inspection.
std::vector<int> multiscale_levels(const Vec& ranges, long T);
std::vector<int> multiscale_support(const Vec& ranges, int level);

// Switching pool: dyadic rates as in build_kl, but every base runs on the
// simplex truncated at 1/(d*T) and the aggregation weights are kept >= 1/T,
// so mass can return to any expert quickly after a shift.
std::unique_ptr<Master> build_switching(int d, long T, bool record_history = false);

// Pool for losses of unknown range, built for scale base B0: eta_k =
// 1/(32*B0*2^k) for k = 1..ceil_log2(2*T^2). The active rule keeps the rates
// safe for the running range B: active(k) iff eta_k <= 1/(64*B).
struct UnknownRangePool {
  std::unique_ptr<Master> master;
  std::function<std::vector<char>(double range)> active_rule;
};
UnknownRangePool build_unknown_range(double B0, long T, const Vec& prior,
                                     bool record_history = false);

}  // namespace msmwc
