#pragma once

#include "msmwc/expert_suites.hpp"
#include "msmwc/olo_base.hpp"

namespace msmwc {

// Pool builders for linear losses over the ball of radius D in R^d. Each pool
// is an aggregator over a dyadic grid of tuned base learners. When D is below
// 1/(d*T) the tuned grids degenerate and a constant-play fallback is returned.
struct OloSuiteParams {
  int d = 0;
  long T = 0;
  double D = 0;
  bool record_history = false;
  // Full-matrix-adagrad grid control: keep at most this many values on the
  // final (scale) axis, geometrically subsampled with both endpoints kept.
  // 0 = full grid.
  int max_adagrad_scale_values = 0;
};

std::unique_ptr<Master> build_ons(const OloSuiteParams& p);
std::unique_ptr<Master> build_gd(const OloSuiteParams& p);
std::unique_ptr<Master> build_adagrad(const OloSuiteParams& p);
std::unique_ptr<Master> build_metagrad(const OloSuiteParams& p);
// Concatenation of the three pools above under one aggregator.
std::unique_ptr<Master> build_union3(const OloSuiteParams& p);

// Unknown-range pool of second-order learners: eta_k = 1/(192*D*B0*2^k) for
// k = 1..ceil_log2(T^2); base range hints follow `range_hint` (the running
// scale B_{t-1}); active(k) iff eta_k <= 1/(192*D*B).
UnknownRangePool build_onsul(const OloSuiteParams& p, double B0,
                             std::function<double(long)> range_hint);

}  // namespace msmwc
