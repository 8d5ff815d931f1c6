#pragma once

#include "msmwc/master.hpp"

namespace msmwc {

// a ln(a/b) - a + b on [0,1]^2, with 0 ln 0 = 0 (so f(0, b) = b).
double f_kl(double a, double b);

struct BoundTerm {
  std::string name;
  double value = 0;
};

struct BoundReport {
  std::string id;
  std::vector<BoundTerm> terms;
  double audit_constant = 1;
  double bound = 0;     // audited right-hand side
  double realized = 0;  // realized regret
  long checkpoint = 0;  // rounds covered (0 = whole run)

  double term(const std::string& name) const;
  bool holds(double slack = 0) const { return realized <= bound + slack; }
  double ratio() const;
};

// Exact decomposition of the single-instance mirror-descent guarantee over a
// recorded history: anchor divergence at the initial rates, the rate-change
// divergence sum, the comparator correction sum, and the (negative) played
// correction sum. Requires record_history = true on the instance.
BoundReport anytime_decomposition_rhs(const std::vector<MsMwcHistoryRound>& history,
                                      const Vec& u);

// Exact aggregation overhead bound for a pool run: base regret of expert k*
// plus (1/eta*) ln(sum eta^2 / eta*^2) + (sum eta)/(sum eta^2) + 32 eta* *
// sum_t <w^k*_t, loss_t - target_t>^2, measured against comparator u.
BoundReport aggregation_rhs(const MasterAudit& audit, int k_star, const Vec& u);

// Series inputs for the closed-form leading-order bounds.
struct BoundInputs {
  std::vector<Vec> losses;
  std::vector<Vec> targets;       // empty = all-zero targets
  std::vector<Vec> plays;         // only the recentered bound needs these
  Vec u;                          // comparator
  Vec prior;                      // expert-problem prior
  int i_star = -1;                // comparator expert index
  Vec ranges;                     // per-coordinate scales (multi-scale bound)
  std::vector<std::pair<long, long>> partition;  // switching intervals, 1-based
  std::vector<Vec> interval_comparators;
  double B = 0;                   // final range (unknown-range bound)
  double D = 0;                   // region diameter/radius
  long T = 0;
  int d = 0;
  double realized = 0;            // realized regret to report against
};

// ids: impossible_tuning, kl_corrected, multi_scale, switching, unknown_range,
// second_order_rank (quadratic-variance ball bound), gradient_norm,
// preconditioner_trace, recentered_rank.
BoundReport theorem_bound(const std::string& id, const BoundInputs& in, double audit);

// Accumulated error outer-product matrix sum_t (loss_t - target_t)(...)' and
// its numerical rank at tolerance 1e-8 * trace.
Mat error_outer_sum(const std::vector<Vec>& losses, const std::vector<Vec>& targets);
int numerical_rank(const Mat& A);

}  // namespace msmwc
