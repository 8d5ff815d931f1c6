#pragma once

#include "msmwc/core_types.hpp"

namespace msmwc {

// One constrained mirror-descent step with weighted negative-entropy geometry:
//   argmin_{w in region} <w, cost> + sum_i (1/rates_i) * (w_i ln(w_i/anchor_i) - w_i + anchor_i)
// The stationarity form on the support is w_i(lambda) = max(bound_i, anchor_i *
// exp(rates_i * (lambda - cost_i))) with lambda chosen so the weights sum to 1.
struct EntropySolveRequest {
  Vec anchor;  // strictly positive on the support
  Vec cost;
  Vec rates;  // strictly positive on the support
  SimplexRegion region;
};

struct EntropySolveOptions {
  double sum_tol = 1e-12;    // |sum w - 1| target before exact renormalization
  double lambda_tol = 1e-14; // relative bisection interval target
  int max_iter = 200;
};

struct EntropySolveResult {
  Vec weights;
  double lambda = 0;
  int iterations = 0;
  bool tolerance_met = true;
};

EntropySolveResult solve(const EntropySolveRequest& req, const EntropySolveOptions& opt = {});
Vec solve_weights(const EntropySolveRequest& req, const EntropySolveOptions& opt = {});

// sum_i (1/rates_i) * (u_i ln(u_i/w_i) - u_i + w_i), with 0 ln 0 = 0.
double bregman(const Vec& u, const Vec& w, const Vec& rates);

// Objective value of the solve at a feasible point (used by optimality checks).
double entropy_objective(const EntropySolveRequest& req, const Vec& w);

}  // namespace msmwc
