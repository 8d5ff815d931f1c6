#include "msmwc/entropy_omd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msmwc {

namespace {

// Exponent clamps: +60 keeps the sign of (sum - 1) honest while bracketing
// (e^60 >> 1); -740 keeps underflow subnormal-positive so no supported
// coordinate ever collapses to exactly zero mass.
double clamped_exp(double e) { return std::exp(std::clamp(e, -740.0, 60.0)); }

}  // namespace

EntropySolveResult solve(const EntropySolveRequest& req, const EntropySolveOptions& opt) {
  const SimplexRegion& region = req.region;
  region.validate();
  const int d = region.dim;
  if (req.anchor.size() != d || req.cost.size() != d || req.rates.size() != d)
    throw std::invalid_argument("entropy solve: dimension mismatch");

  std::vector<int> sup;
  sup.reserve(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i)
    if (region.support[static_cast<size_t>(i)]) sup.push_back(i);

  double bound_mass = 0;
  for (int i : sup) {
    bound_mass += region.lower_bounds[i];
    if (!(req.anchor[i] > 0))
      throw std::invalid_argument("entropy solve: anchor must be positive on the support");
    if (!(req.rates[i] > 0))
      throw std::invalid_argument("entropy solve: rates must be positive on the support");
    if (!std::isfinite(req.cost[i]))
      throw std::invalid_argument("entropy solve: non-finite cost");
  }

  EntropySolveResult res;
  res.weights = Vec::Zero(d);

  // Region collapsed to the single point of lower bounds.
  if (bound_mass >= 1.0 - 1e-15) {
    for (int i : sup) res.weights[i] = region.lower_bounds[i];
    return res;
  }
  if (sup.size() == 1) {
    res.weights[sup[0]] = 1.0;
    return res;
  }

  const auto total = [&](double lambda) {
    double s = 0;
    for (int i : sup) {
      const double raw = req.anchor[i] * clamped_exp(req.rates[i] * (lambda - req.cost[i]));
      s += std::max(region.lower_bounds[i], raw);
      if (s > 4.0) return s;  // only the sign of (s - 1) matters beyond this
    }
    return s;
  };

  double min_cost = std::numeric_limits<double>::infinity();
  double max_cost = -std::numeric_limits<double>::infinity();
  double min_rate = std::numeric_limits<double>::infinity();
  double min_anchor = std::numeric_limits<double>::infinity();
  for (int i : sup) {
    min_cost = std::min(min_cost, req.cost[i]);
    max_cost = std::max(max_cost, req.cost[i]);
    min_rate = std::min(min_rate, req.rates[i]);
    min_anchor = std::min(min_anchor, req.anchor[i]);
  }

  double lo = min_cost - std::log(1.0 / std::min(min_anchor, 1.0)) / min_rate - 1.0;
  double hi = max_cost + std::log(static_cast<double>(sup.size())) / min_rate + 1.0;

  // The analytic bracket covers every intended caller; widen defensively anyway.
  double span = std::max(1.0, hi - lo);
  int widen = 0;
  while (total(lo) > 1.0 && widen < 300) {
    lo -= span;
    span *= 2;
    ++widen;
  }
  span = std::max(1.0, hi - lo);
  while (total(hi) < 1.0 && widen < 600) {
    hi += span;
    span *= 2;
    ++widen;
  }
  if (total(lo) > 1.0 || total(hi) < 1.0)
    throw std::runtime_error("entropy solve: failed to bracket the normalizer");

  int it = 0;
  while (it < opt.max_iter &&
         (hi - lo) > opt.lambda_tol * std::max(1.0, std::abs(lo) + std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (total(mid) < 1.0)
      lo = mid;
    else
      hi = mid;
    ++it;
  }
  const double lambda = 0.5 * (lo + hi);
  res.lambda = lambda;
  res.iterations = it;
  res.tolerance_met = std::abs(total(lambda) - 1.0) <= opt.sum_tol;

  // Exact renormalization: clipped coordinates keep their bounds, the free
  // mass is rescaled; a free coordinate pushed below its bound joins the
  // clipped set and the scale is recomputed.
  std::vector<double> raw(sup.size());
  std::vector<char> clipped(sup.size(), 0);
  for (size_t j = 0; j < sup.size(); ++j) {
    const int i = sup[j];
    raw[j] = req.anchor[i] * clamped_exp(req.rates[i] * (lambda - req.cost[i]));
    if (raw[j] <= region.lower_bounds[i]) clipped[j] = 1;
  }
  for (size_t pass = 0; pass <= sup.size(); ++pass) {
    double clipped_mass = 0, free_mass = 0;
    for (size_t j = 0; j < sup.size(); ++j) {
      if (clipped[j])
        clipped_mass += region.lower_bounds[sup[j]];
      else
        free_mass += raw[j];
    }
    if (free_mass <= 0) {
      for (size_t j = 0; j < sup.size(); ++j) res.weights[sup[j]] = region.lower_bounds[sup[j]];
      res.tolerance_met = false;
      break;
    }
    const double scale = (1.0 - clipped_mass) / free_mass;
    bool changed = false;
    for (size_t j = 0; j < sup.size(); ++j) {
      if (!clipped[j] && raw[j] * scale < region.lower_bounds[sup[j]] - 1e-15) {
        clipped[j] = 1;
        changed = true;
      }
    }
    if (!changed) {
      for (size_t j = 0; j < sup.size(); ++j)
        res.weights[sup[j]] = clipped[j] ? region.lower_bounds[sup[j]] : raw[j] * scale;
      break;
    }
  }
  return res;
}

Vec solve_weights(const EntropySolveRequest& req, const EntropySolveOptions& opt) {
  return solve(req, opt).weights;
}

double bregman(const Vec& u, const Vec& w, const Vec& rates) {
  const auto n = u.size();
  if (w.size() != n || rates.size() != n)
    throw std::invalid_argument("bregman: dimension mismatch");
  double s = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ui = u[i], wi = w[i];
    if (!(rates[i] > 0)) throw std::invalid_argument("bregman: rates must be positive");
    if (ui < 0 || wi < 0) throw std::invalid_argument("bregman: negative mass");
    if (ui == 0 && wi == 0) continue;
    if (ui > 0 && wi == 0)
      throw std::invalid_argument("bregman: comparator mass where the weight is zero");
    const double term = (ui > 0) ? ui * std::log(ui / wi) - ui + wi : wi;
    s += term / rates[i];
  }
  return s;
}

double entropy_objective(const EntropySolveRequest& req, const Vec& w) {
  if (w.size() != req.region.dim) throw std::invalid_argument("objective: dimension mismatch");
  return w.dot(req.cost) + bregman(w, req.anchor, req.rates);
}

}  // namespace msmwc
