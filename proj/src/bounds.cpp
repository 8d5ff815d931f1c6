#include "msmwc/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace msmwc {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("bounds: " + what);
}

double sqrt0(double x) { return x > 0 ? std::sqrt(x) : 0.0; }

// Check u is a probability vector (tolerantly).
void check_simplex(const Vec& u) {
  require(u.size() > 0, "empty comparator");
  require((u.array() >= -1e-12).all(), "comparator has negative mass");
  require(std::abs(u.sum() - 1.0) <= 1e-9, "comparator mass != 1");
}

// Resolve the target series: empty means all-zero.
Vec target_at(const BoundInputs& in, std::size_t t) {
  if (in.targets.empty()) return Vec::Zero(in.losses[t].size());
  return in.targets[t];
}

void check_series(const BoundInputs& in, bool need_plays = false) {
  require(!in.losses.empty(), "empty loss series");
  const Eigen::Index dim = in.losses.front().size();
  require(in.targets.empty() || in.targets.size() == in.losses.size(),
          "target series length mismatch");
  for (const Vec& l : in.losses) require(l.size() == dim, "ragged loss series");
  for (const Vec& m : in.targets) require(m.size() == dim, "ragged target series");
  if (need_plays) {
    require(in.plays.size() == in.losses.size(), "play series length mismatch");
    for (const Vec& w : in.plays) require(w.size() == dim, "ragged play series");
  }
}

double kl_divergence(const Vec& u, const Vec& prior) {
  require(prior.size() == u.size(), "prior dimension mismatch");
  require((prior.array() > 0).all(), "prior must be strictly positive");
  double kl = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u[i] > 0) kl += u[i] * std::log(u[i] / prior[i]);
  }
  return kl;
}

double weighted_sq(const Vec& u, const Vec& err) {
  return (u.array() * err.array().square()).sum();
}

// max{3, sum_t sum_i u_i err_{t,i}^2}
double comparator_variance(const BoundInputs& in) {
  double s = 0;
  for (std::size_t t = 0; t < in.losses.size(); ++t) {
    s += weighted_sq(in.u, in.losses[t] - target_at(in, t));
  }
  return std::max(3.0, s);
}

}  // namespace

double f_kl(double a, double b) {
  require(a >= 0 && a <= 1 && b >= 0 && b <= 1, "f_kl arguments outside [0,1]");
  if (a == 0) return b;
  if (b == 0) return std::numeric_limits<double>::infinity();
  return a * std::log(a / b) - a + b;
}

double BoundReport::term(const std::string& name) const {
  for (const BoundTerm& t : terms) {
    if (t.name == name) return t.value;
  }
  throw std::invalid_argument("bounds: no term named " + name);
}

double BoundReport::ratio() const {
  if (bound > 0) return realized / bound;
  return realized <= 0 ? 0.0 : std::numeric_limits<double>::infinity();
}

BoundReport anytime_decomposition_rhs(const std::vector<MsMwcHistoryRound>& history,
                                      const Vec& u) {
  require(!history.empty(), "empty history (was record_history enabled?)");
  check_simplex(u);
  const Eigen::Index d = history.front().anchor_before.size();
  require(u.size() == d, "comparator dimension mismatch");

  double initial_div = 0;
  double rate_shift_div = 0;
  double comparator_corr = 0;
  double played_corr = 0;
  double learner_loss = 0;
  double comparator_loss = 0;

  for (std::size_t t = 0; t < history.size(); ++t) {
    const MsMwcHistoryRound& h = history[t];
    require(h.loss.size() == d && h.target.size() == d && h.rates.size() == d &&
                h.anchor_before.size() == d && h.decision.size() == d,
            "incomplete history round");
    const Vec err_sq = (h.loss - h.target).array().square().matrix();
    if (t == 0) {
      for (Eigen::Index i = 0; i < d; ++i) {
        initial_div += f_kl(u[i], h.anchor_before[i]) / h.rates[i];
      }
    } else {
      const Vec& prev = history[t - 1].rates;
      for (Eigen::Index i = 0; i < d; ++i) {
        const double delta = 1.0 / h.rates[i] - 1.0 / prev[i];
        if (delta != 0) rate_shift_div += delta * f_kl(u[i], h.anchor_before[i]);
      }
    }
    comparator_corr += 32.0 * (h.rates.array() * u.array() * err_sq.array()).sum();
    played_corr -= 16.0 * (h.rates.array() * h.decision.array() * err_sq.array()).sum();
    learner_loss += h.decision.dot(h.loss);
    comparator_loss += u.dot(h.loss);
  }

  BoundReport r;
  r.id = "anytime_decomposition";
  r.terms = {{"initial_divergence", initial_div},
             {"rate_shift_divergence", rate_shift_div},
             {"comparator_correction", comparator_corr},
             {"played_correction", played_corr}};
  r.audit_constant = 1;
  r.bound = initial_div + rate_shift_div + comparator_corr + played_corr;
  r.realized = learner_loss - comparator_loss;
  r.checkpoint = static_cast<long>(history.size());
  return r;
}

BoundReport aggregation_rhs(const MasterAudit& audit, int k_star, const Vec& u) {
  require(audit.rounds > 0, "audit covers no rounds");
  require(k_star >= 0 && k_star < static_cast<int>(audit.eta.size()),
          "expert index out of range");
  require(u.size() == audit.sum_loss.size(), "comparator dimension mismatch");
  check_simplex(u);

  const double eta_star = audit.eta[static_cast<std::size_t>(k_star)];
  double sum_eta = 0;
  double sum_eta_sq = 0;
  for (double e : audit.eta) {
    sum_eta += e;
    sum_eta_sq += e * e;
  }
  const double base_regret =
      audit.cum_g[static_cast<std::size_t>(k_star)] - u.dot(audit.sum_loss);
  const double rate_overhead =
      std::log(sum_eta_sq / (eta_star * eta_star)) / eta_star;
  const double prior_overhead = sum_eta / sum_eta_sq;
  const double base_correction =
      32.0 * eta_star * audit.cum_err_sq[static_cast<std::size_t>(k_star)];

  BoundReport r;
  r.id = "aggregation";
  r.terms = {{"base_regret", base_regret},
             {"rate_overhead", rate_overhead},
             {"prior_overhead", prior_overhead},
             {"base_correction", base_correction}};
  r.audit_constant = 1;
  r.bound = base_regret + rate_overhead + prior_overhead + base_correction;
  r.realized = audit.learner_cumulative - u.dot(audit.sum_loss);
  r.checkpoint = audit.rounds;
  return r;
}

Mat error_outer_sum(const std::vector<Vec>& losses, const std::vector<Vec>& targets) {
  if (losses.empty()) throw std::invalid_argument("bounds: empty loss series");
  const Eigen::Index d = losses.front().size();
  Mat L = Mat::Zero(d, d);
  for (std::size_t t = 0; t < losses.size(); ++t) {
    Vec err = losses[t];
    if (!targets.empty()) err -= targets[t];
    L.noalias() += err * err.transpose();
  }
  return L;
}

int numerical_rank(const Mat& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("bounds: rank of non-square matrix");
  Eigen::SelfAdjointEigenSolver<Mat> eig(A);
  if (eig.info() != Eigen::Success) throw std::runtime_error("bounds: eigensolver failed");
  const double tol = 1e-8 * std::max(A.trace(), 0.0);
  int r = 0;
  for (Eigen::Index j = 0; j < A.rows(); ++j) {
    if (eig.eigenvalues()[j] > tol) ++r;
  }
  return r;
}

namespace {

BoundReport impossible_tuning_bound(const BoundInputs& in, double audit) {
  check_series(in);
  require(in.d >= 1 && in.T >= 1, "missing dimension/horizon");
  require(in.i_star >= 0 && in.i_star < in.losses.front().size(),
          "comparator expert index out of range");
  const double log_dt = std::log(static_cast<double>(in.d) * static_cast<double>(in.T));
  double s = 0;
  for (std::size_t t = 0; t < in.losses.size(); ++t) {
    const double e = in.losses[t][in.i_star] - target_at(in, t)[in.i_star];
    s += e * e;
  }
  BoundReport r;
  r.id = "impossible_tuning";
  r.terms = {{"log_term", log_dt}, {"sqrt_term", sqrt0(log_dt * s)}};
  r.audit_constant = audit;
  r.bound = audit * (log_dt + sqrt0(log_dt * s));
  return r;
}

BoundReport kl_corrected_bound(const BoundInputs& in, double audit) {
  check_series(in);
  check_simplex(in.u);
  require(in.u.size() == in.losses.front().size(), "comparator dimension mismatch");
  Vec prior = in.prior;
  if (prior.size() == 0) prior = Vec::Constant(in.u.size(), 1.0 / in.u.size());
  const double kl = kl_divergence(in.u, prior);
  const double v = comparator_variance(in);
  const double head = kl + std::log(v);
  BoundReport r;
  r.id = "kl_corrected";
  r.terms = {{"kl", kl},
             {"log_variance", std::log(v)},
             {"sqrt_term", sqrt0(head * v)}};
  r.audit_constant = audit;
  r.bound = audit * (head + sqrt0(head * v));
  return r;
}

BoundReport multi_scale_bound(const BoundInputs& in, double audit) {
  check_series(in);
  require(in.d >= 1 && in.T >= 1, "missing dimension/horizon");
  require(in.ranges.size() == in.losses.front().size(), "missing per-coordinate ranges");
  require((in.ranges.array() > 0).all(), "ranges must be positive");
  require(in.i_star >= 0 && in.i_star < in.losses.front().size(),
          "comparator expert index out of range");
  const double c_min = in.ranges.minCoeff();
  const double c_star = in.ranges[in.i_star];
  const double gamma = std::log(static_cast<double>(in.d) * static_cast<double>(in.T) *
                                c_star / c_min);
  double s = 0;
  for (std::size_t t = 0; t < in.losses.size(); ++t) {
    const double e = in.losses[t][in.i_star] - target_at(in, t)[in.i_star];
    s += e * e;
  }
  BoundReport r;
  r.id = "multi_scale";
  r.terms = {{"scaled_log", c_star * gamma}, {"sqrt_term", sqrt0(gamma * s)}};
  r.audit_constant = audit;
  r.bound = audit * (c_star * gamma + sqrt0(gamma * s));
  return r;
}

BoundReport switching_bound(const BoundInputs& in, double audit) {
  check_series(in);
  require(in.d >= 1 && in.T >= 1, "missing dimension/horizon");
  require(!in.partition.empty(), "missing interval partition");
  require(in.interval_comparators.size() == in.partition.size(),
          "one comparator per interval required");
  const long n = static_cast<long>(in.losses.size());
  const double log_dt = std::log(static_cast<double>(in.d) * static_cast<double>(in.T));
  long prev_end = 0;
  double sqrt_sum = 0;
  for (std::size_t j = 0; j < in.partition.size(); ++j) {
    const auto [lo, hi] = in.partition[j];
    require(lo == prev_end + 1 && hi >= lo && hi <= n, "partition must tile the horizon");
    prev_end = hi;
    const Vec& uj = in.interval_comparators[j];
    check_simplex(uj);
    require(uj.size() == in.losses.front().size(), "interval comparator dimension mismatch");
    double s = 0;
    for (long t = lo; t <= hi; ++t) {
      s += weighted_sq(uj, in.losses[t - 1] - target_at(in, t - 1));
    }
    sqrt_sum += sqrt0(log_dt * s);
  }
  require(prev_end == n, "partition must cover the whole series");
  const double switches = static_cast<double>(in.partition.size());
  BoundReport r;
  r.id = "switching";
  r.terms = {{"switch_log", switches * log_dt}, {"interval_sqrt_sum", sqrt_sum}};
  r.audit_constant = audit;
  r.bound = audit * (switches * log_dt + sqrt_sum);
  return r;
}

BoundReport unknown_range_bound(const BoundInputs& in, double audit) {
  check_series(in);
  check_simplex(in.u);
  require(in.u.size() == in.losses.front().size(), "comparator dimension mismatch");
  require(in.T >= 1, "missing horizon");
  require(in.B > 0, "missing final range");
  Vec prior = in.prior;
  if (prior.size() == 0) prior = Vec::Constant(in.u.size(), 1.0 / in.u.size());
  const double kl = kl_divergence(in.u, prior);
  const double head = kl + std::log(static_cast<double>(in.T));
  const double v = comparator_variance(in);
  BoundReport r;
  r.id = "unknown_range";
  r.terms = {{"range_log", in.B * head}, {"sqrt_term", sqrt0(head * v)}};
  r.audit_constant = audit;
  r.bound = audit * (in.B * head + sqrt0(head * v));
  return r;
}

BoundReport second_order_rank_bound(const BoundInputs& in, double audit) {
  check_series(in);
  require(in.u.size() == in.losses.front().size(), "comparator dimension mismatch");
  const Mat L = error_outer_sum(in.losses, in.targets);
  const double rank = numerical_rank(L);
  const double norm_u = in.u.norm();
  double s = 0;
  for (std::size_t t = 0; t < in.losses.size(); ++t) {
    const double e = in.u.dot(in.losses[t] - target_at(in, t));
    s += e * e;
  }
  BoundReport r;
  r.id = "second_order_rank";
  r.terms = {{"rank", rank},
             {"rank_norm", rank * norm_u},
             {"sqrt_term", sqrt0(rank * s)}};
  r.audit_constant = audit;
  r.bound = audit * (rank * norm_u + sqrt0(rank * s));
  return r;
}

BoundReport gradient_norm_bound(const BoundInputs& in, double audit) {
  check_series(in);
  require(in.u.size() == in.losses.front().size(), "comparator dimension mismatch");
  const double norm_u = in.u.norm();
  double s = 0;
  for (std::size_t t = 0; t < in.losses.size(); ++t) {
    s += (in.losses[t] - target_at(in, t)).squaredNorm();
  }
  BoundReport r;
  r.id = "gradient_norm";
  r.terms = {{"norm", norm_u}, {"sqrt_term", norm_u * sqrt0(s)}};
  r.audit_constant = audit;
  r.bound = audit * (norm_u + norm_u * sqrt0(s));
  return r;
}

BoundReport preconditioner_trace_bound(const BoundInputs& in, double audit) {
  check_series(in);
  require(in.u.size() == in.losses.front().size(), "comparator dimension mismatch");
  const Mat L = error_outer_sum(in.losses, in.targets);
  Eigen::SelfAdjointEigenSolver<Mat> eig(L);
  if (eig.info() != Eigen::Success) throw std::runtime_error("bounds: eigensolver failed");
  const Vec lam = eig.eigenvalues().cwiseMax(0.0);
  const Vec proj = eig.eigenvectors().transpose() * in.u;
  double quad = 0;  // u' (I + L)^{1/2} u
  double trace_root = 0;
  for (Eigen::Index j = 0; j < lam.size(); ++j) {
    quad += std::sqrt(1.0 + lam[j]) * proj[j] * proj[j];
    trace_root += std::sqrt(lam[j]);
  }
  const double norm_u = in.u.norm();
  BoundReport r;
  r.id = "preconditioner_trace";
  r.terms = {{"norm", norm_u}, {"sqrt_term", sqrt0(quad * trace_root)}};
  r.audit_constant = audit;
  r.bound = audit * (norm_u + sqrt0(quad * trace_root));
  return r;
}

BoundReport recentered_rank_bound(const BoundInputs& in, double audit) {
  check_series(in, /*need_plays=*/true);
  require(in.u.size() == in.losses.front().size(), "comparator dimension mismatch");
  require(in.D > 0, "missing region radius");
  const Mat L = error_outer_sum(in.losses, in.targets);
  const double rank = numerical_rank(L);
  double s = 0;
  for (std::size_t t = 0; t < in.losses.size(); ++t) {
    const double e = (in.u - in.plays[t]).dot(in.losses[t] - target_at(in, t));
    s += e * e;
  }
  BoundReport r;
  r.id = "recentered_rank";
  r.terms = {{"rank", rank},
             {"rank_radius", rank * in.D},
             {"sqrt_term", sqrt0(rank * s)}};
  r.audit_constant = audit;
  r.bound = audit * (rank * in.D + sqrt0(rank * s));
  return r;
}

}  // namespace

BoundReport theorem_bound(const std::string& id, const BoundInputs& in, double audit) {
  require(audit > 0, "audit constant must be positive");
  BoundReport r;
  if (id == "impossible_tuning") {
    r = impossible_tuning_bound(in, audit);
  } else if (id == "kl_corrected") {
    r = kl_corrected_bound(in, audit);
  } else if (id == "multi_scale") {
    r = multi_scale_bound(in, audit);
  } else if (id == "switching") {
    r = switching_bound(in, audit);
  } else if (id == "unknown_range") {
    r = unknown_range_bound(in, audit);
  } else if (id == "second_order_rank") {
    r = second_order_rank_bound(in, audit);
  } else if (id == "gradient_norm") {
    r = gradient_norm_bound(in, audit);
  } else if (id == "preconditioner_trace") {
    r = preconditioner_trace_bound(in, audit);
  } else if (id == "recentered_rank") {
    r = recentered_rank_bound(in, audit);
  } else {
    throw std::invalid_argument("bounds: unknown bound id " + id);
  }
  r.realized = in.realized;
  r.checkpoint = static_cast<long>(in.losses.size());
  return r;
}

}  // namespace msmwc
