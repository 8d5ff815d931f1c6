#pragma once

#include "msmwc/core_types.hpp"

#include <functional>

namespace msmwc {

// Convex decision regions for the linear-losses learners. Balls are centered
// at the origin; boxes are axis-aligned; ball_cap is their intersection.
struct DecisionRegion {
  enum class Kind { Ball, Box, BallCap };
  Kind kind = Kind::Ball;
  int dim = 0;
  double radius = 0;
  Vec box_lo, box_hi;

  static DecisionRegion ball(int dim, double radius);
  static DecisionRegion box(Vec lo, Vec hi);
  static DecisionRegion ball_cap(Vec lo, Vec hi, double radius);

  bool contains(const Vec& w, double tol = 1e-9) const;
  Vec project_euclidean(const Vec& y) const;
};

struct QuadProjectOptions {
  double tol = 1e-12;
  int max_iter = 10000;
};

// argmin_{w in region} (w - y)' A (w - y) for symmetric positive-definite A.
// Ball: secular-equation root in the eigenbasis. Box: active-set Newton.
// Ball-cap: projected gradient with Euclidean alternating projections.
Vec project_quadratic(const Vec& y, const Mat& A, const DecisionRegion& region,
                      const QuadProjectOptions& opt = {});
// Same, with the eigendecomposition of A supplied (Q diag(evals) Q').
Vec project_quadratic(const Vec& y, const Mat& Q, const Vec& evals,
                      const DecisionRegion& region, const QuadProjectOptions& opt = {});

// (A + v v')^{-1} from A^{-1} in O(d^2).
Mat rank_one_inverse_update(const Mat& A_inv, const Vec& v);

// Symmetric PSD square root via eigendecomposition.
Mat matrix_sqrt_psd(const Mat& A);

// Second-order optimistic learner for linear losses. The quadratic geometry is
//   A_t = eta * ((4 z_1^2 + 4 z_t^2) I + sum_{s<t} (g_s - m_s)(g_s - m_s)')
// where g_t = loss + 32*eta*<w_t [- center], loss - target>*(loss - target);
// the recentered flag selects the centered inner product and requires the
// aggregate play as center. The range hints z_t must be nondecreasing and
// dominate ||loss_t - target_t||_2.
struct OnsConfig {
  int dim = 0;
  double eta = 0;
  DecisionRegion region;
  bool recentered = false;
  std::function<double(long)> range_hint;  // z_t, default 1
};

class OnsLearner : public RoundProtocol {
 public:
  explicit OnsLearner(OnsConfig cfg);
  int dim() const override { return cfg_.dim; }
  const Mat& geometry() const { return A_; }  // A_t of the current round

 protected:
  Vec do_begin(const Vec& hint) override;
  void do_end(const Vec& loss, const Vec& target, const Vec& center) override;

 private:
  void refresh_geometry(double z_t);
  Vec mirror_step(const Vec& from, const Vec& grad);
  OnsConfig cfg_;
  Mat M_;       // accumulated outer products
  Mat A_;       // eta * ((4 z1^2 + 4 z^2) I + M)
  Mat B_inv_;   // inverse of A_ / eta
  double z1_ = 0, z_cur_ = 0;
  bool eig_valid_ = false;
  Eigen::SelfAdjointEigenSolver<Mat> eig_;
  Vec anchor_;  // w'_t
  Vec play_;
  Vec m_cur_;
};

// Optimistic projected gradient descent: play Proj(anchor - eta*hint), update
// anchor to Proj(anchor - eta*loss). Projections are Euclidean.
class OptGdLearner : public RoundProtocol {
 public:
  OptGdLearner(int dim, double eta, DecisionRegion region);
  int dim() const override { return dim_; }
  const Vec& anchor() const { return anchor_; }

 protected:
  Vec do_begin(const Vec& hint) override;
  void do_end(const Vec& loss, const Vec& target, const Vec& center) override;

 private:
  int dim_;
  double eta_;
  DecisionRegion region_;
  Vec anchor_;
};

// Optimistic follow-the-regularized-leader with a full-matrix square-root
// preconditioner: decisions minimize <w, past gradients + hint> + 0.5 w'Aw
// with A = (1/eta) (I + G)^{1/2}, G = accumulated corrected-gradient outer
// products. The correction uses its own rate eta_prime.
class AdaGradLearner : public RoundProtocol {
 public:
  AdaGradLearner(int dim, double eta, double eta_prime, DecisionRegion region);
  int dim() const override { return dim_; }
  const Mat& accumulator() const { return G_; }

 protected:
  Vec do_begin(const Vec& hint) override;
  void do_end(const Vec& loss, const Vec& target, const Vec& center) override;

 private:
  int dim_;
  double eta_, eta_prime_;
  DecisionRegion region_;
  Mat G_;
  Vec grad_sum_;
  Eigen::SelfAdjointEigenSolver<Mat> eig_;  // of G_
  Vec play_;
};

// Plays a fixed point (the origin) every round; the degenerate fallback when a
// requested region is too small for a tuned pool.
class ConstantLearner : public RoundProtocol {
 public:
  explicit ConstantLearner(int dim) : dim_(dim) {
    if (dim <= 0) throw std::invalid_argument("constant learner: bad dimension");
  }
  int dim() const override { return dim_; }

 protected:
  Vec do_begin(const Vec&) override { return Vec::Zero(dim_); }
  void do_end(const Vec&, const Vec&, const Vec&) override {}

 private:
  int dim_;
};

}  // namespace msmwc
