#include "msmwc/olo_base.hpp"

#include <cmath>

namespace msmwc {

DecisionRegion DecisionRegion::ball(int dim, double radius) {
  if (dim <= 0) throw std::invalid_argument("region: bad dimension");
  if (!(radius > 0) || !std::isfinite(radius))
    throw std::invalid_argument("region: radius must be positive");
  DecisionRegion r;
  r.kind = Kind::Ball;
  r.dim = dim;
  r.radius = radius;
  return r;
}

DecisionRegion DecisionRegion::box(Vec lo, Vec hi) {
  if (lo.size() == 0 || lo.size() != hi.size())
    throw std::invalid_argument("region: bad box bounds");
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    if (!(lo[i] <= hi[i])) throw std::invalid_argument("region: empty box");
  DecisionRegion r;
  r.kind = Kind::Box;
  r.dim = static_cast<int>(lo.size());
  r.box_lo = std::move(lo);
  r.box_hi = std::move(hi);
  return r;
}

DecisionRegion DecisionRegion::ball_cap(Vec lo, Vec hi, double radius) {
  DecisionRegion r = box(std::move(lo), std::move(hi));
  if (!(radius > 0)) throw std::invalid_argument("region: radius must be positive");
  r.kind = Kind::BallCap;
  r.radius = radius;
  // Nonempty iff the box point closest to the origin is inside the ball.
  Vec nearest(r.dim);
  for (int i = 0; i < r.dim; ++i) nearest[i] = std::clamp(0.0, r.box_lo[i], r.box_hi[i]);
  if (nearest.norm() > radius)
    throw std::invalid_argument("region: box/ball intersection is empty");
  return r;
}

bool DecisionRegion::contains(const Vec& w, double tol) const {
  if (w.size() != dim) return false;
  if (kind == Kind::Ball || kind == Kind::BallCap)
    if (w.norm() > radius + tol) return false;
  if (kind == Kind::Box || kind == Kind::BallCap)
    for (int i = 0; i < dim; ++i)
      if (w[i] < box_lo[i] - tol || w[i] > box_hi[i] + tol) return false;
  return true;
}

namespace {

Vec ball_project(const Vec& y, double r) {
  const double n = y.norm();
  return n > r ? Vec(y * (r / n)) : y;
}

Vec box_project(const Vec& y, const Vec& lo, const Vec& hi) {
  Vec w(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) w[i] = std::clamp(y[i], lo[i], hi[i]);
  return w;
}

// Euclidean projection onto box ∩ ball by Dykstra's alternating scheme.
Vec dykstra_box_ball(const Vec& y, const Vec& lo, const Vec& hi, double r) {
  Vec x = y, p = Vec::Zero(y.size()), q = Vec::Zero(y.size());
  for (int it = 0; it < 2000; ++it) {
    const Vec yb = box_project(x + p, lo, hi);
    p = x + p - yb;
    const Vec xb = ball_project(yb + q, r);
    q = yb + q - xb;
    if ((xb - x).norm() <= 1e-14 * std::max(1.0, xb.norm()) && xb.norm() <= r + 1e-12) {
      x = xb;
      break;
    }
    x = xb;
  }
  return x;
}

}  // namespace

Vec DecisionRegion::project_euclidean(const Vec& y) const {
  if (y.size() != dim) throw std::invalid_argument("region: projection dimension mismatch");
  switch (kind) {
    case Kind::Ball: return ball_project(y, radius);
    case Kind::Box: return box_project(y, box_lo, box_hi);
    case Kind::BallCap: {
      const Vec clipped = box_project(y, box_lo, box_hi);
      if (clipped.norm() <= radius) return clipped;
      return dykstra_box_ball(y, box_lo, box_hi, radius);
    }
  }
  throw std::logic_error("region: unreachable");
}

namespace {

// Ball case in the eigenbasis of A: with z = Q'y the optimum is
// w = Q diag(l_j/(l_j+nu)) z where nu >= 0 solves ||w(nu)|| = r.
Vec ball_secular(const Vec& y, const Mat& Q, const Vec& evals, double r) {
  const Vec z = Q.transpose() * y;
  const auto norm_at = [&](double nu) {
    double s = 0;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      const double w = evals[j] * z[j] / (evals[j] + nu);
      s += w * w;
    }
    return std::sqrt(s);
  };
  double lo = 0;
  double hi = evals.maxCoeff() * (y.norm() / r);
  while (norm_at(hi) > r) hi *= 2;  // defensive; the analytic bound suffices
  for (int it = 0; it < 200 && (hi - lo) > 1e-16 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (norm_at(mid) > r)
      lo = mid;
    else
      hi = mid;
  }
  const double nu = 0.5 * (lo + hi);
  Vec wt(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) wt[j] = evals[j] * z[j] / (evals[j] + nu);
  return Q * wt;
}

// Active-set Newton for the box: fix coordinates at bounds, solve the free
// block, clamp violations, release coordinates whose multiplier has the wrong
// sign. Falls back to projected gradient if it fails to settle.
Vec box_active_set(const Vec& y, const Mat& A, const DecisionRegion& region,
                   const QuadProjectOptions& opt) {
  const int d = static_cast<int>(y.size());
  enum class St { Free, AtLo, AtHi };
  std::vector<St> st(static_cast<size_t>(d), St::Free);
  Vec w(d);
  for (int i = 0; i < d; ++i) {
    if (y[i] <= region.box_lo[i]) {
      st[static_cast<size_t>(i)] = St::AtLo;
      w[i] = region.box_lo[i];
    } else if (y[i] >= region.box_hi[i]) {
      st[static_cast<size_t>(i)] = St::AtHi;
      w[i] = region.box_hi[i];
    } else {
      w[i] = y[i];
    }
  }
  const double scale = std::max(1.0, y.norm());
  const double release_tol = 1e-12 * scale * std::max(1.0, A.norm());
  for (int it = 0; it < 5 * d + 50; ++it) {
    std::vector<int> free;
    for (int i = 0; i < d; ++i)
      if (st[static_cast<size_t>(i)] == St::Free) free.push_back(i);
    if (!free.empty()) {
      const int f = static_cast<int>(free.size());
      Mat Aff(f, f);
      Vec rhs(f);
      for (int a = 0; a < f; ++a) {
        double r = 0;
        for (int i = 0; i < d; ++i) {
          if (st[static_cast<size_t>(i)] == St::Free) continue;
          r -= A(free[static_cast<size_t>(a)], i) * w[i];
        }
        rhs[a] = (A.row(free[static_cast<size_t>(a)]) * y)(0) + r;
        for (int b = 0; b < f; ++b)
          Aff(a, b) = A(free[static_cast<size_t>(a)], free[static_cast<size_t>(b)]);
      }
      const Vec x = Aff.llt().solve(rhs);
      bool clipped = false;
      for (int a = 0; a < f; ++a) {
        const int i = free[static_cast<size_t>(a)];
        if (x[a] < region.box_lo[i] - 1e-15 * scale) {
          st[static_cast<size_t>(i)] = St::AtLo;
          w[i] = region.box_lo[i];
          clipped = true;
        } else if (x[a] > region.box_hi[i] + 1e-15 * scale) {
          st[static_cast<size_t>(i)] = St::AtHi;
          w[i] = region.box_hi[i];
          clipped = true;
        } else {
          w[i] = x[a];
        }
      }
      if (clipped) continue;
    }
    const Vec grad = A * (w - y);
    bool released = false;
    for (int i = 0; i < d; ++i) {
      if (st[static_cast<size_t>(i)] == St::AtLo && grad[i] < -release_tol) {
        st[static_cast<size_t>(i)] = St::Free;
        released = true;
      } else if (st[static_cast<size_t>(i)] == St::AtHi && grad[i] > release_tol) {
        st[static_cast<size_t>(i)] = St::Free;
        released = true;
      }
    }
    if (!released) return w;
  }
  // Projected-gradient fallback (also the ball-cap path).
  const double step = 1.0 / std::max(A.operatorNorm(), 1e-12);
  Vec w2 = region.project_euclidean(y);
  for (int it = 0; it < opt.max_iter; ++it) {
    const Vec next = region.project_euclidean(w2 - step * (A * (w2 - y)));
    const double delta = (next - w2).norm();
    w2 = next;
    if (delta <= opt.tol * std::max(1.0, w2.norm())) break;
  }
  return w2;
}

Vec ballcap_pgd(const Vec& y, const Mat& A, const DecisionRegion& region,
                const QuadProjectOptions& opt) {
  const double step = 1.0 / std::max(A.operatorNorm(), 1e-12);
  Vec w = region.project_euclidean(y);
  for (int it = 0; it < opt.max_iter; ++it) {
    const Vec next = region.project_euclidean(w - step * (A * (w - y)));
    const double delta = (next - w).norm();
    w = next;
    if (delta <= opt.tol * std::max(1.0, w.norm())) break;
  }
  return w;
}

}  // namespace

Vec project_quadratic(const Vec& y, const Mat& Q, const Vec& evals,
                      const DecisionRegion& region, const QuadProjectOptions& opt) {
  if (y.size() != region.dim) throw std::invalid_argument("projection: dimension mismatch");
  if (evals.minCoeff() <= 0)
    throw std::invalid_argument("projection: geometry must be positive definite");
  if (region.contains(y, 0)) return y;
  if (region.kind == DecisionRegion::Kind::Ball) return ball_secular(y, Q, evals, region.radius);
  const Mat A = Q * evals.asDiagonal() * Q.transpose();
  if (region.kind == DecisionRegion::Kind::Box) return box_active_set(y, A, region, opt);
  return ballcap_pgd(y, A, region, opt);
}

Vec project_quadratic(const Vec& y, const Mat& A, const DecisionRegion& region,
                      const QuadProjectOptions& opt) {
  if (y.size() != region.dim || A.rows() != y.size() || A.cols() != y.size())
    throw std::invalid_argument("projection: dimension mismatch");
  if (region.contains(y, 0)) return y;
  if (region.kind == DecisionRegion::Kind::Ball) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(A);
    if (eig.info() != Eigen::Success)
      throw std::runtime_error("projection: eigendecomposition failed");
    if (eig.eigenvalues().minCoeff() <= 0)
      throw std::invalid_argument("projection: geometry must be positive definite");
    return ball_secular(y, eig.eigenvectors(), eig.eigenvalues(), region.radius);
  }
  if (region.kind == DecisionRegion::Kind::Box) return box_active_set(y, A, region, opt);
  return ballcap_pgd(y, A, region, opt);
}

Mat rank_one_inverse_update(const Mat& A_inv, const Vec& v) {
  if (A_inv.rows() != v.size() || A_inv.cols() != v.size())
    throw std::invalid_argument("rank-one update: dimension mismatch");
  const Vec u = A_inv * v;
  const double denom = 1.0 + v.dot(u);
  if (!(denom > 0)) throw std::invalid_argument("rank-one update: matrix not positive definite");
  return A_inv - (u * u.transpose()) / denom;
}

Mat matrix_sqrt_psd(const Mat& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("matrix sqrt: not square");
  Eigen::SelfAdjointEigenSolver<Mat> eig(A);
  if (eig.info() != Eigen::Success) throw std::runtime_error("matrix sqrt: eigendecomposition failed");
  Vec lam = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam[i] = std::sqrt(std::max(lam[i], 0.0));
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

OnsLearner::OnsLearner(OnsConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.dim <= 0) throw std::invalid_argument("second-order learner: bad dimension");
  if (!(cfg_.eta > 0)) throw std::invalid_argument("second-order learner: rate must be positive");
  if (cfg_.region.dim != cfg_.dim)
    throw std::invalid_argument("second-order learner: region dimension mismatch");
  if (!cfg_.range_hint) cfg_.range_hint = [](long) { return 1.0; };
  M_ = Mat::Zero(cfg_.dim, cfg_.dim);
  anchor_ = Vec::Zero(cfg_.dim);
  if (!cfg_.region.contains(anchor_, 1e-12))
    throw std::invalid_argument("second-order learner: region must contain the origin");
}

void OnsLearner::refresh_geometry(double z_t) {
  z_cur_ = z_t;
  const double c = 4.0 * z1_ * z1_ + 4.0 * z_cur_ * z_cur_;
  const Mat B = c * Mat::Identity(cfg_.dim, cfg_.dim) + M_;
  A_ = cfg_.eta * B;
  B_inv_ = B.llt().solve(Mat::Identity(cfg_.dim, cfg_.dim));
  eig_valid_ = false;
}

Vec OnsLearner::mirror_step(const Vec& from, const Vec& grad) {
  const Vec y = from - (B_inv_ * grad) / cfg_.eta;
  if (cfg_.region.contains(y, 0)) return y;
  if (!eig_valid_) {
    eig_.compute(A_ / cfg_.eta);
    if (eig_.info() != Eigen::Success)
      throw std::runtime_error("second-order learner: eigendecomposition failed");
    eig_valid_ = true;
  }
  return project_quadratic(y, eig_.eigenvectors(), eig_.eigenvalues(), cfg_.region);
}

Vec OnsLearner::do_begin(const Vec& hint) {
  const long t = round() + 1;
  const double z = cfg_.range_hint(t);
  if (!(z > 0) || !std::isfinite(z))
    throw std::invalid_argument("second-order learner: range hint must be positive");
  if (t == 1) {
    z1_ = z;
    refresh_geometry(z);
  } else if (z != z_cur_) {
    if (z < z_cur_ * (1 - 1e-12))
      throw std::invalid_argument("second-order learner: range hints must be nondecreasing");
    refresh_geometry(z);
  }
  m_cur_ = hint;
  play_ = mirror_step(anchor_, hint);
  return play_;
}

void OnsLearner::do_end(const Vec& loss, const Vec& target, const Vec& center) {
  const Vec err = loss - target;
  if (err.norm() > z_cur_ * (1 + 1e-9) + 1e-12)
    throw std::invalid_argument("second-order learner: loss outside the declared range");
  double s;
  if (cfg_.recentered) {
    if (center.size() != cfg_.dim)
      throw std::invalid_argument("second-order learner: recentered update needs the play center");
    s = (play_ - center).dot(err);
  } else {
    s = play_.dot(err);
  }
  const Vec grad = loss + (32.0 * cfg_.eta * s) * err;
  anchor_ = mirror_step(anchor_, grad);
  const Vec v = grad - target;
  M_ += v * v.transpose();
  A_ += cfg_.eta * (v * v.transpose());
  B_inv_ = rank_one_inverse_update(B_inv_, v);
  eig_valid_ = false;
}

OptGdLearner::OptGdLearner(int dim, double eta, DecisionRegion region)
    : dim_(dim), eta_(eta), region_(std::move(region)) {
  if (dim <= 0) throw std::invalid_argument("gradient learner: bad dimension");
  if (!(eta > 0)) throw std::invalid_argument("gradient learner: rate must be positive");
  if (region_.dim != dim) throw std::invalid_argument("gradient learner: region dimension mismatch");
  anchor_ = region_.project_euclidean(Vec::Zero(dim));
}

Vec OptGdLearner::do_begin(const Vec& hint) {
  return region_.project_euclidean(anchor_ - eta_ * hint);
}

void OptGdLearner::do_end(const Vec& loss, const Vec&, const Vec&) {
  anchor_ = region_.project_euclidean(anchor_ - eta_ * loss);
}

AdaGradLearner::AdaGradLearner(int dim, double eta, double eta_prime, DecisionRegion region)
    : dim_(dim), eta_(eta), eta_prime_(eta_prime), region_(std::move(region)) {
  if (dim <= 0) throw std::invalid_argument("adagrad learner: bad dimension");
  if (!(eta > 0) || !(eta_prime > 0))
    throw std::invalid_argument("adagrad learner: rates must be positive");
  if (region_.dim != dim) throw std::invalid_argument("adagrad learner: region dimension mismatch");
  G_ = Mat::Zero(dim, dim);
  grad_sum_ = Vec::Zero(dim);
  eig_.compute(G_);
}

Vec AdaGradLearner::do_begin(const Vec& hint) {
  // A = (1/eta) (I + G)^{1/2} in the eigenbasis of G.
  Vec a_evals(dim_);
  for (int j = 0; j < dim_; ++j)
    a_evals[j] = std::sqrt(1.0 + std::max(eig_.eigenvalues()[j], 0.0)) / eta_;
  const Vec c = grad_sum_ + hint;
  const Mat& Q = eig_.eigenvectors();
  const Vec y = -(Q * ((Q.transpose() * c).cwiseQuotient(a_evals)));
  play_ = region_.contains(y, 0) ? y : project_quadratic(y, Q, a_evals, region_);
  return play_;
}

void AdaGradLearner::do_end(const Vec& loss, const Vec& target, const Vec&) {
  const Vec err = loss - target;
  const Vec grad = loss + (32.0 * eta_prime_ * play_.dot(err)) * err;
  grad_sum_ += grad;
  const Vec v = grad - target;
  G_ += v * v.transpose();
  eig_.compute(G_);
  if (eig_.info() != Eigen::Success)
    throw std::runtime_error("adagrad learner: eigendecomposition failed");
}

}  // namespace msmwc
