/*
 * Copyright 2026 The gpbf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GPBF_LOWRANK_HPP
#define GPBF_LOWRANK_HPP

#include <cmath>
#include <utility>

#include "gpbf/linalg.hpp"
#include "gpbf/models.hpp"

namespace gpbf {

/*
 * Structured evaluators for the projection-prior families.  Their marginal
 * covariance is E + c Q Q' with E either sigma_eps^2 I or the stationary
 * AR(1) error covariance, whose inverse is tridiagonal.  Determinant-lemma
 * and Woodbury identities reduce each likelihood evaluation to O(n k^2),
 * which is what makes the quadrature-over-rho experiments affordable.
 *
 * The dense SpdMatrix route computes the same quantities; tests hold the
 * two within 1e-8 of each other.
 */

// Error-covariance structure E with O(n) precision application.
struct NoiseStructure {
  enum class Kind { Iid, Ar1 };
  Kind kind = Kind::Iid;
  double sigma_eps_sq = 1.0;
  double rho = 0.0;  // Ar1 only

  static NoiseStructure iid(double s2e) { return {Kind::Iid, s2e, 0.0}; }
  static NoiseStructure ar1(double s2e, double rho) {
    if (!(std::abs(rho) < 1)) throw InvalidArgument("NoiseStructure: |rho| must be < 1");
    return {Kind::Ar1, s2e, rho};
  }

  // E^{-1} v; the AR(1) precision is tridiagonal.
  VectorXd apply_precision(const VectorXd& v) const {
    if (kind == Kind::Iid) return v / sigma_eps_sq;
    const auto n = v.size();
    VectorXd out(n);
    if (n == 1) {
      out(0) = (1.0 - rho * rho) * v(0);
    } else {
      out(0) = v(0) - rho * v(1);
      for (Eigen::Index i = 1; i + 1 < n; ++i)
        out(i) = (1.0 + rho * rho) * v(i) - rho * (v(i - 1) + v(i + 1));
      out(n - 1) = v(n - 1) - rho * v(n - 2);
    }
    return out / sigma_eps_sq;
  }

  MatrixXd apply_precision(const MatrixXd& m) const {
    MatrixXd out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out.col(j) = apply_precision(VectorXd(m.col(j)));
    return out;
  }

  // log |E|; uses |Sigma_eps| = (1 - rho^2)^{n-1} for the AR(1) Toeplitz.
  double log_det(Eigen::Index n) const {
    if (kind == Kind::Iid) return n * std::log(sigma_eps_sq);
    return n * std::log(sigma_eps_sq) - std::log(1.0 - rho * rho);
  }
};

// Gaussian marginal with covariance E + c Q Q'; Q has orthonormal columns.
class LowRankGaussian {
 public:
  LowRankGaussian(VectorXd mu, NoiseStructure noise, MatrixXd q, double c)
      : mu_(std::move(mu)), noise_(noise), q_(std::move(q)), c_(c) {
    if (q_.rows() != mu_.size())
      throw DimensionMismatch("LowRankGaussian: Q rows vs mu length");
    if (q_.cols() > 0) {
      eq_ = noise_.apply_precision(q_);
      MatrixXd cap = MatrixXd::Identity(q_.cols(), q_.cols()) +
                     c_ * (q_.transpose() * eq_);
      cap_ = Eigen::LLT<MatrixXd>(0.5 * (cap + cap.transpose()));
      if (cap_.info() != Eigen::Success)
        throw NotPositiveDefinite("LowRankGaussian capacitance matrix");
      cap_log_det_ = 0.0;
      for (Eigen::Index i = 0; i < q_.cols(); ++i)
        cap_log_det_ += 2.0 * std::log(cap_.matrixLLT()(i, i));
    }
  }

  Eigen::Index n() const { return mu_.size(); }

  double log_det() const { return noise_.log_det(n()) + cap_log_det_; }

  // (y - mu)' (E + c Q Q')^{-1} (y - mu) by the Woodbury identity
  double quad(const VectorXd& y) const {
    if (y.size() != mu_.size())
      throw DimensionMismatch("LowRankGaussian::quad: y length");
    VectorXd r = y - mu_;
    VectorXd er = noise_.apply_precision(r);
    double q = r.dot(er);
    if (q_.cols() > 0) {
      VectorXd qe = q_.transpose() * er;
      q -= c_ * qe.dot(cap_.solve(qe));
    }
    return q;
  }

  double log_pdf(const VectorXd& y) const {
    const double nn = static_cast<double>(n());
    return -0.5 * (nn * std::log(2.0 * M_PI) + log_det() + quad(y));
  }

 private:
  VectorXd mu_;
  NoiseStructure noise_;
  MatrixXd q_;
  double c_;
  MatrixXd eq_;
  Eigen::LLT<MatrixXd> cap_;
  double cap_log_det_ = 0.0;
};

// Student-t marginal on a low-rank scale structure Psi = E + c Q Q'
// (error variance integrated out under inverse-gamma(alpha, beta)).
inline double log_marginal_t_lowrank(const VectorXd& y, const LowRankGaussian& psi,
                                     double alpha, double beta) {
  if (!(alpha > 2)) throw InvalidArgument("log_marginal_t_lowrank: alpha > 2 required");
  if (!(beta > 0)) throw InvalidArgument("log_marginal_t_lowrank: beta > 0 required");
  const double n = static_cast<double>(y.size());
  const double q = psi.quad(y);
  return std::lgamma(alpha + 0.5 * n) - std::lgamma(alpha) + alpha * std::log(beta) -
         0.5 * n * std::log(2.0 * M_PI) - 0.5 * psi.log_det() -
         (alpha + 0.5 * n) * std::log(beta + 0.5 * q);
}

/*
 * Shared-factor prefix evaluator for the dense (kernel) family: the n-point
 * marginal covariance is the leading block of the n_max-point one, so its
 * Cholesky factor is the leading block of the full factor.  Each prefix is
 * factored independently to keep results identical across different grids.
 */
class PrefixGaussian {
 public:
  PrefixGaussian(const VectorXd& mu_full, const MatrixXd& cov_full, Eigen::Index n)
      : n_(n), mu_(mu_full.head(n)), cov_(cov_full.topLeftCorner(n, n)) {}

  double log_pdf(const VectorXd& y_full) const {
    const double nn = static_cast<double>(n_);
    return -0.5 * (nn * std::log(2.0 * M_PI) + cov_.log_det() +
                   cov_.quad_form(y_full.head(n_) - mu_));
  }

  std::pair<double, double> quad_and_log_det(const VectorXd& y_full) const {
    return {cov_.quad_form(y_full.head(n_) - mu_), cov_.log_det()};
  }

 private:
  Eigen::Index n_;
  VectorXd mu_;
  SpdMatrix cov_;
};

}  // namespace gpbf

#endif  // GPBF_LOWRANK_HPP
