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

#ifndef GPBF_MODELS_HPP
#define GPBF_MODELS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>

#include "gpbf/data.hpp"
#include "gpbf/errors.hpp"
#include "gpbf/linalg.hpp"

namespace gpbf {

/*
 * Moments of one marginal model: y ~ N(mu, noise_cov + sigma).
 * sigma is the (possibly rank-deficient) prior covariance of the latent
 * function values; noise_cov is the error covariance (a scaled identity,
 * or the stationary AR(1) covariance for correlated errors).
 */
struct ModelMoments {
  VectorXd mu;
  MatrixXd sigma;
  MatrixXd noise_cov;

  Eigen::Index n() const { return mu.size(); }
  MatrixXd marginal_cov() const { return noise_cov + sigma; }

  // Heavy invariant check (O(n^3)); used by tests, not by the hot path.
  void validate() const {
    if (sigma.rows() != n() || sigma.cols() != n() || noise_cov.rows() != n() ||
        noise_cov.cols() != n())
      throw DimensionMismatch("ModelMoments: inconsistent dimensions");
    auto [lo_s, hi_s] = extreme_eigs(0.5 * (sigma + sigma.transpose()));
    if (lo_s < -1e-10 * std::max(hi_s, 1.0))
      throw NumericError("ModelMoments: sigma not PSD (min eig " +
                         std::to_string(lo_s) + ")");
    auto [lo_n, hi_n] = extreme_eigs(0.5 * (noise_cov + noise_cov.transpose()));
    (void)hi_n;
    if (!(lo_n > 0)) throw NumericError("ModelMoments: noise_cov not SPD");
  }
};

// -------------------------------------------------------------------------
// Mean functions for the squared-exponential family: a constant, or a
// linear form truncated at +-bound.  Both are bounded on any input.
// -------------------------------------------------------------------------
struct MeanFunction {
  enum class Kind { Constant, ClippedLinear };
  Kind kind = Kind::Constant;
  double value = 0.0;    // Constant
  VectorXd coeffs;       // ClippedLinear: full-length coefficient vector
  double bound = 1.0;    // ClippedLinear: truncation level M_mu

  double bound_m_mu() const {
    return kind == Kind::Constant ? std::abs(value) : bound;
  }

  // Evaluate at one row of subset covariates (coeffs restricted to s).
  double eval(const Eigen::RowVectorXd& x_s, const SubsetMask& s) const {
    if (kind == Kind::Constant) return value;
    double acc = 0.0;
    for (int j = 0; j < s.size(); ++j) acc += coeffs(s.indices()[j] - 1) * x_s(j);
    return std::clamp(acc, -bound, bound);
  }
};

// -------------------------------------------------------------------------
// Model specs
// -------------------------------------------------------------------------
struct LinearZellnerSpec {
  VectorXd beta0;          // full-length prior mean; restricted per subset
  double sigma_beta_sq = 1.0;
  double g = 1.0;          // fixed in n (g_n = O(1))
  double sigma_eps_sq = 1.0;

  void validate(int p) const {
    if (beta0.size() != p)
      throw ValidationError("beta0", "must have length p = " + std::to_string(p));
    if (!(sigma_beta_sq > 0)) throw ValidationError("sigma_beta_sq", "must be > 0");
    if (!(g > 0) || !std::isfinite(g)) throw ValidationError("g", "must be finite and > 0");
    if (!(sigma_eps_sq > 0)) throw ValidationError("sigma_eps_sq", "must be > 0");
  }
};

struct SEKernelSpec {
  double sigma_f_sq = 1.0;
  VectorXd length_scales;  // diagonal entries of D_s, one per covariate
  MeanFunction mean_fn;
  double sigma_eps_sq = 1.0;

  void validate(int p) const {
    if (!(sigma_f_sq > 0)) throw ValidationError("sigma_f_sq", "must be > 0");
    if (length_scales.size() != p)
      throw ValidationError("length_scales", "must have length p = " + std::to_string(p));
    if (!(length_scales.minCoeff() > 0))
      throw ValidationError("length_scales", "entries must be > 0");
    if (!(sigma_eps_sq > 0)) throw ValidationError("sigma_eps_sq", "must be > 0");
    if (mean_fn.kind == MeanFunction::Kind::ClippedLinear) {
      if (mean_fn.coeffs.size() != p)
        throw ValidationError("mean.coeffs", "must have length p = " + std::to_string(p));
      if (!(mean_fn.bound > 0)) throw ValidationError("mean.bound", "must be > 0");
    }
  }
};

struct AR1Spec {
  double rho = 0.0;
  double gamma = 0.1;      // prior support is [-1+gamma, 1-gamma]
  VectorXd beta0;
  double sigma_beta_sq = 1.0;
  double g = 1.0;
  double sigma_eps_sq = 1.0;

  void validate(int p) const {
    if (!(gamma > 0) || gamma >= 1) throw ValidationError("gamma", "must be in (0, 1)");
    if (std::abs(rho) > 1 - gamma)
      throw ValidationError("rho", "must lie in [-1+gamma, 1-gamma] = [" +
                                       std::to_string(-1 + gamma) + ", " +
                                       std::to_string(1 - gamma) + "]");
    if (beta0.size() != p)
      throw ValidationError("beta0", "must have length p = " + std::to_string(p));
    if (!(sigma_beta_sq > 0)) throw ValidationError("sigma_beta_sq", "must be > 0");
    if (!(g > 0) || !std::isfinite(g)) throw ValidationError("g", "must be finite and > 0");
    if (!(sigma_eps_sq > 0)) throw ValidationError("sigma_eps_sq", "must be > 0");
  }
};

namespace detail {

// Thin-Q of a full-column-rank matrix; throws RankDeficient otherwise.
inline MatrixXd orthonormal_basis(const MatrixXd& a, const std::string& what) {
  if (a.cols() == 0) return MatrixXd(a.rows(), 0);
  Eigen::ColPivHouseholderQR<MatrixXd> qr(a);
  if (qr.rank() < a.cols())
    throw RankDeficient(what + ": rank " + std::to_string(qr.rank()) + " < " +
                        std::to_string(a.cols()) + " columns");
  Eigen::HouseholderQR<MatrixXd> plain(a);
  MatrixXd q = plain.householderQ() * MatrixXd::Identity(a.rows(), a.cols());
  return q;
}

}  // namespace detail

// -------------------------------------------------------------------------
// Zellner linear model: the g-prior on beta_s induces a Gaussian process
// with mean X_s beta_{0,s} and covariance sigma_beta^2 g P_{n,s}, the
// scaled projection onto the column span of X_s.
// -------------------------------------------------------------------------
inline ModelMoments build_linear_zellner(const Dataset& data, const SubsetMask& s,
                                         const LinearZellnerSpec& spec) {
  spec.validate(static_cast<int>(data.p()));
  const auto n = data.n();
  ModelMoments m;
  m.noise_cov = spec.sigma_eps_sq * MatrixXd::Identity(n, n);
  if (s.empty()) {
    m.mu = VectorXd::Zero(n);
    m.sigma = MatrixXd::Zero(n, n);
    return m;
  }
  MatrixXd xs = data.columns(s);
  MatrixXd q = detail::orthonormal_basis(xs, "build_linear_zellner(" + s.label() + ")");
  VectorXd b0(s.size());
  for (int j = 0; j < s.size(); ++j) b0(j) = spec.beta0(s.indices()[j] - 1);
  m.mu = xs * b0;
  m.sigma = (spec.sigma_beta_sq * spec.g) * (q * q.transpose());
  return m;
}

// Unit-diagonal SE correlation matrix on the subset coordinates; the
// assumption audit consumes this directly for the row-sum constant K_s.
inline MatrixXd se_correlation(const Dataset& data, const SubsetMask& s,
                               const SEKernelSpec& spec) {
  const auto n = data.n();
  MatrixXd sq = MatrixXd::Zero(n, n);
  for (int j = 0; j < s.size(); ++j) {
    const double d = spec.length_scales(s.indices()[j] - 1);
    const VectorXd col = data.X.col(s.indices()[j] - 1);
    sq.noalias() += d * (col.replicate(1, n) - col.transpose().replicate(n, 1))
                            .array()
                            .square()
                            .matrix();
  }
  return (-0.5 * sq.array()).exp();
}

inline ModelMoments build_se_gp(const Dataset& data, const SubsetMask& s,
                                const SEKernelSpec& spec) {
  spec.validate(static_cast<int>(data.p()));
  const auto n = data.n();
  ModelMoments m;
  m.noise_cov = spec.sigma_eps_sq * MatrixXd::Identity(n, n);
  m.mu.resize(n);
  if (s.empty()) {
    const double c = spec.mean_fn.kind == MeanFunction::Kind::Constant
                         ? spec.mean_fn.value
                         : 0.0;
    m.mu.setConstant(c);
    m.sigma = MatrixXd::Zero(n, n);
    return m;
  }
  MatrixXd xs = data.columns(s);
  for (Eigen::Index i = 0; i < n; ++i) m.mu(i) = spec.mean_fn.eval(xs.row(i), s);
  m.sigma = spec.sigma_f_sq * se_correlation(data, s, spec);
  return m;
}

// -------------------------------------------------------------------------
// AR(1) structural pieces
// -------------------------------------------------------------------------

// Transformed design z_t = rho z_{t-1} + x_t (z_0 = 0), columns restricted
// to the subset.
inline MatrixXd build_ar1_design(const Dataset& data, const SubsetMask& s, double rho) {
  if (!(std::abs(rho) < 1)) throw InvalidArgument("build_ar1_design: |rho| must be < 1");
  MatrixXd xs = data.columns(s);
  MatrixXd z(xs.rows(), xs.cols());
  Eigen::RowVectorXd prev = Eigen::RowVectorXd::Zero(xs.cols());
  for (Eigen::Index t = 0; t < xs.rows(); ++t) {
    prev = rho * prev + xs.row(t);
    z.row(t) = prev;
  }
  return z;
}

// Stationary AR(1) error covariance sigma_eps^2 (1-rho^2)^{-1} Sigma_eps,
// (Sigma_eps)_ij = rho^{|i-j|}.
inline MatrixXd ar1_error_cov(Eigen::Index n, double rho, double sigma_eps_sq) {
  if (!(std::abs(rho) < 1)) throw InvalidArgument("ar1_error_cov: |rho| must be < 1");
  if (n < 1) throw InvalidArgument("ar1_error_cov: n must be >= 1");
  const double scale = sigma_eps_sq / (1.0 - rho * rho);
  MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, i) = scale;
    double r = scale;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      r *= rho;
      cov(i, j) = cov(j, i) = r;
    }
  }
  return cov;
}

// (1-rho^2) Sigma_eps^{-1}: tridiagonal with diagonal (1, 1+rho^2, ..., 1)
// and off-diagonal -rho.
inline MatrixXd ar1_precision_tridiag(Eigen::Index n, double rho) {
  if (!(std::abs(rho) < 1))
    throw InvalidArgument("ar1_precision_tridiag: |rho| must be < 1");
  if (n < 1) throw InvalidArgument("ar1_precision_tridiag: n must be >= 1");
  MatrixXd t = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) t(i, i) = 1.0 + rho * rho;
  t(0, 0) = t(n - 1, n - 1) = 1.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) t(i, i + 1) = t(i + 1, i) = -rho;
  return t;
}

/*
 * Closed-form approximations to the eigenvalues of the tridiagonal
 * (1-rho^2) Sigma_eps^{-1}, with per-eigenvalue error bounds xi_k:
 *   lambda_k ~ 1 - 2 rho cos(k pi/(n+1)) + rho^2 - (4/(n+1)) rho^2 sin^2(k pi/(n+1))
 *   xi_k     = (2 rho^2/sqrt(n+1)) sin(k pi/(n+1))
 * Values come out increasing in k for rho > 0 and decreasing for rho < 0.
 */
struct Ar1EigApprox {
  VectorXd values;
  VectorXd error_bounds;
};

inline Ar1EigApprox ar1_precision_eigs_approx(Eigen::Index n, double rho) {
  if (!(std::abs(rho) < 1))
    throw InvalidArgument("ar1_precision_eigs_approx: |rho| must be < 1");
  if (n < 1) throw InvalidArgument("ar1_precision_eigs_approx: n must be >= 1");
  Ar1EigApprox out;
  out.values.resize(n);
  out.error_bounds.resize(n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    const double a = static_cast<double>(k) * M_PI / static_cast<double>(n + 1);
    const double s = std::sin(a);
    out.values(k - 1) =
        1.0 - 2.0 * rho * std::cos(a) + rho * rho - (4.0 / (n + 1)) * rho * rho * s * s;
    out.error_bounds(k - 1) = 2.0 * rho * rho / std::sqrt(static_cast<double>(n + 1)) * s;
  }
  return out;
}

// Zellner prior on the AR(1)-transformed design: mean Z_s beta_{0,s},
// covariance sigma_beta^2 g P(Z_s), correlated errors from ar1_error_cov.
inline ModelMoments build_ar1_zellner(const Dataset& data, const SubsetMask& s,
                                      const AR1Spec& spec) {
  spec.validate(static_cast<int>(data.p()));
  const auto n = data.n();
  ModelMoments m;
  m.noise_cov = ar1_error_cov(n, spec.rho, spec.sigma_eps_sq);
  if (s.empty()) {
    m.mu = VectorXd::Zero(n);
    m.sigma = MatrixXd::Zero(n, n);
    return m;
  }
  MatrixXd z = build_ar1_design(data, s, spec.rho);
  MatrixXd q = detail::orthonormal_basis(z, "build_ar1_zellner(" + s.label() + ")");
  VectorXd b0(s.size());
  for (int j = 0; j < s.size(); ++j) b0(j) = spec.beta0(s.indices()[j] - 1);
  m.mu = z * b0;
  m.sigma = (spec.sigma_beta_sq * spec.g) * (q * q.transpose());
  return m;
}

}  // namespace gpbf

#endif  // GPBF_MODELS_HPP
