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

#ifndef GPBF_MARGINAL_HPP
#define GPBF_MARGINAL_HPP

#include <cmath>
#include <utility>

#include "gpbf/linalg.hpp"
#include "gpbf/models.hpp"

namespace gpbf {

// y ~ N(mu, cov), cov = noise_cov + Sigma_s, factorization cached.
struct GaussianMarginal {
  VectorXd mu;
  SpdMatrix cov;

  GaussianMarginal(VectorXd mu_in, SpdMatrix cov_in)
      : mu(std::move(mu_in)), cov(std::move(cov_in)) {
    if (mu.size() != cov.dim())
      throw DimensionMismatch("GaussianMarginal: mu length vs cov dim");
  }

  static GaussianMarginal from_moments(const ModelMoments& m) {
    return GaussianMarginal(m.mu, SpdMatrix(m.marginal_cov()));
  }
};

inline double log_marginal_gaussian(const VectorXd& y, const GaussianMarginal& m) {
  if (y.size() != m.mu.size())
    throw DimensionMismatch("log_marginal_gaussian: y length vs marginal dim");
  const double n = static_cast<double>(y.size());
  return -0.5 * (n * std::log(2.0 * M_PI) + m.cov.log_det() +
                 m.cov.quad_form(y - m.mu));
}

inline double log_bf_known_var(const VectorXd& y, const GaussianMarginal& cand,
                               const GaussianMarginal& truth) {
  return log_marginal_gaussian(y, cand) - log_marginal_gaussian(y, truth);
}

/*
 * Marginal with the error variance integrated out under the conjugate
 * inverse-gamma(alpha, beta) prior, the process variance tied to the error
 * variance: y | s2 ~ N(mu, s2 * scale) with scale = I + Sigma (or the
 * correlated-error analogue).  Marginalizing s2 gives the multivariate t
 *
 *   log m(y) = lgamma(alpha + n/2) - lgamma(alpha) + alpha log(beta)
 *            - (n/2) log(2 pi) - 1/2 log|scale| - (alpha + n/2) log(beta + q/2)
 *
 * with q = (y - mu)' scale^{-1} (y - mu).  The normalization constant is
 * tracked in full so the density integrates to one.
 */
struct StudentTMarginal {
  VectorXd mu;
  SpdMatrix scale;
  double alpha;
  double beta;

  StudentTMarginal(VectorXd mu_in, SpdMatrix scale_in, double a, double b)
      : mu(std::move(mu_in)), scale(std::move(scale_in)), alpha(a), beta(b) {
    if (mu.size() != scale.dim())
      throw DimensionMismatch("StudentTMarginal: mu length vs scale dim");
    if (!(alpha > 2)) throw InvalidArgument("StudentTMarginal: requires alpha > 2");
    if (!(beta > 0)) throw InvalidArgument("StudentTMarginal: requires beta > 0");
  }
};

inline double log_marginal_t(const VectorXd& y, const StudentTMarginal& m) {
  if (y.size() != m.mu.size())
    throw DimensionMismatch("log_marginal_t: y length vs marginal dim");
  const double n = static_cast<double>(y.size());
  const double q = m.scale.quad_form(y - m.mu);
  return std::lgamma(m.alpha + 0.5 * n) - std::lgamma(m.alpha) +
         m.alpha * std::log(m.beta) - 0.5 * n * std::log(2.0 * M_PI) -
         0.5 * m.scale.log_det() - (m.alpha + 0.5 * n) * std::log(m.beta + 0.5 * q);
}

// Closed-form log Bayes factor under the inverse-gamma prior.  Equals the
// difference of log_marginal_t values; the (alpha, beta) constants cancel.
inline double log_bf_unknown_var(const VectorXd& y, const StudentTMarginal& cand,
                                 const StudentTMarginal& truth) {
  if (cand.alpha != truth.alpha || cand.beta != truth.beta)
    throw InvalidArgument("log_bf_unknown_var: models must share alpha and beta");
  const double n = static_cast<double>(y.size());
  const double q_c = cand.scale.quad_form(y - cand.mu);
  const double q_t = truth.scale.quad_form(y - truth.mu);
  return 0.5 * (truth.scale.log_det() - cand.scale.log_det()) -
         (cand.alpha + 0.5 * n) *
             (std::log(q_c + 2.0 * cand.beta) - std::log(q_t + 2.0 * truth.beta));
}

/*
 * Symmetric whitened form C = B' (cand_cov)^{-1} B with B the Cholesky
 * factor of truth_cov.  C shares the spectrum of
 * A = truth_cov * cand_cov^{-1}, whose eigenvalues drive the Bayes factor
 * asymptotics.
 */
struct WhitenedForm {
  MatrixXd C;
};

inline WhitenedForm whitened_form(const SpdMatrix& cand_cov, const SpdMatrix& truth_cov) {
  if (cand_cov.dim() != truth_cov.dim())
    throw DimensionMismatch("whitened_form: dimensions differ");
  const MatrixXd& b = truth_cov.chol_lower();
  MatrixXd s = cand_cov.solve(b);
  MatrixXd c = b.transpose() * s;
  return WhitenedForm{0.5 * (c + c.transpose())};
}

namespace detail {

struct TracePowers {
  double t1, t2, t3, t4;
};

inline TracePowers trace_powers(const MatrixXd& c) {
  require_square(c, "trace_powers");
  const MatrixXd c2 = c * c;
  TracePowers t;
  t.t1 = c.trace();
  t.t2 = c.cwiseProduct(c.transpose()).sum();
  t.t3 = c2.cwiseProduct(c.transpose()).sum();
  t.t4 = c2.cwiseProduct(c2.transpose()).sum();
  return t;
}

}  // namespace detail

/*
 * E (z' C z)^k for z ~ N(0, I), k = 1..4, in terms of tr(C^r):
 *   k=1: tr C
 *   k=2: (tr C)^2 + 2 tr C^2
 *   k=3: (tr C)^3 + 6 tr C tr C^2 + 8 tr C^3
 *   k=4: (tr C)^4 + 32 tr C tr C^3 + 12 (tr C^2)^2
 *        + 12 (tr C)^2 tr C^2 + 48 tr C^4
 */
inline double quad_form_moments(const WhitenedForm& c, int order) {
  const auto t = detail::trace_powers(c.C);
  switch (order) {
    case 1:
      return t.t1;
    case 2:
      return t.t1 * t.t1 + 2.0 * t.t2;
    case 3:
      return t.t1 * t.t1 * t.t1 + 6.0 * t.t1 * t.t2 + 8.0 * t.t3;
    case 4:
      return t.t1 * t.t1 * t.t1 * t.t1 + 32.0 * t.t1 * t.t3 + 12.0 * t.t2 * t.t2 +
             12.0 * t.t1 * t.t1 * t.t2 + 48.0 * t.t4;
    default:
      throw InvalidOrder("quad_form_moments supports orders 1..4, got " +
                         std::to_string(order));
  }
}

// E (z' C z - tr C)^4 = 12 (tr C^2)^2 + 48 tr C^4
inline double central_fourth_moment(const WhitenedForm& c) {
  const auto t = detail::trace_powers(c.C);
  return 12.0 * t.t2 * t.t2 + 48.0 * t.t4;
}

}  // namespace gpbf

#endif  // GPBF_MARGINAL_HPP
