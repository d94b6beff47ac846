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

#ifndef GPBF_LINALG_HPP
#define GPBF_LINALG_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "gpbf/errors.hpp"

namespace gpbf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace detail {

inline void require_square(const MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw DimensionMismatch(std::string(what) + ": matrix must be square and nonempty");
}

inline void require_symmetric(const MatrixXd& m, const char* what,
                              double rel_tol = 1e-12) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= rel_tol * scale))
    throw InvalidArgument(std::string(what) + ": matrix not symmetric (asymmetry " +
                          std::to_string(asym) + ")");
}

}  // namespace detail

/*
 * SpdMatrix: a dense symmetric positive-definite matrix with its lower
 * Cholesky factor cached at construction.  Factorization may apply a small
 * diagonal jitter (eps * mean(diag), eps escalating 1e-12 .. 1e-8) when the
 * input is numerically singular; the applied jitter is recorded.  Instances
 * are immutable after construction and safe to share across threads.
 */
class SpdMatrix {
 public:
  explicit SpdMatrix(MatrixXd m) {
    detail::require_square(m, "SpdMatrix");
    detail::require_symmetric(m, "SpdMatrix");
    // work with the symmetrized matrix so solves see an exactly symmetric input
    mat_ = 0.5 * (m + m.transpose());
    factorize();
  }

  Eigen::Index dim() const { return mat_.rows(); }
  const MatrixXd& matrix() const { return mat_; }
  const MatrixXd& chol_lower() const { return chol_; }
  double applied_jitter() const { return jitter_; }

  // log |M| = 2 sum_i log L_ii
  double log_det() const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < chol_.rows(); ++i) s += std::log(chol_(i, i));
    return 2.0 * s;
  }

  // v' M^{-1} v via one triangular solve; nonnegative by construction.
  double quad_form(const VectorXd& v) const {
    if (v.size() != dim())
      throw DimensionMismatch("quad_form: vector length " + std::to_string(v.size()) +
                              " vs matrix dim " + std::to_string(dim()));
    VectorXd w = chol_.triangularView<Eigen::Lower>().solve(v);
    return w.squaredNorm();
  }

  // M^{-1} v
  VectorXd solve(const VectorXd& v) const {
    VectorXd w = chol_.triangularView<Eigen::Lower>().solve(v);
    return chol_.transpose().triangularView<Eigen::Upper>().solve(w);
  }

  // M^{-1} B, column by column
  MatrixXd solve(const MatrixXd& b) const {
    MatrixXd w = chol_.triangularView<Eigen::Lower>().solve(b);
    return chol_.transpose().triangularView<Eigen::Upper>().solve(w);
  }

 private:
  void factorize() {
    const Eigen::Index n = mat_.rows();
    double mean_diag = mat_.diagonal().mean();
    if (!(mean_diag > 0)) mean_diag = 1.0;
    static constexpr double kJitterLadder[] = {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8};
    for (double eps : kJitterLadder) {
      MatrixXd trial = mat_;
      if (eps > 0) trial.diagonal().array() += eps * mean_diag;
      Eigen::LLT<MatrixXd> llt(trial);
      if (llt.info() == Eigen::Success) {
        chol_ = llt.matrixL();
        bool ok = true;
        for (Eigen::Index i = 0; i < n; ++i)
          if (!(chol_(i, i) > 0) || !std::isfinite(chol_(i, i))) ok = false;
        if (ok) {
          jitter_ = eps * mean_diag;
          if (eps > 0) mat_ = trial;
          return;
        }
      }
    }
    throw NotPositiveDefinite("Cholesky failed after maximum jitter 1e-8 * mean(diag)");
  }

  MatrixXd mat_;
  MatrixXd chol_;
  double jitter_ = 0.0;
};

// Lower-triangular Cholesky factor of M (jitter policy as in SpdMatrix).
inline MatrixXd cholesky(const MatrixXd& m) { return SpdMatrix(m).chol_lower(); }

inline double log_det_spd(const MatrixXd& m) { return SpdMatrix(m).log_det(); }

inline double quad_form(const SpdMatrix& m, const VectorXd& v) { return m.quad_form(v); }

/*
 * Gerschgorin enclosure for the spectrum of a symmetric matrix:
 *   lower = min_i (M_ii - sum_{j != i} |M_ij|)
 *   upper = max_i (M_ii + sum_{j != i} |M_ij|)
 */
inline std::pair<double, double> gerschgorin_bounds(const MatrixXd& m) {
  detail::require_square(m, "gerschgorin_bounds");
  detail::require_symmetric(m, "gerschgorin_bounds");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double r = m.row(i).cwiseAbs().sum() - std::abs(m(i, i));
    lo = std::min(lo, m(i, i) - r);
    hi = std::max(hi, m(i, i) + r);
  }
  return {lo, hi};
}

// Extreme eigenvalues of a symmetric matrix via full decomposition (desk
// scale; no iterative method needed for n up to a few thousand).
inline std::pair<double, double> extreme_eigs(const MatrixXd& m) {
  detail::require_square(m, "extreme_eigs");
  detail::require_symmetric(m, "extreme_eigs");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("extreme_eigs on dim " + std::to_string(m.rows()));
  const VectorXd& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

// All eigenvalues, ascending.
inline VectorXd symmetric_eigenvalues(const MatrixXd& m) {
  detail::require_square(m, "symmetric_eigenvalues");
  detail::require_symmetric(m, "symmetric_eigenvalues");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("symmetric_eigenvalues on dim " + std::to_string(m.rows()));
  return es.eigenvalues();
}

/*
 * log sum_i w_i exp(v_i) without overflow.  -inf values contribute zero
 * mass; at least one finite value and strictly positive weights required.
 */
inline double log_sum_exp(const std::vector<double>& values,
                          const std::vector<double>& weights) {
  if (values.empty()) throw EmptyInput("log_sum_exp: no values");
  if (values.size() != weights.size())
    throw DimensionMismatch("log_sum_exp: " + std::to_string(values.size()) +
                            " values vs " + std::to_string(weights.size()) + " weights");
  double vmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(weights[i] > 0))
      throw InvalidArgument("log_sum_exp: weights must be positive");
    vmax = std::max(vmax, values[i]);
  }
  if (!std::isfinite(vmax))
    throw EmptyInput("log_sum_exp: no finite value");
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    acc += weights[i] * std::exp(values[i] - vmax);
  return vmax + std::log(acc);
}

}  // namespace gpbf

#endif  // GPBF_LINALG_HPP
