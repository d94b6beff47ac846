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

#ifndef GPBF_QUADRATURE_HPP
#define GPBF_QUADRATURE_HPP

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "gpbf/errors.hpp"
#include "gpbf/linalg.hpp"
#include "gpbf/marginal.hpp"

namespace gpbf {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
// Legendre recurrence.  Deterministic; accurate to ~1e-15 for m <= 512.
inline void gauss_legendre(int m, std::vector<double>& nodes,
                           std::vector<double>& weights) {
  if (m < 1) throw InvalidArgument("gauss_legendre: need m >= 1 nodes");
  nodes.assign(m, 0.0);
  weights.assign(m, 0.0);
  const int half = (m + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[m - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[m - 1 - i] = w;
  }
  if (m % 2 == 1) nodes[half - 1] = 0.0;
}

/*
 * Quadrature grid over a compact parameter interval: nodes theta_i,
 * positive weights w_i, and prior density values pi(theta_i), with
 * sum_i w_i pi(theta_i) = 1 to within 1e-6.
 */
struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> prior_density;

  void validate() const {
    if (nodes.empty()) throw EmptyGrid("QuadratureGrid has no nodes");
    if (nodes.size() != weights.size() || nodes.size() != prior_density.size())
      throw DimensionMismatch("QuadratureGrid: mismatched node/weight/density sizes");
    double mass = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!(weights[i] > 0))
        throw InvalidArgument("QuadratureGrid: weights must be positive");
      if (!(prior_density[i] >= 0))
        throw InvalidArgument("QuadratureGrid: prior density must be nonnegative");
      mass += weights[i] * prior_density[i];
    }
    if (std::abs(mass - 1.0) > 1e-6)
      throw InvalidArgument("QuadratureGrid: prior mass " + std::to_string(mass) +
                            " differs from 1 beyond 1e-6");
  }

  // Degenerate one-node grid (point-mass prior at theta0).
  static QuadratureGrid point_mass(double theta0) {
    return QuadratureGrid{{theta0}, {1.0}, {1.0}};
  }

  static QuadratureGrid gauss_legendre_uniform(double lo, double hi, int m) {
    if (!(hi > lo)) throw InvalidArgument("QuadratureGrid: need hi > lo");
    std::vector<double> x, w;
    gauss_legendre(m, x, w);
    QuadratureGrid g;
    g.nodes.resize(m);
    g.weights.resize(m);
    g.prior_density.assign(m, 1.0 / (hi - lo));
    for (int i = 0; i < m; ++i) {
      g.nodes[i] = 0.5 * (hi - lo) * x[i] + 0.5 * (hi + lo);
      g.weights[i] = 0.5 * (hi - lo) * w[i];
    }
    return g;
  }

  static QuadratureGrid with_prior(double lo, double hi, int m,
                                   const std::function<double(double)>& pi) {
    QuadratureGrid g = gauss_legendre_uniform(lo, hi, m);
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
      g.prior_density[i] = pi(g.nodes[i]);
    return g;
  }
};

// Tensor-product grids are supported up to dimension 2; the worked example
// integrates over a single AR coefficient.
inline std::vector<QuadratureGrid> make_theta_grids(
    const std::vector<std::pair<double, double>>& intervals, int m) {
  if (intervals.empty()) throw EmptyGrid("make_theta_grids: no intervals");
  if (intervals.size() > 2)
    throw UnsupportedDimension("make_theta_grids: IBF grids support dim <= 2, got " +
                               std::to_string(intervals.size()));
  std::vector<QuadratureGrid> out;
  for (const auto& [lo, hi] : intervals)
    out.push_back(QuadratureGrid::gauss_legendre_uniform(lo, hi, m));
  return out;
}

// log IBF = log sum_i w_i pi(theta_i) exp(log BF(theta_i)) from precomputed
// per-node log Bayes factors.
inline double integrated_log_bf_from_values(const std::vector<double>& log_bf_values,
                                            const QuadratureGrid& grid) {
  grid.validate();
  if (log_bf_values.size() != grid.nodes.size())
    throw DimensionMismatch("integrated_log_bf: values vs grid size");
  std::vector<double> wpi(grid.nodes.size());
  for (std::size_t i = 0; i < wpi.size(); ++i)
    wpi[i] = grid.weights[i] * grid.prior_density[i];
  return log_sum_exp(log_bf_values, wpi);
}

// The (candidate, truth) marginal pair at one parameter value.
using ModelBuilder =
    std::function<std::pair<GaussianMarginal, GaussianMarginal>(double)>;

inline double integrated_log_bf(const VectorXd& y, const ModelBuilder& builder,
                                const QuadratureGrid& grid) {
  grid.validate();
  std::vector<double> vals(grid.nodes.size());
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    auto [cand, truth] = builder(grid.nodes[i]);
    vals[i] = log_bf_known_var(y, cand, truth);
  }
  return integrated_log_bf_from_values(vals, grid);
}

// Grid-refinement policy: double the node count until two successive
// log-IBF values agree within tol (node cap enforced).  The returned value
// is the finest grid's.
inline double integrated_log_bf_refined(const VectorXd& y, const ModelBuilder& builder,
                                        double lo, double hi, int start_nodes,
                                        double tol, int max_nodes) {
  if (start_nodes < 1 || max_nodes < start_nodes)
    throw InvalidArgument("integrated_log_bf_refined: bad node counts");
  int m = start_nodes;
  double prev =
      integrated_log_bf(y, builder, QuadratureGrid::gauss_legendre_uniform(lo, hi, m));
  while (2 * m <= max_nodes) {
    m *= 2;
    const double cur = integrated_log_bf(
        y, builder, QuadratureGrid::gauss_legendre_uniform(lo, hi, m));
    if (std::abs(cur - prev) <= tol) return cur;
    prev = cur;
  }
  return prev;
}

// 2-D tensor-product variant.
using ModelBuilder2 =
    std::function<std::pair<GaussianMarginal, GaussianMarginal>(double, double)>;

inline double integrated_log_bf_2d(const VectorXd& y, const ModelBuilder2& builder,
                                   const QuadratureGrid& ga, const QuadratureGrid& gb) {
  ga.validate();
  gb.validate();
  std::vector<double> vals, wpi;
  vals.reserve(ga.nodes.size() * gb.nodes.size());
  wpi.reserve(vals.capacity());
  for (std::size_t i = 0; i < ga.nodes.size(); ++i)
    for (std::size_t j = 0; j < gb.nodes.size(); ++j) {
      auto [cand, truth] = builder(ga.nodes[i], gb.nodes[j]);
      vals.push_back(log_bf_known_var(y, cand, truth));
      wpi.push_back(ga.weights[i] * ga.prior_density[i] * gb.weights[j] *
                    gb.prior_density[j]);
    }
  return log_sum_exp(vals, wpi);
}

}  // namespace gpbf

#endif  // GPBF_QUADRATURE_HPP
