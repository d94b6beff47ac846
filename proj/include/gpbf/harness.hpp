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

#ifndef GPBF_HARNESS_HPP
#define GPBF_HARNESS_HPP

#include <array>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "gpbf/audit.hpp"
#include "gpbf/experiment.hpp"
#include "gpbf/quadrature.hpp"

namespace gpbf {

/*
 * Simulation harness.  One replicate = one long data path generated from
 * the true model at the generation length; every n in the grid evaluates
 * the prefix of that path, so trajectories are paths rather than
 * independent redraws.  Replicates use pre-split Philox streams keyed by
 * (seed, replicate), which keeps every output byte-identical no matter how
 * many worker threads run.
 */

// y = mu + L z with L the Cholesky factor of the full marginal covariance.
inline VectorXd sample_true(const VectorXd& mu, const SpdMatrix& cov, Rng& rng) {
  if (mu.size() != cov.dim()) throw DimensionMismatch("sample_true: mu vs cov");
  VectorXd z(mu.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mu + cov.chol_lower().triangularView<Eigen::Lower>() * z;
}

inline VectorXd sample_true(const ModelMoments& truth, Rng& rng) {
  SpdMatrix cov(truth.marginal_cov());
  return sample_true(truth.mu, cov, rng);
}

// The generated path for one replicate: covariates plus the response drawn
// from the true marginal, both at the generation length.
struct ReplicateData {
  Dataset data;  // y filled with the generated response
  ModelMoments truth;
  SpdMatrix truth_cov;
};

inline ReplicateData generate_replicate(const ExperimentConfig& cfg, int rep) {
  Rng rng(cfg.seed, streams::kReplicateBase + static_cast<std::uint64_t>(rep));
  const int n_gen = cfg.generation_length();
  MatrixXd x = generate_covariates(cfg, rng, n_gen);
  Dataset data(VectorXd::Zero(n_gen), std::move(x), cfg.covariate_bound);
  ModelMoments truth = build_moments(cfg, data, cfg.s0());
  SpdMatrix truth_cov(truth.marginal_cov());
  VectorXd z(n_gen);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  data.y = truth.mu + truth_cov.chol_lower().triangularView<Eigen::Lower>() * z;
  return ReplicateData{std::move(data), std::move(truth), std::move(truth_cov)};
}

struct BFTrajectory {
  SubsetMask subset;
  std::vector<int> n_grid;
  MatrixXd log_bf;  // n_grid.size() rows, replicate columns
  double delta_hat = std::numeric_limits<double>::quiet_NaN();
  double ols_delta = std::numeric_limits<double>::quiet_NaN();
  double select_fraction = std::numeric_limits<double>::quiet_NaN();

  double mean_log_bf_at(std::size_t grid_index) const {
    return log_bf.row(static_cast<Eigen::Index>(grid_index)).mean();
  }
};

struct DeltaEstimate {
  double tail = 0.0;  // -(mean log BF / n) at the largest n
  double ols = 0.0;   // -slope of mean log BF against n
};

inline DeltaEstimate estimate_delta(const BFTrajectory& traj) {
  if (traj.n_grid.size() < 2)
    throw InsufficientGrid("estimate_delta needs at least 2 grid points");
  DeltaEstimate est;
  const std::size_t last = traj.n_grid.size() - 1;
  est.tail = -traj.mean_log_bf_at(last) / traj.n_grid[last];
  double nbar = 0.0, mbar = 0.0;
  std::vector<double> means(traj.n_grid.size());
  for (std::size_t i = 0; i < traj.n_grid.size(); ++i) {
    means[i] = traj.mean_log_bf_at(i);
    nbar += traj.n_grid[i];
    mbar += means[i];
  }
  nbar /= traj.n_grid.size();
  mbar /= traj.n_grid.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < traj.n_grid.size(); ++i) {
    num += (traj.n_grid[i] - nbar) * (means[i] - mbar);
    den += (traj.n_grid[i] - nbar) * (traj.n_grid[i] - nbar);
  }
  est.ols = -num / den;
  return est;
}

namespace harnessdetail {

// Candidate-ordering comparator for selection ties: larger final log BF
// wins; exact ties prefer fewer covariates, then lexicographic order.
inline bool better_candidate(double score_a, const SubsetMask& a, double score_b,
                             const SubsetMask& b) {
  if (score_a != score_b) return score_a > score_b;
  if (a.size() != b.size()) return a.size() < b.size();
  return a.indices() < b.indices();
}

inline void parallel_for(int items, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw > 0 ? static_cast<int>(hw) : 1;
  }
  threads = std::min(threads, items);
  if (threads <= 1) {
    for (int i = 0; i < items; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= items) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Per-subset low-rank pieces shared by the linear and AR(1) families.
struct LowRankPieces {
  VectorXd mu;
  MatrixXd q;
  double c = 0.0;
};

inline LowRankPieces lowrank_pieces(const MatrixXd& design_full, const SubsetMask& s,
                                    const VectorXd& beta0_full, double c,
                                    Eigen::Index n) {
  LowRankPieces out;
  out.c = c;
  if (s.empty()) {
    out.mu = VectorXd::Zero(n);
    out.q = MatrixXd(n, 0);
    return out;
  }
  MatrixXd design(n, s.size());
  VectorXd b0(s.size());
  for (int j = 0; j < s.size(); ++j) {
    design.col(j) = design_full.col(s.indices()[j] - 1).head(n);
    b0(j) = beta0_full(s.indices()[j] - 1);
  }
  out.mu = design * b0;
  out.q = detail::orthonormal_basis(design, "lowrank(" + s.label() + ")");
  return out;
}

// AR(1)-transformed design on the full covariate matrix; row t depends only
// on rows 1..t, so prefixes are exact.
inline MatrixXd ar1_design_full(const MatrixXd& x, double rho) {
  MatrixXd z(x.rows(), x.cols());
  Eigen::RowVectorXd prev = Eigen::RowVectorXd::Zero(x.cols());
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    prev = rho * prev + x.row(t);
    z.row(t) = prev;
  }
  return z;
}

}  // namespace harnessdetail

struct RunResult {
  ExperimentConfig cfg;
  std::vector<SubsetMask> candidates;
  std::vector<BFTrajectory> trajectories;
  std::vector<int> per_rep_argmax;  // candidate index winning each replicate
  double s0_selection_fraction = std::numeric_limits<double>::quiet_NaN();
  SubsetMask selected;
};

// Aggregate selection: the candidate with the largest replicate-mean log BF
// at the largest n (equivalently the smallest delta_hat).
inline SubsetMask select_subset(const std::vector<BFTrajectory>& trajs) {
  if (trajs.empty()) throw EmptyInput("select_subset: no trajectories");
  const std::size_t last = trajs.front().n_grid.size() - 1;
  std::size_t best = 0;
  double best_score = trajs[0].mean_log_bf_at(last);
  for (std::size_t i = 1; i < trajs.size(); ++i) {
    const double score = trajs[i].mean_log_bf_at(last);
    if (harnessdetail::better_candidate(score, trajs[i].subset, best_score,
                                        trajs[best].subset)) {
      best = i;
      best_score = score;
    }
  }
  return trajs[best].subset;
}

namespace harnessdetail {

/*
 * Per-replicate evaluation engine.  Computes, for every candidate subset
 * and every n in the grid, either the exact log Bayes factor (known
 * variance), its Student-t analogue (inverse-gamma variance), or the
 * integrated version over the rho prior (AR(1) with quadrature).  Values
 * land in out(grid_index, candidate_index).
 */
inline void evaluate_replicate(const ExperimentConfig& cfg,
                               const std::vector<SubsetMask>& cands, int rep,
                               Eigen::Ref<MatrixXd> out) {
  ReplicateData rd = generate_replicate(cfg, rep);
  const int n_gen = cfg.generation_length();
  const Dataset& data = rd.data;
  const MatrixXd& x = data.X;
  const SubsetMask s0 = cfg.s0();
  const VectorXd& y = data.y;

  const auto n_grid = cfg.n_grid;
  const bool ig = cfg.variance == VarianceKind::InverseGamma;
  const std::size_t gs = n_grid.size();

  auto t_log_marginal = [&](const LowRankGaussian& psi, const VectorXd& yy) {
    return log_marginal_t_lowrank(yy, psi, cfg.alpha, cfg.beta);
  };

  if (cfg.family == Family::SE) {
    // Dense path.  In inverse-gamma mode the scale is I + ratio * K with the
    // process variance tied to the error variance by default.
    const double ratio = cfg.se_tie_process_variance ? 1.0 : cfg.se.sigma_f_sq;
    auto full_cov = [&](const SubsetMask& s, VectorXd& mu_full) {
      ModelMoments m = build_se_gp(data, s, cfg.se);
      mu_full = m.mu;
      if (!ig) return MatrixXd(m.marginal_cov());
      MatrixXd psi = MatrixXd::Identity(n_gen, n_gen);
      if (!s.empty()) psi += ratio * se_correlation(data, s, cfg.se);
      return psi;
    };
    VectorXd mu_t;
    MatrixXd cov_t = full_cov(s0, mu_t);
    std::vector<double> truth_vals(gs);
    for (std::size_t gi = 0; gi < gs; ++gi) {
      PrefixGaussian pg(mu_t, cov_t, n_grid[gi]);
      if (!ig) {
        truth_vals[gi] = pg.log_pdf(y);
      } else {
        auto [q, ld] = pg.quad_and_log_det(y);
        const double n = static_cast<double>(n_grid[gi]);
        truth_vals[gi] = std::lgamma(cfg.alpha + 0.5 * n) - std::lgamma(cfg.alpha) +
                         cfg.alpha * std::log(cfg.beta) - 0.5 * n * std::log(2.0 * M_PI) -
                         0.5 * ld - (cfg.alpha + 0.5 * n) * std::log(cfg.beta + 0.5 * q);
      }
    }
    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
      VectorXd mu_c;
      MatrixXd cov_c = full_cov(cands[ci], mu_c);
      for (std::size_t gi = 0; gi < gs; ++gi) {
        PrefixGaussian pg(mu_c, cov_c, n_grid[gi]);
        double val;
        if (!ig) {
          val = pg.log_pdf(y);
        } else {
          auto [q, ld] = pg.quad_and_log_det(y);
          const double n = static_cast<double>(n_grid[gi]);
          val = std::lgamma(cfg.alpha + 0.5 * n) - std::lgamma(cfg.alpha) +
                cfg.alpha * std::log(cfg.beta) - 0.5 * n * std::log(2.0 * M_PI) -
                0.5 * ld - (cfg.alpha + 0.5 * n) * std::log(cfg.beta + 0.5 * q);
        }
        out(static_cast<Eigen::Index>(gi), static_cast<Eigen::Index>(ci)) =
            val - truth_vals[gi];
      }
    }
    return;
  }

  // Low-rank families.  c is the projection-prior scale; in inverse-gamma
  // mode variances are measured relative to the error variance.
  const bool is_ar1 = cfg.family == Family::Ar1;
  const VectorXd& beta0 = is_ar1 ? cfg.ar1.beta0 : cfg.linear.beta0;
  const double c_known = is_ar1 ? cfg.ar1.sigma_beta_sq * cfg.ar1.g
                                : cfg.linear.sigma_beta_sq * cfg.linear.g;
  const double s2e = is_ar1 ? cfg.ar1.sigma_eps_sq : cfg.linear.sigma_eps_sq;
  const double c_used = c_known;  // sigma_beta_sq acts as a ratio when ig

  auto noise_for = [&](double rho) {
    if (!is_ar1) return NoiseStructure::iid(ig ? 1.0 : s2e);
    return NoiseStructure::ar1(ig ? 1.0 : s2e, rho);
  };

  auto eval_at = [&](const MatrixXd& design_full, const SubsetMask& s, double rho,
                     Eigen::Index n) {
    auto pieces = lowrank_pieces(design_full, s, beta0, c_used, n);
    LowRankGaussian lr(std::move(pieces.mu), noise_for(rho), std::move(pieces.q),
                       pieces.c);
    return ig ? t_log_marginal(lr, y.head(n)) : lr.log_pdf(y.head(n));
  };

  const double rho0 = is_ar1 ? cfg.ar1.rho : 0.0;
  const MatrixXd design_truth = is_ar1 ? ar1_design_full(x, rho0) : x;

  std::vector<double> truth_vals(gs);
  for (std::size_t gi = 0; gi < gs; ++gi)
    truth_vals[gi] = eval_at(design_truth, s0, rho0, n_grid[gi]);

  if (!cfg.quadrature.enabled) {
    for (std::size_t ci = 0; ci < cands.size(); ++ci)
      for (std::size_t gi = 0; gi < gs; ++gi)
        out(static_cast<Eigen::Index>(gi), static_cast<Eigen::Index>(ci)) =
            eval_at(design_truth, cands[ci], rho0, n_grid[gi]) - truth_vals[gi];
    return;
  }

  // Integrated Bayes factors over the rho prior: accumulate per-node log
  // marginals for every (candidate, n), then log-sum-exp against the
  // quadrature weights and subtract the true-model log marginal.
  const double lim = 1.0 - cfg.ar1.gamma;
  QuadratureGrid grid =
      QuadratureGrid::gauss_legendre_uniform(-lim, lim, cfg.quadrature.nodes);
  const std::size_t m = grid.nodes.size();
  std::vector<MatrixXd> node_vals(m);
  for (std::size_t ni = 0; ni < m; ++ni) {
    const MatrixXd design = ar1_design_full(x, grid.nodes[ni]);
    node_vals[ni].resize(static_cast<Eigen::Index>(gs),
                         static_cast<Eigen::Index>(cands.size()));
    for (std::size_t ci = 0; ci < cands.size(); ++ci)
      for (std::size_t gi = 0; gi < gs; ++gi)
        node_vals[ni](static_cast<Eigen::Index>(gi), static_cast<Eigen::Index>(ci)) =
            eval_at(design, cands[ci], grid.nodes[ni], n_grid[gi]);
  }
  std::vector<double> vals(m);
  for (std::size_t ci = 0; ci < cands.size(); ++ci)
    for (std::size_t gi = 0; gi < gs; ++gi) {
      for (std::size_t ni = 0; ni < m; ++ni)
        vals[ni] = node_vals[ni](static_cast<Eigen::Index>(gi),
                                 static_cast<Eigen::Index>(ci)) -
                   truth_vals[gi];
      out(static_cast<Eigen::Index>(gi), static_cast<Eigen::Index>(ci)) =
          integrated_log_bf_from_values(vals, grid);
    }
}

}  // namespace harnessdetail

inline RunResult run_trajectories(const ExperimentConfig& cfg, int threads = 0) {
  cfg.validate();
  RunResult result;
  result.cfg = cfg;
  result.candidates = cfg.candidates();
  const std::size_t gs = cfg.n_grid.size();
  const std::size_t cs = result.candidates.size();

  std::vector<MatrixXd> per_rep(cfg.replicates);
  harnessdetail::parallel_for(cfg.replicates, threads, [&](int rep) {
    per_rep[rep].resize(static_cast<Eigen::Index>(gs), static_cast<Eigen::Index>(cs));
    harnessdetail::evaluate_replicate(cfg, result.candidates, rep, per_rep[rep]);
  });

  result.trajectories.resize(cs);
  for (std::size_t ci = 0; ci < cs; ++ci) {
    BFTrajectory& t = result.trajectories[ci];
    t.subset = result.candidates[ci];
    t.n_grid = cfg.n_grid;
    t.log_bf.resize(static_cast<Eigen::Index>(gs), cfg.replicates);
    for (int rep = 0; rep < cfg.replicates; ++rep)
      t.log_bf.col(rep) = per_rep[rep].col(static_cast<Eigen::Index>(ci));
    const Eigen::Index last = static_cast<Eigen::Index>(gs) - 1;
    t.select_fraction =
        (t.log_bf.row(last).array() < 0.0).cast<double>().mean();
    if (gs >= 2) {
      auto est = estimate_delta(t);
      t.delta_hat = est.tail;
      t.ols_delta = est.ols;
    } else {
      t.delta_hat = -t.mean_log_bf_at(gs - 1) / cfg.n_grid.back();
    }
  }

  // Per-replicate winners at the largest n.
  result.per_rep_argmax.resize(cfg.replicates);
  const Eigen::Index last = static_cast<Eigen::Index>(gs) - 1;
  for (int rep = 0; rep < cfg.replicates; ++rep) {
    std::size_t best = 0;
    double best_score = result.trajectories[0].log_bf(last, rep);
    for (std::size_t ci = 1; ci < cs; ++ci) {
      const double score = result.trajectories[ci].log_bf(last, rep);
      if (harnessdetail::better_candidate(score, result.candidates[ci], best_score,
                                          result.candidates[best]))
        best = ci, best_score = score;
    }
    result.per_rep_argmax[rep] = static_cast<int>(best);
  }
  const SubsetMask s0 = cfg.s0();
  int s0_index = -1;
  for (std::size_t ci = 0; ci < cs; ++ci)
    if (result.candidates[ci] == s0) s0_index = static_cast<int>(ci);
  if (s0_index >= 0) {
    int wins = 0;
    for (int w : result.per_rep_argmax)
      if (w == s0_index) ++wins;
    result.s0_selection_fraction = static_cast<double>(wins) / cfg.replicates;
  }
  result.selected = select_subset(result.trajectories);
  return result;
}

// ---------------------------------------------------------------------------
// Misspecified comparison: the true subset is excluded; candidates are
// ranked by pairwise integrated Bayes factors.  Pairwise values come from
// per-subset integrated log marginals, so the chain identity
// M[s1][s2] = M[s1][ref] - M[s2][ref] holds to floating-point accuracy.
// ---------------------------------------------------------------------------
struct MisspecResult {
  ExperimentConfig cfg;
  std::vector<SubsetMask> candidates;
  std::vector<BFTrajectory> trajectories;  // against the excluded truth
  MatrixXd mean_matrix;                    // mean over replicates of per-pair log IBF / n
  std::vector<MatrixXd> per_rep_matrix;
  std::vector<int> ranking;  // candidate indices, best first (row-sum order)
};

inline MisspecResult run_misspec(const ExperimentConfig& cfg, int threads = 0) {
  cfg.validate();
  if (cfg.candidates_all)
    throw ValidationError("candidates",
                          "misspec requires an explicit candidate list excluding s0");
  const SubsetMask s0 = cfg.s0();
  for (const auto& c : cfg.candidates())
    if (c == s0)
      throw ValidationError("candidates", "misspec candidates must exclude s0 = " +
                                              s0.label());

  RunResult base = run_trajectories(cfg, threads);

  MisspecResult mr;
  mr.cfg = cfg;
  mr.candidates = base.candidates;
  mr.trajectories = base.trajectories;
  const std::size_t cs = mr.candidates.size();
  const Eigen::Index last = static_cast<Eigen::Index>(cfg.n_grid.size()) - 1;
  const double n_max = cfg.n_grid.back();

  mr.per_rep_matrix.assign(cfg.replicates, MatrixXd::Zero(cs, cs));
  for (int rep = 0; rep < cfg.replicates; ++rep)
    for (std::size_t i = 0; i < cs; ++i)
      for (std::size_t j = 0; j < cs; ++j)
        mr.per_rep_matrix[rep](i, j) = (mr.trajectories[i].log_bf(last, rep) -
                                        mr.trajectories[j].log_bf(last, rep)) /
                                       n_max;
  mr.mean_matrix = MatrixXd::Zero(cs, cs);
  for (const auto& m : mr.per_rep_matrix) mr.mean_matrix += m;
  mr.mean_matrix /= cfg.replicates;

  mr.ranking.resize(cs);
  for (std::size_t i = 0; i < cs; ++i) mr.ranking[i] = static_cast<int>(i);
  std::sort(mr.ranking.begin(), mr.ranking.end(), [&](int a, int b) {
    return harnessdetail::better_candidate(mr.mean_matrix.row(a).sum(),
                                           mr.candidates[a],
                                           mr.mean_matrix.row(b).sum(),
                                           mr.candidates[b]);
  });
  return mr;
}

// ---------------------------------------------------------------------------
// Monte Carlo verification of the quadratic-form moment identities.
// ---------------------------------------------------------------------------
struct McMomentCheck {
  std::array<double, 5> estimate{};  // orders 1..4 then the central fourth
  std::array<double, 5> closed{};
  std::array<double, 5> std_error{};
  std::array<double, 5> zscore{};
  double threshold = 4.0;

  bool all_within() const {
    for (double z : zscore)
      if (!(std::abs(z) <= threshold)) return false;
    return true;
  }
};

inline McMomentCheck mc_moment_check(const WhitenedForm& c, int draws, Rng& rng) {
  if (draws < 10000)
    throw InvalidArgument("mc_moment_check: need at least 10^4 draws");
  const Eigen::Index n = c.C.rows();
  McMomentCheck report;
  for (int k = 0; k < 4; ++k) report.closed[k] = quad_form_moments(c, k + 1);
  report.closed[4] = central_fourth_moment(c);
  const double tr = c.C.trace();

  std::array<double, 5> sum{}, sum_sq{};
  VectorXd z(n);
  for (int d = 0; d < draws; ++d) {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
    const double q = z.dot(c.C * z);
    double pw = 1.0;
    for (int k = 0; k < 4; ++k) {
      pw *= q;
      sum[k] += pw;
      sum_sq[k] += pw * pw;
    }
    const double dev = q - tr;
    const double c4 = dev * dev * dev * dev;
    sum[4] += c4;
    sum_sq[4] += c4 * c4;
  }
  for (int k = 0; k < 5; ++k) {
    report.estimate[k] = sum[k] / draws;
    const double var = sum_sq[k] / draws - report.estimate[k] * report.estimate[k];
    report.std_error[k] = std::sqrt(std::max(var, 0.0) / draws);
    report.zscore[k] = (report.estimate[k] - report.closed[k]) /
                       (report.std_error[k] > 0 ? report.std_error[k] : 1e-300);
  }
  return report;
}

// ---------------------------------------------------------------------------
// CSV output, 17 significant digits throughout.
// ---------------------------------------------------------------------------
namespace harnessdetail {
inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace harnessdetail

inline void write_trajectories_csv(const RunResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "subset,n,replicate,log_bf,log_bf_over_n\n";
  for (const auto& t : r.trajectories)
    for (std::size_t gi = 0; gi < t.n_grid.size(); ++gi)
      for (int rep = 0; rep < t.log_bf.cols(); ++rep) {
        const double v = t.log_bf(static_cast<Eigen::Index>(gi), rep);
        out << t.subset.label() << ',' << t.n_grid[gi] << ',' << rep << ','
            << harnessdetail::fmt17(v) << ','
            << harnessdetail::fmt17(v / t.n_grid[gi]) << '\n';
      }
  if (!out) throw IoError("failed writing " + path);
}

inline void write_summary_csv(const RunResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "subset,delta_hat,select_fraction\n";
  for (const auto& t : r.trajectories)
    out << t.subset.label() << ',' << harnessdetail::fmt17(t.delta_hat) << ','
        << harnessdetail::fmt17(t.select_fraction) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

inline void write_misspec_csv(const MisspecResult& mr, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "s1,s2,log_ibf_over_n\n";
  for (std::size_t i = 0; i < mr.candidates.size(); ++i)
    for (std::size_t j = 0; j < mr.candidates.size(); ++j)
      out << mr.candidates[i].label() << ',' << mr.candidates[j].label() << ','
          << harnessdetail::fmt17(mr.mean_matrix(i, j)) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

inline json selection_to_json(const RunResult& r) {
  json j;
  j["selected"] = r.selected.label();
  if (!std::isnan(r.s0_selection_fraction))
    j["s0_selection_fraction"] = r.s0_selection_fraction;
  json per;
  for (const auto& t : r.trajectories) {
    json e;
    e["delta_hat"] = t.delta_hat;
    e["select_fraction"] = t.select_fraction;
    if (!std::isnan(t.ols_delta)) e["ols_delta"] = t.ols_delta;
    per[t.subset.label()] = e;
  }
  j["subsets"] = per;
  return j;
}

}  // namespace gpbf

#endif  // GPBF_HARNESS_HPP
