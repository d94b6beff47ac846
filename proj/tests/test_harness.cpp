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

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "gpbf/harness.hpp"

using namespace gpbf;
using Catch::Approx;

namespace {

json linear_config() {
  return {{"family", "linear"},
          {"p", 3},
          {"s0", {1, 2}},
          {"seed", 71},
          {"replicates", 8},
          {"n_grid", {50, 100, 200}},
          {"spec", {{"beta0", {1.0, 0.8, 0.9}}}}};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("sample_true: degenerate noise pins y to the mean") {
  const Eigen::Index n = 6;
  ModelMoments m;
  m.mu = VectorXd::LinSpaced(n, -1.0, 1.0);
  m.sigma = MatrixXd::Zero(n, n);
  m.noise_cov = 1e-12 * MatrixXd::Identity(n, n);
  Rng rng(81, 0);
  VectorXd y = sample_true(m, rng);
  CHECK((y - m.mu).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("sample_true: Monte Carlo mean and covariance") {
  const Eigen::Index n = 5;
  ModelMoments m;
  m.mu = VectorXd::LinSpaced(n, 0.0, 2.0);
  MatrixXd g(n, n);
  Rng init(82, 0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = init.normal();
  m.sigma = g * g.transpose() / n;
  m.noise_cov = 0.5 * MatrixXd::Identity(n, n);
  SpdMatrix cov(m.marginal_cov());

  const int reps = 10000;
  MatrixXd draws(n, reps);
  Rng rng(83, 1);
  for (int r = 0; r < reps; ++r) draws.col(r) = sample_true(m.mu, cov, rng);

  VectorXd mean = draws.rowwise().mean();
  const MatrixXd target = m.marginal_cov();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double se = std::sqrt(target(i, i) / reps);
    CHECK(std::abs(mean(i) - m.mu(i)) <= 4.0 * se);
  }
  MatrixXd centered = draws.colwise() - mean;
  MatrixXd sample_cov = centered * centered.transpose() / (reps - 1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double se = std::sqrt(
          (target(i, i) * target(j, j) + target(i, j) * target(i, j)) / reps);
      CHECK(std::abs(sample_cov(i, j) - target(i, j)) <= 4.0 * se);
    }
}

TEST_CASE("run_trajectories: the true subset's trajectory is identically zero") {
  ExperimentConfig cfg = parse_config(linear_config());
  RunResult r = run_trajectories(cfg, 2);
  bool found = false;
  for (const auto& t : r.trajectories)
    if (t.subset == cfg.s0()) {
      found = true;
      CHECK(t.log_bf.cwiseAbs().maxCoeff() == 0.0);
      CHECK(t.select_fraction == 0.0);
    }
  CHECK(found);
  CHECK(r.selected == cfg.s0());
  CHECK(r.s0_selection_fraction == 1.0);
}

TEST_CASE("run_trajectories: deterministic and thread-count independent") {
  ExperimentConfig cfg = parse_config(linear_config());
  RunResult a = run_trajectories(cfg, 1);
  RunResult b = run_trajectories(cfg, 2);
  REQUIRE(a.trajectories.size() == b.trajectories.size());
  for (std::size_t i = 0; i < a.trajectories.size(); ++i)
    CHECK(a.trajectories[i].log_bf == b.trajectories[i].log_bf);
}

TEST_CASE("run_trajectories: prefix data makes early grid points invariant") {
  json j1 = linear_config();
  j1["n_grid"] = {100};
  j1["n_gen"] = 200;
  json j2 = linear_config();
  j2["n_grid"] = {100, 200};
  j2["n_gen"] = 200;
  RunResult r1 = run_trajectories(parse_config(j1), 2);
  RunResult r2 = run_trajectories(parse_config(j2), 2);
  for (std::size_t i = 0; i < r1.trajectories.size(); ++i) {
    CHECK(r1.trajectories[i].subset == r2.trajectories[i].subset);
    CHECK(r1.trajectories[i].log_bf.row(0) == r2.trajectories[i].log_bf.row(0));
  }
}

TEST_CASE("replicate-mean log BF is nonpositive within 3 SE under the truth") {
  json j = linear_config();
  j["replicates"] = 200;
  j["n_grid"] = {60, 120};
  ExperimentConfig cfg = parse_config(j);
  RunResult r = run_trajectories(cfg, 2);
  for (const auto& t : r.trajectories)
    for (std::size_t gi = 0; gi < t.n_grid.size(); ++gi) {
      const auto row = t.log_bf.row(static_cast<Eigen::Index>(gi));
      const double mean = row.mean();
      const double sd = std::sqrt((row.array() - mean).square().sum() /
                                  (row.size() - 1.0));
      const double se = sd / std::sqrt(static_cast<double>(row.size()));
      CHECK(mean <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("estimate_delta: constructed trajectories") {
  BFTrajectory t;
  t.subset = SubsetMask({1}, 2);
  t.n_grid = {100, 200, 400};
  t.log_bf = MatrixXd::Zero(3, 4);
  auto est0 = estimate_delta(t);
  CHECK(est0.tail == 0.0);
  CHECK(est0.ols == Approx(0.0).margin(1e-15));

  for (int gi = 0; gi < 3; ++gi)
    t.log_bf.row(gi).setConstant(-0.3 * t.n_grid[gi]);
  auto est = estimate_delta(t);
  CHECK(est.tail == Approx(0.3).epsilon(1e-12));
  CHECK(est.ols == Approx(0.3).epsilon(1e-12));

  BFTrajectory short_t = t;
  short_t.n_grid = {100};
  short_t.log_bf = MatrixXd::Zero(1, 4);
  CHECK_THROWS_AS(estimate_delta(short_t), InsufficientGrid);
}

TEST_CASE("select_subset: zero trajectory wins over negatives; ties break small") {
  auto mk = [](std::vector<int> idx, double value) {
    BFTrajectory t;
    t.subset = SubsetMask(std::move(idx), 3);
    t.n_grid = {50, 100};
    t.log_bf = MatrixXd::Constant(2, 3, value);
    return t;
  };
  std::vector<BFTrajectory> trajs;
  trajs.push_back(mk({1, 3}, -5.0));
  trajs.push_back(mk({1, 2}, 0.0));
  trajs.push_back(mk({3}, -1.0));
  CHECK(select_subset(trajs).label() == "1+2");

  // identical trajectories: the smaller subset wins, then lexicographic
  std::vector<BFTrajectory> ties;
  ties.push_back(mk({1, 2}, -1.0));
  ties.push_back(mk({2}, -1.0));
  ties.push_back(mk({3}, -1.0));
  CHECK(select_subset(ties).label() == "2");

  CHECK_THROWS_AS(select_subset({}), EmptyInput);
}

TEST_CASE("run_misspec: validation, antisymmetry, chain identity, ranking") {
  json j = {{"family", "linear"},
            {"p", 4},
            {"s0", {1, 2, 3}},
            {"seed", 91},
            {"replicates", 6},
            {"n_grid", {60, 120}},
            {"candidates", {json::array(), {1}, {2}, {4}, {1, 2}, {1, 4}, {2, 4}, {1, 2, 4}}},
            {"spec", {{"beta0", {1.0, 0.8, 0.9, 0.7}}}}};
  ExperimentConfig cfg = parse_config(j);
  MisspecResult mr = run_misspec(cfg, 2);

  const auto cs = mr.candidates.size();
  REQUIRE(cs == 8);
  for (const auto& m : mr.per_rep_matrix) {
    CHECK((m + m.transpose()).cwiseAbs().maxCoeff() < 1e-10);  // antisymmetry
    // chain identity against an arbitrary reference column
    for (std::size_t i = 0; i < cs; ++i)
      for (std::size_t j2 = 0; j2 < cs; ++j2)
        CHECK(std::abs(m(i, j2) - (m(i, 0) - m(j2, 0))) < 1e-10);
  }

  // ranking by row sums equals ranking by delta_hat
  std::vector<int> by_delta(cs);
  for (std::size_t i = 0; i < cs; ++i) by_delta[i] = static_cast<int>(i);
  std::sort(by_delta.begin(), by_delta.end(), [&](int a, int b) {
    return harnessdetail::better_candidate(-mr.trajectories[a].delta_hat,
                                           mr.candidates[a],
                                           -mr.trajectories[b].delta_hat,
                                           mr.candidates[b]);
  });
  CHECK(mr.ranking == by_delta);

  // configs that include the truth are rejected
  json bad = j;
  bad["candidates"] = {{1, 2, 3}, {1}};
  CHECK_THROWS_AS(run_misspec(parse_config(bad), 1), ValidationError);
  json bad2 = j;
  bad2["candidates"] = "all";
  CHECK_THROWS_AS(run_misspec(parse_config(bad2), 1), ValidationError);
}

TEST_CASE("run_misspec: single candidate gives a 1x1 zero matrix") {
  json j = {{"family", "linear"}, {"p", 2},          {"s0", {1, 2}},
            {"seed", 92},         {"replicates", 3}, {"n_grid", {40, 80}},
            {"candidates", {{1}}}};
  MisspecResult mr = run_misspec(parse_config(j), 1);
  REQUIRE(mr.mean_matrix.rows() == 1);
  CHECK(mr.mean_matrix(0, 0) == 0.0);
}

TEST_CASE("run_misspec: more true signal is preferred under a linear truth") {
  // candidates within the available pool {1,2,4}; covariate 3 is never
  // observable, so {1,2} (all available true signal) beats {1}
  json j = {{"family", "linear"},
            {"p", 4},
            {"s0", {1, 2, 3}},
            {"seed", 93},
            {"replicates", 10},
            {"n_grid", {200, 400}},
            {"candidates", {{1}, {1, 2}, {1, 2, 4}}},
            {"spec", {{"beta0", {1.0, 0.8, 0.9, 0.7}}}}};
  MisspecResult mr = run_misspec(parse_config(j), 2);
  int idx_1 = -1, idx_12 = -1;
  for (std::size_t i = 0; i < mr.candidates.size(); ++i) {
    if (mr.candidates[i].label() == "1") idx_1 = static_cast<int>(i);
    if (mr.candidates[i].label() == "1+2") idx_12 = static_cast<int>(i);
  }
  REQUIRE(idx_1 >= 0);
  REQUIRE(idx_12 >= 0);
  int positive = 0;
  for (const auto& m : mr.per_rep_matrix)
    if (m(idx_12, idx_1) > 0) ++positive;
  CHECK(positive >= static_cast<int>(0.9 * mr.per_rep_matrix.size()));
}

TEST_CASE("mc_moment_check: identity and random forms pass at 4 SE") {
  Rng rng(94, streams::kMcCheckBase);
  WhitenedForm id{MatrixXd::Identity(2, 2)};
  auto rep = mc_moment_check(id, 100000, rng);
  CHECK(std::abs(rep.estimate[0] - 2.0) <= 4.0 * rep.std_error[0]);
  CHECK(rep.all_within());

  MatrixXd g(5, 5);
  Rng init(95, 0);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) g(i, j) = init.normal();
  WhitenedForm c{MatrixXd(g * g.transpose() / 5.0 + 0.3 * MatrixXd::Identity(5, 5))};
  Rng rng2(96, streams::kMcCheckBase + 1);
  auto rep2 = mc_moment_check(c, 100000, rng2);
  CHECK(rep2.all_within());

  // negative control: a 10% perturbation of the closed forms must be flagged
  bool flagged = false;
  for (int k = 0; k < 5; ++k) {
    const double z = (rep2.estimate[k] - 1.1 * rep2.closed[k]) / rep2.std_error[k];
    if (std::abs(z) > 4.0) flagged = true;
  }
  CHECK(flagged);

  CHECK_THROWS_AS(mc_moment_check(id, 100, rng), InvalidArgument);
}

TEST_CASE("se family: small end-to-end run selects the truth") {
  json j = {{"family", "se"},
            {"p", 2},
            {"s0", {1, 2}},
            {"seed", 97},
            {"replicates", 5},
            {"n_grid", {60, 120}},
            {"spec",
             {{"sigma_f_sq", 0.25},
              {"length_scales", {4.0, 4.0}},
              {"mean", {{"type", "clipped_linear"}, {"coeffs", {2.0, 1.6}}, {"bound", 8.0}}}}}};
  ExperimentConfig cfg = parse_config(j);
  RunResult r = run_trajectories(cfg, 2);
  CHECK(r.selected == cfg.s0());
  for (const auto& t : r.trajectories)
    if (t.subset == cfg.s0()) CHECK(t.log_bf.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ar1 family with quadrature: truth wins, trajectories finite") {
  json j = {{"family", "ar1"},
            {"p", 2},
            {"s0", {1}},
            {"seed", 98},
            {"replicates", 4},
            {"n_grid", {60, 120}},
            {"quadrature", {{"nodes", 16}}},
            {"spec", {{"rho", 0.5}, {"gamma", 0.1}, {"beta0", {1.0, 0.8}}}}};
  ExperimentConfig cfg = parse_config(j);
  RunResult r = run_trajectories(cfg, 2);
  CHECK(r.selected == cfg.s0());
  for (const auto& t : r.trajectories) {
    CHECK(t.log_bf.allFinite());
    if (t.subset == cfg.s0()) {
      // the integrated trajectory of the true subset is mildly negative
      CHECK(t.log_bf.maxCoeff() <= 0.0);
      CHECK(t.log_bf.minCoeff() > -10.0);
    }
  }
}

TEST_CASE("inverse-gamma variance mode: linear truth still wins") {
  json j = linear_config();
  j["variance_mode"] = "inverse_gamma";
  j["alpha"] = 3.0;
  j["beta"] = 1.0;
  j["n_grid"] = {80, 160};
  j["replicates"] = 6;
  ExperimentConfig cfg = parse_config(j);
  RunResult r = run_trajectories(cfg, 2);
  CHECK(r.selected == cfg.s0());
  // t-based and exact code paths agree on the sign structure
  for (const auto& t : r.trajectories)
    if (t.subset == cfg.s0()) CHECK(t.log_bf.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("csv outputs are deterministic byte-for-byte") {
  ExperimentConfig cfg = parse_config(linear_config());
  RunResult r1 = run_trajectories(cfg, 2);
  RunResult r2 = run_trajectories(cfg, 1);
  write_trajectories_csv(r1, "traj_a.csv");
  write_trajectories_csv(r2, "traj_b.csv");
  write_summary_csv(r1, "summary_a.csv");
  write_summary_csv(r2, "summary_b.csv");
  CHECK(slurp("traj_a.csv") == slurp("traj_b.csv"));
  CHECK(slurp("summary_a.csv") == slurp("summary_b.csv"));
  CHECK(slurp("traj_a.csv").find("subset,n,replicate,log_bf,log_bf_over_n") == 0);
}

TEST_CASE("tail and OLS delta estimates agree on linear runs reaching n = 800") {
  json j = {{"family", "linear"},
            {"p", 3},
            {"s0", {1, 2}},
            {"seed", 73},
            {"replicates", 10},
            {"n_grid", {200, 400, 800}},
            {"spec", {{"beta0", {1.0, 0.8, 0.9}}}}};
  ExperimentConfig cfg = parse_config(j);
  RunResult r = run_trajectories(cfg, 2);
  for (const auto& t : r.trajectories) {
    if (t.subset == cfg.s0()) continue;
    auto est = estimate_delta(t);
    CHECK(est.tail > 0.0);
    CHECK(std::abs(est.tail - est.ols) <= 0.2 * std::max(est.tail, est.ols));
  }
}

TEST_CASE("replicate dataset generation matches the harness stream") {
  ExperimentConfig cfg = parse_config(linear_config());
  ReplicateData rd = generate_replicate(cfg, 0);
  CHECK(rd.data.n() == cfg.generation_length());
  CHECK(rd.data.p() == cfg.p);
  CHECK(rd.data.y.allFinite());
  // regenerating is bit-identical; a different replicate differs
  ReplicateData rd2 = generate_replicate(cfg, 0);
  CHECK(rd.data.y == rd2.data.y);
  CHECK(rd.data.X == rd2.data.X);
  ReplicateData other = generate_replicate(cfg, 1);
  CHECK(rd.data.y != other.data.y);

  write_dataset_csv(rd.data, "replicate0.csv");
  Dataset back = read_dataset_csv("replicate0.csv", cfg.covariate_bound);
  CHECK((back.X - rd.data.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.y - rd.data.y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("integrated_log_bf with grid refinement settles within tolerance") {
  // smooth AR(1) instance at n = 50: refinement stops at the first doubling
  json j = {{"family", "ar1"},
            {"p", 2},
            {"s0", {1}},
            {"seed", 99},
            {"replicates", 1},
            {"n_grid", {50}},
            {"spec", {{"rho", 0.4}, {"gamma", 0.1}, {"beta0", {1.0, 0.8}}}}};
  ExperimentConfig cfg = parse_config(j);
  Rng rng(cfg.seed, streams::kReplicateBase);
  MatrixXd x = generate_covariates(cfg, rng, 50);
  Dataset data(VectorXd::Zero(50), x, 1.0);
  ModelMoments truth = build_moments(cfg, data, cfg.s0());
  SpdMatrix tcov(truth.marginal_cov());
  VectorXd y = sample_true(truth.mu, tcov, rng);
  GaussianMarginal truth_marg(truth.mu, tcov);

  SubsetMask cand({2}, 2);
  ModelBuilder builder = [&](double rho) {
    ModelMoments cm = build_moments_ar1_at(cfg, data, cand, rho);
    return std::make_pair(GaussianMarginal::from_moments(cm), truth_marg);
  };
  const double refined =
      integrated_log_bf_refined(y, builder, -0.9, 0.9, 16, 1e-6, 128);
  const double at64 = integrated_log_bf(
      y, builder, QuadratureGrid::gauss_legendre_uniform(-0.9, 0.9, 64));
  CHECK(refined == Approx(at64).margin(1e-6));
}
