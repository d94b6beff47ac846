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

#include "gpbf/linalg.hpp"
#include "gpbf/rng.hpp"

using namespace gpbf;
using Catch::Approx;

namespace {

// Random SPD matrix M = G G' + c I with iid normal G.
MatrixXd random_spd(Eigen::Index n, Rng& rng, double ridge = 1.0) {
  MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.normal();
  return g * g.transpose() / static_cast<double>(n) +
         ridge * MatrixXd::Identity(n, n);
}

MatrixXd equicorrelation(Eigen::Index n, double rho) {
  MatrixXd m = MatrixXd::Constant(n, n, rho);
  m.diagonal().setConstant(1.0);
  return m;
}

MatrixXd se_matrix_1d(const VectorXd& x) {
  const auto n = x.size();
  MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      k(i, j) = std::exp(-0.5 * (x(i) - x(j)) * (x(i) - x(j)));
  return k;
}

}  // namespace

TEST_CASE("cholesky: identity and hand-worked 2x2") {
  CHECK(cholesky(MatrixXd::Identity(2, 2)).isApprox(MatrixXd::Identity(2, 2), 1e-14));

  MatrixXd m(2, 2);
  m << 4, 2, 2, 3;
  MatrixXd l = cholesky(m);
  CHECK(l(0, 0) == Approx(2.0).epsilon(1e-12));
  CHECK(l(1, 0) == Approx(1.0).epsilon(1e-12));
  CHECK(l(0, 1) == Approx(0.0).margin(1e-15));
  CHECK(l(1, 1) == Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK((l * l.transpose() - m).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cholesky: reconstruction on random SPD (Wishart-style)") {
  Rng rng(11, 0);
  for (Eigen::Index n : {50, 200, 500}) {
    MatrixXd m = random_spd(n, rng);
    SpdMatrix spd(m);
    const MatrixXd& l = spd.chol_lower();
    double err = (l * l.transpose() - spd.matrix()).cwiseAbs().maxCoeff();
    CHECK(err <= 1e-8 * m.cwiseAbs().maxCoeff());
    CHECK(spd.applied_jitter() == 0.0);
  }
}

TEST_CASE("cholesky: jitter rescues a numerically singular kernel matrix") {
  // near-duplicate inputs make the SE kernel matrix singular at double precision
  VectorXd x(4);
  x << 0.0, 1e-12, 1.0, 2.0;
  MatrixXd k = se_matrix_1d(x);
  SpdMatrix spd(k);
  CHECK(spd.applied_jitter() > 0.0);
  CHECK(spd.applied_jitter() <= 1e-8 * k.diagonal().mean() * 1.0000001);
}

TEST_CASE("cholesky: rejects an indefinite matrix") {
  MatrixXd m(2, 2);
  m << 1, 2, 2, 1;  // eigenvalues 3 and -1
  CHECK_THROWS_AS(SpdMatrix(m), NotPositiveDefinite);
}

TEST_CASE("cholesky: rejects asymmetric input") {
  MatrixXd m(2, 2);
  m << 1, 0.5, 0.1, 1;
  CHECK_THROWS_AS(SpdMatrix(m), InvalidArgument);
}

TEST_CASE("log_det_spd: identity, diagonal, eigenvalue oracle") {
  CHECK(log_det_spd(MatrixXd::Identity(7, 7)) == Approx(0.0).margin(1e-14));

  MatrixXd d = MatrixXd::Zero(2, 2);
  d.diagonal() << 2.0, 8.0;
  CHECK(log_det_spd(d) == Approx(std::log(16.0)).epsilon(1e-12));

  Rng rng(12, 0);
  MatrixXd m = random_spd(30, rng);
  VectorXd ev = symmetric_eigenvalues(m);
  double oracle = ev.array().log().sum();
  CHECK(log_det_spd(m) == Approx(oracle).margin(1e-8));
}

TEST_CASE("quad_form: trivial and dense-inverse oracle") {
  MatrixXd id = MatrixXd::Identity(2, 2);
  SpdMatrix spd_id(id);
  CHECK(spd_id.quad_form(VectorXd::Zero(2)) == 0.0);
  VectorXd v(2);
  v << 3, 4;
  CHECK(spd_id.quad_form(v) == Approx(25.0).epsilon(1e-14));

  Rng rng(13, 0);
  MatrixXd m = random_spd(20, rng);
  SpdMatrix spd(m);
  VectorXd w(20);
  for (int i = 0; i < 20; ++i) w(i) = rng.normal();
  double oracle = w.dot(m.inverse() * w);
  CHECK(spd.quad_form(w) == Approx(oracle).margin(1e-8));

  CHECK_THROWS_AS(spd.quad_form(VectorXd::Zero(3)), DimensionMismatch);
}

TEST_CASE("quad_form: nonnegative, zero only at the origin") {
  Rng rng(14, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform() * 20);
    SpdMatrix spd(random_spd(n, rng, 0.5));
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
    CHECK(spd.quad_form(v) > 0.0);
    CHECK(spd.quad_form(VectorXd::Zero(n)) == 0.0);
  }
}

TEST_CASE("gerschgorin_bounds: identity, equicorrelation, SE kernel") {
  auto [lo_i, hi_i] = gerschgorin_bounds(MatrixXd::Identity(3, 3));
  CHECK(lo_i == Approx(1.0));
  CHECK(hi_i == Approx(1.0));

  // n=3, rho=0.5: each row has diag 1 and off-diagonal sum 1
  auto [lo_e, hi_e] = gerschgorin_bounds(equicorrelation(3, 0.5));
  CHECK(lo_e == Approx(0.0).margin(1e-14));
  CHECK(hi_e == Approx(2.0).epsilon(1e-14));
  // true eigenvalues {0.5, 0.5, 2} lie inside
  VectorXd ev = symmetric_eigenvalues(equicorrelation(3, 0.5));
  CHECK(ev(0) >= lo_e - 1e-12);
  CHECK(ev(2) <= hi_e + 1e-12);

  // separated 1-d design: upper bound dominates the exact top eigenvalue
  VectorXd x(10);
  for (int i = 0; i < 10; ++i) x(i) = 2.0 * i;
  MatrixXd k = se_matrix_1d(x);
  auto [lo_k, hi_k] = gerschgorin_bounds(k);
  auto [emin, emax] = extreme_eigs(k);
  CHECK(hi_k >= emax - 1e-12);
  CHECK(lo_k <= emin + 1e-12);
}

TEST_CASE("extreme_eigs: diagonal, equicorrelation closed form, kernel bounds") {
  MatrixXd d = MatrixXd::Zero(3, 3);
  d.diagonal() << 1.0, 2.0, 3.0;
  auto [lo, hi] = extreme_eigs(d);
  CHECK(lo == Approx(1.0).epsilon(1e-12));
  CHECK(hi == Approx(3.0).epsilon(1e-12));

  // equicorrelation n=10, rho=0.3: eigenvalues 1-rho and 1+(n-1)rho
  auto [lo_e, hi_e] = extreme_eigs(equicorrelation(10, 0.3));
  CHECK(lo_e == Approx(0.7).epsilon(1e-10));
  CHECK(hi_e == Approx(3.7).epsilon(1e-10));

  // 100x100 SE kernel + I stays inside its Gerschgorin disc union
  Rng rng(15, 0);
  VectorXd x(100);
  for (int i = 0; i < 100; ++i) x(i) = rng.uniform(-1.0, 1.0);
  MatrixXd m = se_matrix_1d(x) + MatrixXd::Identity(100, 100);
  auto [glo, ghi] = gerschgorin_bounds(m);
  auto [elo, ehi] = extreme_eigs(m);
  CHECK(elo >= glo - 1e-10);
  CHECK(ehi <= ghi + 1e-10);
}

TEST_CASE("extreme_eigs agrees with a full-decomposition oracle") {
  Rng rng(16, 0);
  MatrixXd m = random_spd(40, rng);
  VectorXd ev = symmetric_eigenvalues(m);
  auto [lo, hi] = extreme_eigs(m);
  CHECK(lo == Approx(ev(0)).epsilon(1e-8));
  CHECK(hi == Approx(ev(39)).epsilon(1e-8));
}

TEST_CASE("eigenvalue sum bounds for symmetric pairs") {
  // lambda_min(A1) + lambda_min(A2) <= lambda_min(A1+A2), and the max analogue
  Rng rng(17, 0);
  for (int rep = 0; rep < 25; ++rep) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.uniform() * 15);
    MatrixXd a(n, n), b(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) {
        a(i, j) = a(j, i) = rng.normal();
        b(i, j) = b(j, i) = rng.normal();
      }
    auto [alo, ahi] = extreme_eigs(a);
    auto [blo, bhi] = extreme_eigs(b);
    auto [slo, shi] = extreme_eigs(a + b);
    CHECK(alo + blo <= slo + 1e-9);
    CHECK(shi <= ahi + bhi + 1e-9);
  }
}

TEST_CASE("product eigenvalue inequality through the symmetric similar form") {
  // lambda_max(G H) <= lambda_max(G) lambda_max(H) for SPD pairs, evaluated
  // via H^{1/2} G H^{1/2} which shares the spectrum of G H
  Rng rng(18, 0);
  for (int rep = 0; rep < 15; ++rep) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.uniform() * 12);
    MatrixXd g = random_spd(n, rng, 0.1);
    MatrixXd h = random_spd(n, rng, 0.1);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
    MatrixXd hsqrt = es.operatorSqrt();
    MatrixXd sym = hsqrt * g * hsqrt;
    auto [plo, phi] = extreme_eigs(0.5 * (sym + sym.transpose()));
    (void)plo;
    auto [glo, ghi] = extreme_eigs(g);
    auto [hlo, hhi] = extreme_eigs(h);
    (void)glo;
    (void)hlo;
    CHECK(phi <= ghi * hhi * (1.0 + 1e-10) + 1e-12);
    // cross-check the similarity: spectrum of H^{1/2} G H^{1/2} == spectrum of G H
    Eigen::VectorXcd prod_ev = (g * h).eigenvalues();
    double prod_max = prod_ev.real().maxCoeff();
    CHECK(phi == Approx(prod_max).epsilon(1e-8));
  }
}

TEST_CASE("log_sum_exp: trivial cases and extreme magnitudes") {
  CHECK(log_sum_exp({0.0}, {1.0}) == Approx(0.0).margin(1e-15));
  CHECK(log_sum_exp({std::log(2.0), std::log(3.0)}, {1.0, 1.0}) ==
        Approx(std::log(5.0)).epsilon(1e-14));
  CHECK(log_sum_exp({1000.0, 1000.0}, {0.5, 0.5}) == Approx(1000.0).epsilon(1e-14));
  CHECK(log_sum_exp({1e6, 1e6 - 800.0}, {1.0, 1.0}) == Approx(1e6).epsilon(1e-12));
  CHECK(log_sum_exp({-1e6, -1e6}, {0.5, 0.5}) == Approx(-1e6).epsilon(1e-12));

  CHECK_THROWS_AS(log_sum_exp({}, {}), EmptyInput);
  CHECK_THROWS_AS(log_sum_exp({0.0}, {0.0}), InvalidArgument);
  CHECK_THROWS_AS(log_sum_exp({0.0, 1.0}, {1.0}), DimensionMismatch);
}

TEST_CASE("gerschgorin bounds always enclose extreme eigenvalues") {
  Rng rng(19, 0);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform() * 30);
    MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.normal();
    auto [glo, ghi] = gerschgorin_bounds(a);
    auto [elo, ehi] = extreme_eigs(a);
    CHECK(glo <= elo + 1e-10);
    CHECK(ghi >= ehi - 1e-10);
  }
}
