#include <cmath>

#include <doctest.h>

#include "cdecomp/model.hpp"
#include "cdecomp/solver.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace cdecomp;
using Eigen::MatrixXd;

namespace {

SolverConfig config(double gamma, double lambda) {
  SolverConfig c;
  c.gamma = gamma;
  c.lambda_off = lambda;
  return c;
}

void check_invariants(const SolveResult& r, const SolverConfig& cfg) {
  testing::check_certificate(r);
  CHECK(is_positive_definite(r.j_hat));
  const Index p = r.j_hat.dim();
  for (Index i = 0; i < p; ++i) {
    CHECK(r.sigma_r_hat(i, i) == 0.0);
    CHECK(r.z_gamma(i, i) == 0.0);
    for (Index j = 0; j < p; ++j) {
      if (i == j) continue;
      CHECK(std::abs(r.z_gamma(i, j)) <= 1.0);
      if (std::abs(r.j_hat(i, j)) > 1e-8) {
        CHECK(r.z_gamma(i, j) == (r.j_hat(i, j) > 0 ? 1.0 : -1.0));
      }
      if (r.converged) CHECK(std::abs(r.j_hat(i, j)) <= cfg.lambda_off + 1e-9);
      if (r.sigma_r_hat(i, j) != 0.0) {
        CHECK(std::abs(r.j_hat(i, j)) >= cfg.lambda_off - cfg.tie_tolerance());
        CHECK(r.sigma_r_hat(i, j) * r.j_hat(i, j) >= 0.0);
      }
    }
  }
}

}  // namespace

TEST_CASE("identity input gives the unconstrained MLE") {
  const auto cfg = config(0.0, kInf);
  const auto r = admm_solve(SymmetricMatrix::identity(3), cfg);
  CHECK(r.converged);
  CHECK(max_abs_entry(r.j_hat.dense() - MatrixXd::Identity(3, 3)) < 1e-9);
  CHECK(r.sigma_r_hat.dense() == MatrixXd::Zero(3, 3));
  CHECK(std::abs(r.duality_gap) <= 1e-10);
  CHECK(r.overall_pd);
  check_invariants(r, cfg);
}

TEST_CASE("diagonal input is returned inverted") {
  for (double gamma : {0.0, 0.3, 2.0}) {
    for (double lambda : {0.1, 1.0, kInf}) {
      const auto cfg = config(gamma, lambda);
      const auto r = admm_solve(SymmetricMatrix::diagonal(Eigen::Vector2d(2.0, 4.0)), cfg);
      CHECK(r.converged);
      CHECK(r.j_hat(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
      CHECK(r.j_hat(1, 1) == doctest::Approx(0.25).epsilon(1e-9));
      CHECK(r.j_hat(0, 1) == 0.0);
      CHECK(r.sigma_r_hat.dense() == MatrixXd::Zero(2, 2));
      check_invariants(r, cfg);
    }
  }
}

TEST_CASE("exact chain statistics recover both components") {
  const auto m = chain_model({0.06, 0.04, 0.03}, -0.01);
  const auto cfg = config(0.0, m.lambda_star);
  const auto sigma = true_covariance(m);
  const auto r = admm_solve(sigma, cfg);
  CHECK(r.converged);
  CHECK(max_abs_entry(r.j_hat.dense() - m.j_markov.dense()) <= 1e-6);
  CHECK(max_abs_entry(r.sigma_r_hat.dense() - m.sigma_residual.dense()) <= 1e-6);
  REQUIRE(r.clip_set.size() == 1);
  CHECK(r.clip_set.front() == IndexPair{0, 1});
  CHECK(std::abs(r.duality_gap) <= 1e-6);
  CHECK(r.overall_pd);
  CHECK(r.min_eig_overall == doctest::Approx(min_eigenvalue(sigma)).epsilon(1e-6));
  check_invariants(r, cfg);
}

TEST_CASE("residual extraction rules") {
  const auto m = chain_model({0.06, 0.04, 0.03}, -0.01);
  const auto sigma = true_covariance(m);
  const auto zero_z = SymmetricMatrix::zero(4);

  auto ex = extract_residual(m.j_markov, sigma, zero_z, config(0.0, m.lambda_star));
  CHECK(max_abs_entry(ex.sigma_r.dense() - m.sigma_residual.dense()) < 1e-12);

  ex = extract_residual(m.j_markov, sigma, zero_z, config(0.0, 2.0 * m.lambda_star));
  CHECK(ex.sigma_r.dense() == MatrixXd::Zero(4, 4));
  CHECK(ex.clip_set.empty());

  ex = extract_residual(m.j_markov, sigma, zero_z, config(0.0, kInf));
  CHECK(ex.sigma_r.dense() == MatrixXd::Zero(4, 4));

  // A residual of the wrong sign at the clip boundary is zeroed and flagged.
  MatrixXd s = sigma.dense();
  s(0, 1) = s(1, 0) = sigma(0, 1) - 0.05;
  ex = extract_residual(m.j_markov, SymmetricMatrix(s), zero_z, config(0.0, m.lambda_star));
  CHECK(ex.sigma_r(0, 1) == 0.0);
  CHECK(ex.sign_conflicts.size() == 1);
}

TEST_CASE("duality gap certifies, and a truncated run certifies worse") {
  const auto m = chain_model({0.06, 0.04, 0.03}, -0.01);
  const auto sigma = true_covariance(m);
  auto cfg = config(0.0, m.lambda_star);
  const auto full = admm_solve(sigma, cfg);
  REQUIRE(full.converged);
  CHECK(std::abs(full.duality_gap) <= 1e-6);
  CHECK(duality_gap(full, sigma, cfg) == doctest::Approx(full.duality_gap));

  cfg.max_iter = 2;
  const auto cut = admm_solve(sigma, cfg);
  CHECK_FALSE(cut.converged);
  CHECK(cut.iterations == 2);
  CHECK(std::abs(cut.duality_gap) > std::abs(full.duality_gap));
}

TEST_CASE("re-solving from the solution is immediate") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = testing::random_sample_covariance(8, 200, seed);
    const auto cfg = config(0.1, 0.15);
    const auto first = admm_solve(s, cfg);
    REQUIRE(first.converged);
    check_invariants(first, cfg);
    const auto again = admm_solve(s, cfg, first.j_hat);
    CHECK(again.converged);
    CHECK(again.iterations <= 3);
    CHECK(max_abs_entry(again.j_hat.dense() - first.j_hat.dense()) < 1e-6);
  }
}

TEST_CASE("infinite lambda reproduces the graphical lasso") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Index p = 5 + static_cast<Index>(seed) * 2;
    const auto s = testing::random_sample_covariance(p, 3 * p, seed * 31);
    const auto cfg = config(0.1, kInf);
    const auto r = admm_solve(s, cfg);
    REQUIRE(r.converged);
    check_invariants(r, cfg);
    CHECK(r.sigma_r_hat.dense() == MatrixXd::Zero(p, p));
    const MatrixXd oracle_j = oracle::graphical_lasso(s.dense(), cfg.gamma);
    CHECK(max_abs_entry(r.j_hat.dense() - oracle_j) <= 1e-5);
  }
}

TEST_CASE("near-zero lambda reduces to negative soft thresholding") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = testing::random_sample_covariance(10, 40, seed * 7);
    const auto cfg = config(0.1, 1e-6);
    const auto r = admm_solve(s, cfg);
    REQUIRE(r.converged);
    check_invariants(r, cfg);
    const auto st = soft_threshold_covariance(s, cfg.gamma);
    for (Index i = 0; i < 10; ++i)
      for (Index j = 0; j < 10; ++j) {
        if (i == j) continue;
        CHECK(std::abs(r.j_hat(i, j)) <= 1e-6 + 1e-9);
        CHECK(std::abs(-r.sigma_r_hat(i, j) - st.sigma_estimate(i, j)) <= 1e-4);
        CHECK(std::abs(r.sigma_m_hat(i, j)) <= 1e-6 * s(i, i) * s(j, j) * 1.01 + 1e-9);
      }
  }
}

TEST_CASE("soft_threshold_covariance examples") {
  MatrixXd a(2, 2);
  a << 1.0, 0.5, 0.5, 2.0;
  auto st = soft_threshold_covariance(SymmetricMatrix(a), 0.2);
  CHECK(st.sigma_r(0, 1) == doctest::Approx(-0.3));
  CHECK(st.sigma_estimate(0, 1) == doctest::Approx(0.3));
  CHECK(st.sigma_estimate(1, 1) == 2.0);
  CHECK(st.sigma_r(0, 0) == 0.0);

  a(0, 1) = a(1, 0) = 0.1;
  st = soft_threshold_covariance(SymmetricMatrix(a), 0.2);
  CHECK(st.sigma_r(0, 1) == 0.0);
  CHECK(st.sigma_estimate(0, 1) == 0.0);

  const auto s = testing::random_spd(6, 3);
  CHECK(soft_threshold_covariance(s, 0.0).sigma_estimate.dense() == s.dense());
}

TEST_CASE("witness with a diagonal pattern") {
  const auto s = SymmetricMatrix::diagonal(Eigen::Vector3d(2.0, 4.0, 0.5));
  const auto r = witness_solve(s, PairIndexSet::diagonal(3), PairIndexSet(3, {}),
                               SymmetricMatrix::zero(3), config(0.0, kInf));
  CHECK(r.converged);
  CHECK(max_abs_entry(r.j_hat.dense() - Eigen::Vector3d(0.5, 0.25, 2.0).asDiagonal().toDenseMatrix()) <
        1e-9);
  testing::check_certificate(r);
}

TEST_CASE("witness with true supports matches the original program") {
  const auto m = chain_model({0.06, 0.04, 0.03}, -0.01);
  const auto part = partition_pairs(m);
  std::vector<IndexPair> sm(part.residual.begin(), part.residual.end());
  sm.insert(sm.end(), part.markov_only.begin(), part.markov_only.end());
  const auto cfg = config(0.0, m.lambda_star);
  const auto sigma = true_covariance(m);
  const auto w = witness_solve(sigma, PairIndexSet(4, sm), part.residual, m.j_markov, cfg);
  const auto r = admm_solve(sigma, cfg);
  REQUIRE(w.converged);
  testing::check_certificate(w);
  CHECK(max_abs_entry(w.j_hat.dense() - r.j_hat.dense()) <= 1e-6);
  CHECK(max_abs_entry(w.sigma_r_hat.dense() - r.sigma_r_hat.dense()) <= 1e-6);

  // one-sided pairs in S_R give the same symmetric residual
  const auto w1 = witness_solve(sigma, PairIndexSet(4, sm), PairIndexSet(4, {{0, 1}}), m.j_markov, cfg);
  CHECK(max_abs_entry(w1.sigma_r_hat.dense() - w.sigma_r_hat.dense()) <= 1e-9);
}

TEST_CASE("witness missing a strong edge differs from the original program") {
  const auto m = chain_model({0.6, 0.5, 0.4}, -0.05);
  const auto part = partition_pairs(m);
  std::vector<IndexPair> sm;
  for (const auto& pr : part.residual) sm.push_back(pr);
  for (const auto& pr : part.markov_only)
    if (!(std::min(pr.row, pr.col) == 1 && std::max(pr.row, pr.col) == 2)) sm.push_back(pr);
  const auto cfg = config(0.0, m.lambda_star);
  const auto sigma = true_covariance(m);
  const auto w = witness_solve(sigma, PairIndexSet(4, sm), part.residual, m.j_markov, cfg);
  const auto r = admm_solve(sigma, cfg);
  CHECK(max_abs_entry(w.j_hat.dense() - r.j_hat.dense()) > 1e-3);
}

TEST_CASE("witness input validation") {
  const auto s = SymmetricMatrix::identity(3);
  const auto cfg = config(0.0, 0.5);
  CHECK_THROWS_AS(witness_solve(s, PairIndexSet(3, {{0, 0}, {1, 1}}), PairIndexSet(3, {}),
                                SymmetricMatrix::zero(3), cfg),
                  PreconditionViolated);
  CHECK_THROWS_AS(witness_solve(s, PairIndexSet::diagonal(3), PairIndexSet(3, {{0, 1}}),
                                SymmetricMatrix::identity(3), cfg),
                  PreconditionViolated);
}

TEST_CASE("solver input validation") {
  MatrixXd bad = MatrixXd::Identity(2, 2);
  bad(1, 1) = 0.0;
  CHECK_THROWS_AS(admm_solve(SymmetricMatrix(bad), config(0.1, 1.0)), NotPositiveDefinite);
  CHECK_THROWS_AS(admm_solve(SymmetricMatrix::identity(2), config(-1.0, 1.0)), PreconditionViolated);
  auto cfg = config(0.1, 1.0);
  cfg.eps_abs = 0.0;
  CHECK_THROWS_AS(cfg.validate(), PreconditionViolated);
  cfg = config(0.1, 1.0);
  cfg.rho_admm = 0.0;
  CHECK_THROWS_AS(cfg.validate(), PreconditionViolated);
}

TEST_CASE("post_check_overall_pd") {
  const auto r0 = admm_solve(SymmetricMatrix::identity(2), config(0.0, kInf));
  CHECK(r0.overall_pd);

  SolveResult adversarial = r0;
  MatrixXd huge = MatrixXd::Zero(2, 2);
  huge(0, 1) = huge(1, 0) = 10.0;
  adversarial.sigma_r_hat = SymmetricMatrix(huge);
  const auto [pd, min_eig] = post_check_overall_pd(adversarial);
  CHECK_FALSE(pd);
  CHECK(min_eig == doctest::Approx(-9.0));
  CHECK_FALSE(adversarial.overall_pd);
}

TEST_CASE("random sample instances satisfy the optimality invariants") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto m = grid_model(3, seed);
    const auto s = sample_covariance(draw_samples(m, 500, seed));
    const auto cfg = config(gamma_schedule(2.0, 9.0, 500.0), m.lambda_star);
    const auto r = admm_solve(s, cfg);
    CHECK(r.converged);
    check_invariants(r, cfg);
    // the stopping rule's scale-aware bound
    const double scale = std::max(max_abs_entry(s.dense()), max_abs_entry(r.sigma_m_hat.dense()));
    CHECK(r.kkt_residual <= 10.0 * (cfg.eps_abs + cfg.eps_rel * scale));
  }
}

TEST_CASE("finite diagonal cap clips the diagonal") {
  auto cfg = config(0.05, 0.2);
  cfg.lambda_on = 0.8;
  const auto s = testing::random_sample_covariance(6, 300, 5);
  const auto r = admm_solve(s, cfg);
  CHECK(r.converged);
  for (Index i = 0; i < 6; ++i) CHECK(std::abs(r.j_hat(i, i)) <= 0.8 + 1e-9);
}
