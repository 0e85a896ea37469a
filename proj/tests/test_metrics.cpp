#include <cmath>
#include <set>
#include <utility>

#include <doctest.h>

#include "cdecomp/metrics.hpp"
#include "cdecomp/solver.hpp"
#include "helpers.hpp"

using namespace cdecomp;
using Eigen::MatrixXd;

namespace {

SymmetricMatrix with_edges(Index p, std::initializer_list<std::pair<Index, Index>> edges,
                           double value = 0.3) {
  MatrixXd m = MatrixXd::Identity(p, p);
  for (auto [i, j] : edges) m(i, j) = m(j, i) = value;
  return SymmetricMatrix(m);
}

std::set<std::pair<Index, Index>> brute_support(const MatrixXd& m, double thr) {
  std::set<std::pair<Index, Index>> s;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j)) > thr) s.insert({i, j});
  return s;
}

Index brute_edit(const MatrixXd& a, const MatrixXd& b, double thr) {
  const auto sa = brute_support(a, thr), sb = brute_support(b, thr);
  Index d = 0;
  for (const auto& e : sa) d += sb.count(e) == 0;
  for (const auto& e : sb) d += sa.count(e) == 0;
  return d;
}

SymmetricMatrix random_sparse(Index p, std::uint64_t seed) {
  CounterRng rng(seed);
  MatrixXd m = MatrixXd::Identity(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j)
      if (rng.uniform() < 0.4) m(i, j) = m(j, i) = rng.uniform(-1.0, 1.0);
  return SymmetricMatrix(m);
}

}  // namespace

TEST_CASE("support_of examples") {
  CHECK(support_of(SymmetricMatrix::zero(3)).empty());
  CHECK(support_of(SymmetricMatrix::identity(3)).empty());
  const auto chain = chain_model({0.06, 0.04, 0.03}, -0.01);
  const auto s = support_of(chain.j_markov, 1e-8);
  REQUIRE(s.size() == 3);
  CHECK(s.contains({0, 1}));
  CHECK(s.contains({1, 2}));
  CHECK(s.contains({2, 3}));
  CHECK_THROWS_AS(support_of(chain.j_markov, -1.0), PreconditionViolated);
}

TEST_CASE("edit_distance examples") {
  const auto a = with_edges(4, {{0, 1}});
  const auto b = with_edges(4, {{0, 1}, {2, 3}});
  CHECK(edit_distance(a, a) == 0);
  CHECK(edit_distance(a, b) == 1);
  CHECK(edit_distance(SymmetricMatrix::identity(4), b) == 2);
  CHECK_THROWS_AS(edit_distance(a, SymmetricMatrix::identity(3)), DimensionMismatch);
}

TEST_CASE("normalized_edit_distance examples") {
  const auto truth = with_edges(4, {{0, 1}, {1, 2}});
  CHECK(normalized_edit_distance(truth, truth) == 0.0);
  CHECK(normalized_edit_distance(SymmetricMatrix::identity(4), truth) == 1.0);
  const auto noisy = with_edges(4, {{0, 1}, {1, 2}, {0, 3}, {2, 3}});
  CHECK(normalized_edit_distance(noisy, truth) == 1.0);
  const auto worse = with_edges(4, {{0, 1}, {1, 2}, {0, 3}, {2, 3}, {0, 2}});
  CHECK(normalized_edit_distance(worse, truth) == 1.5);
  CHECK_THROWS_AS(normalized_edit_distance(truth, SymmetricMatrix::identity(4)), EmptyTruthSupport);
}

TEST_CASE("overall_precision_error examples") {
  const auto m = chain_model({0.06, 0.04, 0.03}, -0.01);
  CHECK(overall_precision_error(m.j_markov, m.sigma_residual, m) < 1e-12);
  CHECK(overall_precision_error(m.j_markov, SymmetricMatrix::zero(4), m) > 0.0);

  SolverConfig cfg;
  cfg.lambda_off = m.lambda_star;
  const auto r = admm_solve(true_covariance(m), cfg);
  CHECK(overall_precision_error(r.j_hat, r.sigma_r_hat, m) <= 1e-6);

  MatrixXd huge = MatrixXd::Zero(4, 4);
  huge(0, 1) = huge(1, 0) = 10.0;
  CHECK_THROWS_AS(overall_precision_error(m.j_markov, SymmetricMatrix(huge), m), NotPositiveDefinite);
}

TEST_CASE("sign_consistency examples") {
  const auto truth = with_edges(4, {{0, 1}, {1, 2}});
  CHECK(sign_consistency(truth, truth));
  MatrixXd flipped = truth.dense();
  flipped(0, 1) = flipped(1, 0) = -0.3;
  CHECK_FALSE(sign_consistency(SymmetricMatrix(flipped), truth));
  CHECK_FALSE(sign_consistency(with_edges(4, {{0, 1}, {1, 2}, {2, 3}}), truth));
  CHECK_THROWS_AS(sign_consistency(truth, SymmetricMatrix::identity(2)), DimensionMismatch);
}

TEST_CASE("edit_distance is a metric on supports") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto a = random_sparse(6, seed), b = random_sparse(6, seed + 100),
               c = random_sparse(6, seed + 200);
    CHECK(edit_distance(a, b) == edit_distance(b, a));
    CHECK(edit_distance(a, a) == 0);
    CHECK(edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c));
    if (edit_distance(a, b) == 0) CHECK(brute_support(a.dense(), 1e-6) == brute_support(b.dense(), 1e-6));
    // rescaling matrix and threshold together leaves supports unchanged
    const double k = 3.5;
    CHECK(edit_distance(k * a, k * b, k * kSupportThreshold) == edit_distance(a, b));
  }
}

TEST_CASE("metrics agree with explicit entry loops for p <= 5") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Index p = 2 + static_cast<Index>(seed % 4);
    const auto a = random_sparse(p, seed), b = random_sparse(p, seed + 50);
    CHECK(edit_distance(a, b) == brute_edit(a.dense(), b.dense(), kSupportThreshold));
    CHECK(support_of(a).size() == brute_support(a.dense(), kSupportThreshold).size());
    const auto sb = brute_support(b.dense(), kSupportThreshold);
    if (!sb.empty()) {
      CHECK(normalized_edit_distance(a, b) ==
            doctest::Approx(static_cast<double>(brute_edit(a.dense(), b.dense(), kSupportThreshold)) /
                            static_cast<double>(sb.size())));
    }
    bool consistent = brute_support(a.dense(), kSupportThreshold) == sb;
    for (const auto& [i, j] : sb) consistent = consistent && (a(i, j) > 0) == (b(i, j) > 0);
    CHECK(sign_consistency(a, b) == consistent);
  }
}

TEST_CASE("evaluate on an exact recovery") {
  const auto m = chain_model({0.06, 0.04, 0.03}, -0.01);
  const auto rec = evaluate(m.j_markov, m.sigma_residual, m);
  CHECK(rec.edit_distance_markov == 0);
  CHECK(rec.edit_distance_residual == 0);
  CHECK(rec.normalized_edit_markov == 0.0);
  CHECK(rec.normalized_edit_residual == 0.0);
  CHECK(rec.linf_error_j == 0.0);
  CHECK(rec.linf_error_r == 0.0);
  CHECK(rec.linf_error_precision_overall < 1e-12);
  CHECK(rec.spectral_error_sigma < 1e-12);
  CHECK(rec.sign_consistent_j);
  CHECK(rec.sign_consistent_r);

  const auto l1 = evaluate(m.j_markov, SymmetricMatrix::zero(4), m);
  CHECK(l1.edit_distance_residual == 1);
  CHECK_FALSE(l1.sign_consistent_r);

  DecompositionModel plain;
  plain.j_markov = with_edges(3, {{0, 1}});
  plain.sigma_residual = SymmetricMatrix::zero(3);
  plain.lambda_star = 0.3;
  CHECK(std::isnan(evaluate(plain.j_markov, plain.sigma_residual, plain).normalized_edit_residual));
}
