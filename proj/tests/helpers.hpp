#pragma once

#include <cstdint>

#include <doctest.h>

#include "cdecomp/model.hpp"
#include "cdecomp/rng.hpp"
#include "cdecomp/sampling.hpp"
#include "cdecomp/solver.hpp"
#include "cdecomp/symmat.hpp"

namespace testing {

using cdecomp::Index;

inline Eigen::MatrixXd random_matrix(Index rows, Index cols, std::uint64_t seed) {
  cdecomp::CounterRng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

/// A A^T / p + shift I, comfortably positive definite.
inline cdecomp::SymmetricMatrix random_spd(Index p, std::uint64_t seed, double shift = 0.5) {
  const Eigen::MatrixXd a = random_matrix(p, p, seed);
  return cdecomp::SymmetricMatrix(a * a.transpose() / static_cast<double>(p) +
                                  shift * Eigen::MatrixXd::Identity(p, p));
}

/// Sample covariance of n draws from N(0, random_spd(p)).
inline cdecomp::SymmetricMatrix random_sample_covariance(Index p, Index n, std::uint64_t seed) {
  cdecomp::DecompositionModel m;
  m.j_markov = cdecomp::inverse_pd(random_spd(p, seed));
  m.sigma_residual = cdecomp::SymmetricMatrix::zero(p);
  m.lambda_star = 1.0;
  return cdecomp::sample_covariance(cdecomp::draw_samples(m, n, seed + 1));
}

/// Every converged solve must carry a tight certificate.
inline void check_certificate(const cdecomp::SolveResult& r) {
  if (!r.converged) return;
  CHECK(r.kkt_residual <= 1e-6);
  CHECK(std::abs(r.duality_gap) <= 1e-6);
}

}  // namespace testing
