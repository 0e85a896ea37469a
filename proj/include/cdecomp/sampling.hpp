#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cdecomp/model.hpp"
#include "cdecomp/symmat.hpp"

namespace cdecomp {

/// n x p observations, one per row.
struct SampleSet {
  Eigen::MatrixXd data;
  std::uint64_t seed = 0;
  std::string provenance;
  std::vector<std::string> column_names;

  Index n() const { return data.rows(); }
  Index p() const { return data.cols(); }
};

/// Rows are mean + L z with L L^T = Sigma* and z standard normal drawn from
/// CounterRng(seed) in row-major order. Bitwise reproducible per seed.
SampleSet draw_samples(const DecompositionModel& m, Index n, std::uint64_t seed);

/// (1/n) sum_k x_k x_k^T, without centering (zero-mean convention).
SymmetricMatrix sample_covariance(const SampleSet& s);

/// (1/n) sum_k (x_k - xbar)(x_k - xbar)^T, for data that is not zero-mean.
SymmetricMatrix sample_covariance_centered(const SampleSet& s);

/// gamma = c_gamma * sqrt(ln p / n). Takes reals so the schedule can be
/// evaluated off the integer lattice.
double gamma_schedule(double c_gamma, double p, double n);

/// Inverse Gaussian tail function delta(r; n) = sqrt(2 q^2 log(4 r) / n).
double gaussian_tail_delta(double q, double r, Index n);

}  // namespace cdecomp
