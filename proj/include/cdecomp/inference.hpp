#pragma once

#include <vector>

#include "cdecomp/symmat.hpp"

namespace cdecomp {

/// Gaussian density proportional to exp(-x^T J x / 2 + h^T x).
struct InfoModel {
  SymmetricMatrix j;
  Eigen::VectorXd h;
};

struct Moments {
  Eigen::VectorXd mean;
  Eigen::VectorXd variances;
};

/// mean = J^{-1} h, variances = diag(J^{-1}).
Moments exact_moments(const InfoModel& m);

/// Spectral norm of the absolute partial-correlation matrix
/// R_ij = |J_ij| / sqrt(J_ii J_jj), zero diagonal. Walk-summable iff < 1.
double walk_summability(const SymmetricMatrix& j);

/// The matrix whose spectral norm walk_summability returns.
Eigen::MatrixXd abs_partial_correlation(const SymmetricMatrix& j);

enum class LbpStatus { Converged, MaxIterations, Diverged };

struct LbpTrace {
  std::vector<double> mean_errors;  // per iteration, average |mu_hat_i - mu_i|
  std::vector<double> var_errors;   // per iteration, average |var_hat_i - var_i|
  bool converged = false;
  int iterations_run = 0;
  LbpStatus status = LbpStatus::MaxIterations;
  Eigen::VectorXd mean;       // BP estimates at the last iteration
  Eigen::VectorXd variances;
};

struct LbpOptions {
  int max_iter = 1000;
  double tol = 1e-10;
  double damping = 0.0;
  /// Raise MessagePrecisionNonpositive instead of returning a diverged trace.
  bool throw_on_divergence = false;
};

/// Synchronous Gaussian BP with information-form messages initialised to
/// zero. Converged when the max change of all messages falls below tol. A
/// nonpositive cavity precision or a message above 1e12 stops the run as
/// diverged; the iteration that diverged is not recorded.
LbpTrace lbp_run(const InfoModel& m, const LbpOptions& options = {});

}  // namespace cdecomp
