#pragma once

#include "cdecomp/model.hpp"
#include "cdecomp/symmat.hpp"

namespace cdecomp {

/// Support threshold for estimated matrices. ADMM leaves exact zeros in the
/// returned iterate, so any positive value well below the signal works.
inline constexpr double kSupportThreshold = 1e-6;

/// Unordered off-diagonal pairs (i < j) with |m_ij| > threshold.
PairIndexSet support_of(const SymmetricMatrix& m, double threshold = kSupportThreshold);

/// |supp(a) symmetric-difference supp(b)| over unordered pairs.
Index edit_distance(const SymmetricMatrix& a, const SymmetricMatrix& b,
                    double threshold = kSupportThreshold);

/// edit_distance(est, truth) / |supp(truth)|. Throws EmptyTruthSupport.
double normalized_edit_distance(const SymmetricMatrix& est, const SymmetricMatrix& truth,
                                double threshold = kSupportThreshold);

/// ||(J_hat^{-1} - Sigma_R_hat)^{-1} - Sigma*^{-1}||_max.
double overall_precision_error(const SymmetricMatrix& j_hat, const SymmetricMatrix& sigma_r_hat,
                               const DecompositionModel& truth);

/// Same support at `threshold` and equal signs on it.
bool sign_consistency(const SymmetricMatrix& est, const SymmetricMatrix& truth,
                      double threshold = kSupportThreshold);

struct MetricsRecord {
  Index edit_distance_markov = 0;
  Index edit_distance_residual = 0;
  double normalized_edit_markov = 0.0;
  double normalized_edit_residual = 0.0;
  double linf_error_j = 0.0;
  double linf_error_r = 0.0;
  double linf_error_precision_overall = 0.0;
  double spectral_error_sigma = 0.0;
  bool sign_consistent_r = false;
  bool sign_consistent_j = false;
};

/// All metrics of an estimate against the model it was sampled from. A
/// normalized distance whose truth support is empty is reported as NaN, and
/// overall errors are NaN when J_hat^{-1} - Sigma_R_hat is not positive definite.
MetricsRecord evaluate(const SymmetricMatrix& j_hat, const SymmetricMatrix& sigma_r_hat,
                       const DecompositionModel& truth, double threshold = kSupportThreshold);

}  // namespace cdecomp
