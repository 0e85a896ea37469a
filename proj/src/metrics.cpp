#include "cdecomp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>

#include "cdecomp/errors.hpp"

namespace cdecomp {

namespace {

void require_same_dim(const SymmetricMatrix& a, const SymmetricMatrix& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()));
  }
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

PairIndexSet support_of(const SymmetricMatrix& m, double threshold) {
  if (!(threshold >= 0.0)) throw PreconditionViolated("support threshold must be >= 0");
  std::vector<IndexPair> pairs;
  for (Index i = 0; i < m.dim(); ++i)
    for (Index j = i + 1; j < m.dim(); ++j)
      if (std::abs(m(i, j)) > threshold) pairs.push_back({i, j});
  return PairIndexSet(m.dim(), std::move(pairs));
}

Index edit_distance(const SymmetricMatrix& a, const SymmetricMatrix& b, double threshold) {
  require_same_dim(a, b, "edit_distance");
  const auto sa = support_of(a, threshold);
  const auto sb = support_of(b, threshold);
  std::vector<IndexPair> diff;
  std::set_symmetric_difference(sa.begin(), sa.end(), sb.begin(), sb.end(),
                                std::back_inserter(diff));
  return static_cast<Index>(diff.size());
}

double normalized_edit_distance(const SymmetricMatrix& est, const SymmetricMatrix& truth,
                                double threshold) {
  require_same_dim(est, truth, "normalized_edit_distance");
  const auto st = support_of(truth, threshold);
  if (st.empty()) throw EmptyTruthSupport("truth matrix has no off-diagonal support");
  return static_cast<double>(edit_distance(est, truth, threshold)) / static_cast<double>(st.size());
}

double overall_precision_error(const SymmetricMatrix& j_hat, const SymmetricMatrix& sigma_r_hat,
                               const DecompositionModel& truth) {
  require_same_dim(j_hat, sigma_r_hat, "overall_precision_error");
  require_same_dim(j_hat, truth.j_markov, "overall_precision_error");
  const SymmetricMatrix est = inverse_pd(inverse_pd(j_hat) - sigma_r_hat);
  const SymmetricMatrix star = inverse_pd(true_covariance(truth));
  return max_abs_entry(est.dense() - star.dense());
}

bool sign_consistency(const SymmetricMatrix& est, const SymmetricMatrix& truth, double threshold) {
  require_same_dim(est, truth, "sign_consistency");
  const auto se = support_of(est, threshold);
  if (se.pairs() != support_of(truth, threshold).pairs()) return false;
  return std::all_of(se.begin(), se.end(), [&](const IndexPair& pr) {
    return sign_of(est(pr.row, pr.col)) == sign_of(truth(pr.row, pr.col));
  });
}

MetricsRecord evaluate(const SymmetricMatrix& j_hat, const SymmetricMatrix& sigma_r_hat,
                       const DecompositionModel& truth, double threshold) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  MetricsRecord r;
  r.edit_distance_markov = edit_distance(j_hat, truth.j_markov, threshold);
  r.edit_distance_residual = edit_distance(sigma_r_hat, truth.sigma_residual, threshold);
  const auto normalized = [&](const SymmetricMatrix& est, const SymmetricMatrix& t) {
    return support_of(t, threshold).empty() ? nan : normalized_edit_distance(est, t, threshold);
  };
  r.normalized_edit_markov = normalized(j_hat, truth.j_markov);
  r.normalized_edit_residual = normalized(sigma_r_hat, truth.sigma_residual);
  r.linf_error_j = max_abs_entry(j_hat.dense() - truth.j_markov.dense());
  r.linf_error_r = max_abs_entry(sigma_r_hat.dense() - truth.sigma_residual.dense());

  const SymmetricMatrix sigma_hat_overall = inverse_pd(j_hat) - sigma_r_hat;
  if (is_positive_definite(sigma_hat_overall)) {
    r.linf_error_precision_overall = overall_precision_error(j_hat, sigma_r_hat, truth);
    r.spectral_error_sigma = spectral_norm(sigma_hat_overall - true_covariance(truth));
  } else {
    r.linf_error_precision_overall = nan;
    r.spectral_error_sigma = nan;
  }
  r.sign_consistent_r = sign_consistency(sigma_r_hat, truth.sigma_residual, threshold);
  r.sign_consistent_j = sign_consistency(j_hat, truth.j_markov, threshold);
  return r;
}

}  // namespace cdecomp
