#pragma once

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "cdecomp/symmat.hpp"

namespace cdecomp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Regularization and ADMM controls for
///   min_J <S, J> - log det J + gamma ||J||_1,off
///   s.t. |J_ij| <= lambda_off (i != j),  |J_ii| <= lambda_on.
struct SolverConfig {
  double gamma = 0.0;
  double lambda_off = kInf;
  double lambda_on = kInf;
  double rho_admm = 1.0;
  int max_iter = 5000;
  double eps_abs = 1e-10;
  double eps_rel = 1e-8;
  /// Clip band |J_ij| >= lambda_off - eps_tie. Defaults to 1e-4 * lambda_off.
  std::optional<double> eps_tie;
  bool adapt_rho = true;
  bool record_trace = false;

  double tie_tolerance() const;
  double tie_tolerance_diag() const;
  /// Throws PreconditionViolated when a field is out of range.
  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double rho = 0.0;
};

struct SolveResult {
  SymmetricMatrix j_hat;        // J_M estimate, positive definite
  SymmetricMatrix sigma_m_hat;  // j_hat^{-1}
  SymmetricMatrix sigma_r_hat;  // residual covariance from the box multipliers
  SymmetricMatrix z_gamma;      // subgradient of ||.||_1,off at j_hat
  double kkt_residual = kInf;
  double duality_gap = kInf;
  int iterations = 0;
  bool converged = false;
  bool overall_pd = false;
  double min_eig_overall = 0.0;

  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double rho_final = 0.0;
  double objective = 0.0;
  std::vector<IndexPair> clip_set;        // active box constraints, i <= j
  std::vector<IndexPair> sign_conflicts;  // multipliers zeroed for sign noise
  std::vector<IterationRecord> trace;
};

/// ADMM over the consensus split J = Z. Returns the last iterate with
/// converged = false when max_iter is reached. A warm start seeds both the
/// primal iterate and the dual variable from J0.
SolveResult admm_solve(const SymmetricMatrix& sigma_hat, const SolverConfig& cfg,
                       const std::optional<SymmetricMatrix>& warm_start = std::nullopt);

/// Entries of the l1 subgradient: sign(J_ij) where |J_ij| > 1e-8, otherwise
/// the value in [-1, 1] that best closes stationarity. Zero diagonal.
SymmetricMatrix subgradient_certificate(const SymmetricMatrix& j_hat,
                                        const SymmetricMatrix& sigma_m_hat,
                                        const SymmetricMatrix& sigma_hat, double gamma);

struct ResidualExtraction {
  SymmetricMatrix sigma_r;
  std::vector<IndexPair> clip_set;
  std::vector<IndexPair> sign_conflicts;
};

/// Sigma_R = (J^{-1} - S - gamma Z)_ij on the clip set, zero elsewhere.
/// Entries whose sign opposes J are zeroed; those larger than 1e-8 are flagged.
ResidualExtraction extract_residual(const SymmetricMatrix& j_hat, const SymmetricMatrix& sigma_hat,
                                    const SymmetricMatrix& z_gamma, const SolverConfig& cfg);

/// max |S - J^{-1} + Sigma_R + gamma Z| over all entries.
double kkt_residual(const SymmetricMatrix& sigma_hat, const SymmetricMatrix& sigma_m_hat,
                    const SymmetricMatrix& sigma_r_hat, const SymmetricMatrix& z_gamma,
                    double gamma);

/// <S, J> - log det J + gamma ||J||_1,off.
double primal_objective(const SymmetricMatrix& sigma_hat, const SymmetricMatrix& j, double gamma);

double duality_gap(const SolveResult& result, const SymmetricMatrix& sigma_hat,
                   const SolverConfig& cfg);

struct SoftThresholdResult {
  SymmetricMatrix sigma_estimate;
  SymmetricMatrix sigma_r;
};

/// Off-diagonal negative soft threshold sign(-x)(|x| - gamma)_+ of S.
SoftThresholdResult soft_threshold_covariance(const SymmetricMatrix& sigma_hat, double gamma);

/// Same objective with J fixed to 0 off s_m and to lambda_off * sign on s_r,
/// unconstrained elsewhere. The residual on s_r comes from the equality
/// multipliers and keeps its sign. `signs` supplies sign(J*) on s_r.
SolveResult witness_solve(const SymmetricMatrix& sigma_hat, const PairIndexSet& s_m,
                          const PairIndexSet& s_r, const SymmetricMatrix& signs,
                          const SolverConfig& cfg);

/// lambda_min(Sigma_M - Sigma_R); stores the result into `result`.
std::pair<bool, double> post_check_overall_pd(SolveResult& result);

}  // namespace cdecomp
