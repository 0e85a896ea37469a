#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cdecomp/errors.hpp"
#include "cdecomp/symmat.hpp"

namespace cdecomp {

/// Tie tolerance for |J_ij| == lambda* on exactly constructed ground truth.
inline constexpr double kGroundTruthTieTolerance = 1e-9;

struct GeneratorInfo {
  std::string name = "user";
  std::uint64_t seed = 0;
  std::map<std::string, double> params;
};

/// Ground truth Sigma* = J_M^{-1} - Sigma_R. Plain data: use validate_model to
/// check the identifiability conditions.
struct DecompositionModel {
  SymmetricMatrix j_markov;
  SymmetricMatrix sigma_residual;
  double lambda_star = 0.0;
  Eigen::VectorXd mean;  // empty means zero
  GeneratorInfo generator;

  Index dim() const { return j_markov.dim(); }
  Eigen::VectorXd mean_or_zero() const;
};

enum class Condition {
  MarkovPositiveDefinite,   // J_M > 0
  OverallPositiveDefinite,  // Sigma* > 0
  OffDiagonalBound,         // |J_ij| <= lambda*
  ResidualDiagonalZero,     // diag(Sigma_R) = 0
  ResidualSupport,          // Sigma_R,ij != 0 <=> |J_ij| = lambda*
  SignAgreement,            // sign(Sigma_R,ij) = sign(J_ij)
};

const char* condition_name(Condition c);

struct ConditionViolation {
  Condition condition;
  Index row = -1;  // -1 for whole-matrix conditions
  Index col = -1;
  std::string detail;
};

/// Raised by generators whose output fails validate_model.
class InvalidModel : public PreconditionViolated {
 public:
  explicit InvalidModel(std::vector<ConditionViolation> violations);
  const std::vector<ConditionViolation>& violations() const { return violations_; }

 private:
  std::vector<ConditionViolation> violations_;
};

/// Every violated condition with its offending pair (unordered pairs i < j
/// reported once). Empty iff all conditions hold within eps_tie.
std::vector<ConditionViolation> validate_model(const DecompositionModel& m,
                                               double eps_tie = kGroundTruthTieTolerance);

/// 4-node Markov chain with unit variances and neighbour correlations rho,
/// plus one residual edge at (0,1). Requires |rho[0]| strictly largest.
DecompositionModel chain_model(const std::array<double, 3>& rho, double residual_value);

struct GridOptions {
  double clip_fraction = 0.2;
  double magnitude_lo = 0.15;
  double magnitude_hi = 0.2;  // also lambda*
  double residual_lo = 0.15;
  double residual_hi = 0.2;
  double pd_margin = 0.01;
  double boost_start = 1.0;
  int max_residual_shrinks = 50;
};

/// q x q 4-nearest-neighbour grid Markov model with residuals on a random
/// clip_fraction of its edges. Deterministic in (q, seed, options).
DecompositionModel grid_model(int q, std::uint64_t seed, const GridOptions& options = {});

/// Sigma* = J_M^{-1} - Sigma_R. Throws NotPositiveDefinite on a corrupted model.
SymmetricMatrix true_covariance(const DecompositionModel& m);

/// {S_R, S, S_M^c} over ordered pairs, with S_M = diagonal plus Markov edges.
struct EdgePartition {
  PairIndexSet residual;      // S_R
  PairIndexSet markov_only;   // S = S_M \ S_R
  PairIndexSet non_edges;     // S_M^c
  Index max_degree = 0;       // d, counting the diagonal
};

EdgePartition partition_pairs(const DecompositionModel& m);

struct IncoherenceReport {
  double alpha = 0.0;
  double incoherence_cross = 0.0;  // |||G_{Mc,S} G_SS^{-1} G_{S,R} - G_{Mc,R}|||
  double incoherence_markov = 0.0; // |||G_{Mc,S} G_SS^{-1}|||
  double k_ss = 0.0;
  double k_ssr = 0.0;
  double k_m = 0.0;
  double m_param = 0.0;
  Index max_degree = 0;
  bool a4_satisfied = false;
  bool a5_satisfied = false;
  double a5_bound = 0.0;
  double a6_margin = 0.0;
};

IncoherenceReport incoherence_report(const DecompositionModel& m, double m_param, double tau,
                                     Index n, double c6 = 1.0, double c7 = 1.0);

}  // namespace cdecomp
