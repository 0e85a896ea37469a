#pragma once

// Experiment drivers behind the command-line tool: sweeps, exact
// decomposition checks, LBP studies, data ingestion and graph export.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdecomp/inference.hpp"
#include "cdecomp/metrics.hpp"
#include "cdecomp/model.hpp"
#include "cdecomp/sampling.hpp"
#include "cdecomp/solver.hpp"

namespace cdecomp {

namespace fs = std::filesystem;

/// How the l_inf cap is chosen for each solve.
///   fixed:v        lambda = v
///   lambda_star    lambda = lambda* of the model
///   inf            lambda = +inf (plain l1 penalized likelihood)
///   zero           lambda = 1e-6
///   inflated:c2    lambda = lambda* + c2 sqrt(log p / n)
///   scaled:c       lambda = c lambda*
struct LambdaPolicy {
  enum class Kind { Fixed, LambdaStar, Infinite, NearZero, Inflated, Scaled };
  Kind kind = Kind::LambdaStar;
  double value = 0.0;

  static LambdaPolicy parse(const std::string& text);
  std::string to_string() const;
  double resolve(const DecompositionModel* m, double p, double n) const;
};

inline constexpr double kNearZeroLambda = 1e-6;

struct ExperimentSpec {
  std::string mode = "sweep";

  // Model family. "grid" uses sizes as q; "chain" uses chain_rhos.
  std::string generator = "grid";
  std::vector<int> sizes{5};
  GridOptions grid;
  std::vector<std::array<double, 3>> chain_rhos{{0.06, 0.04, 0.03}};
  double chain_residual_magnitude = 0.01;  // sign follows J_M[0][1]
  std::uint64_t seed = 1;
  int trials = 1;
  bool fresh_models = false;  // new model per (p, n, trial) instead of per (p, trial)

  // Sample sizes: explicit list, or n = ceil(r log p) for each r.
  std::vector<Index> sample_sizes;
  std::vector<double> n_over_log_p;

  // c_gamma applied to every size, unless a size-specific value exists.
  std::vector<double> c_gamma{2.0};
  std::map<Index, double> c_gamma_by_p;
  std::optional<double> gamma;  // fit: explicit gamma wins over the schedule
  LambdaPolicy lambda;
  SolverConfig solver;
  double support_threshold = kSupportThreshold;
  bool centered = false;

  // fit / ingest inputs
  fs::path data_path;
  fs::path model_dir;
  bool exact_statistics = false;

  // lbp study
  int lbp_models = 20;
  double lbp_clip_fraction = 0.5;
  LbpOptions lbp;

  fs::path output_dir = "out";
  int threads = 0;  // 0 keeps the OpenMP default

  /// Throws PreconditionViolated naming the offending field.
  void validate() const;
  std::vector<Index> sample_sizes_for(Index p) const;
  std::vector<double> c_gamma_for(Index p) const;
};

ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentSpec& s);

// Sweep

struct SweepRow {
  Index p = 0;
  Index n = 0;
  int trial = 0;
  double c_gamma = 0.0;
  double lambda = 0.0;
  MetricsRecord metrics;
  int iterations = 0;
  bool converged = false;
  double n_over_log_p = 0.0;
  double kkt_residual = 0.0;
  double duality_gap = 0.0;
  std::string error;  // nonempty when the cell failed
};

struct SweepOutput {
  std::vector<SweepRow> rows;  // sorted by (p, c_gamma, n, trial)
  nlohmann::json summary;      // per-(p, c_gamma, n) means
};

/// Bound used when re-checking converged rows before they are emitted.
inline constexpr double kEmissionKktBound = 1e-6;

SweepOutput run_sweep(const ExperimentSpec& spec);
std::string sweep_csv(const SweepOutput& out);
void write_sweep(const fs::path& dir, const SweepOutput& out);

/// Models used by run_sweep for size p and trial t (and n when fresh).
DecompositionModel sweep_model(const ExperimentSpec& spec, Index size, int trial, Index n = 0);
/// Sample seed run_sweep uses for the same cell.
std::uint64_t sweep_sample_seed(const ExperimentSpec& spec, Index size, int trial, Index n);

// Exact decomposition

struct ExactCase {
  std::string name;
  Index p = 0;
  double lambda = 0.0;
  double error_j = 0.0;
  double error_r = 0.0;
  double kkt_residual = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  bool pass = false;
};

inline constexpr double kExactTolerance = 1e-6;

/// Solve with exact Sigma*, gamma = 0 and the policy lambda; pass iff both
/// components are within kExactTolerance.
ExactCase exact_decomposition_case(const std::string& name, const DecompositionModel& m,
                                   const LambdaPolicy& policy, const SolverConfig& base);
std::vector<ExactCase> run_exact_decomposition(const ExperimentSpec& spec);
nlohmann::json exact_report_json(const std::vector<ExactCase>& cases);

// LBP study

struct LbpStudyRecord {
  int model = 0;
  std::uint64_t seed = 0;
  double walk_markov = 0.0;   // of J_M*
  double walk_overall = 0.0;  // of J* = Sigma*^{-1}
  LbpTrace markov;
  LbpTrace overall;
};

/// Grid models with the configured residual fraction, random means in [0, 1]
/// and h = J mu; LBP on both J_M* and J*.
std::vector<LbpStudyRecord> run_lbp_study(const ExperimentSpec& spec);
nlohmann::json lbp_summary_json(const std::vector<LbpStudyRecord>& records);

// Data and graphs

SampleSet ingest_csv(const fs::path& path);
nlohmann::json dataset_summary_json(const SampleSet& s);

/// Two weighted edge lists (markov from J_hat, residual from Sigma_R_hat),
/// keeping entries with |weight| > threshold.
nlohmann::json export_graphs(const SolveResult& result, const std::vector<std::string>& names,
                             double threshold = kSupportThreshold);

/// Resolved regularization for a fit of the given covariance.
SolverConfig fit_config(const ExperimentSpec& spec, const DecompositionModel* model, Index p, Index n);

}  // namespace cdecomp
