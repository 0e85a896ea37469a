#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdecomp/inference.hpp"
#include "cdecomp/model.hpp"
#include "cdecomp/sampling.hpp"
#include "cdecomp/solver.hpp"

namespace cdecomp::io {

namespace fs = std::filesystem;

/// Version tag written into every JSON document and CSV header line.
inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "cdecomp 1.0";

/// Headerless square CSV, full round-trip precision.
void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m);
/// Parses and symmetrizes. Throws MalformedCsv or NonNumericCell.
SymmetricMatrix read_matrix_csv(const fs::path& path);

/// Numeric table with a header row of column names.
struct Table {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};
/// Throws MalformedCsv (empty, ragged, no data rows) or NonNumericCell.
Table read_table_csv(const fs::path& path);
void write_table_csv(const fs::path& path, const std::vector<std::string>& header,
                     const Eigen::MatrixXd& values);

nlohmann::json to_json(const GeneratorInfo& g);
GeneratorInfo generator_from_json(const nlohmann::json& j);

/// Directory with j_markov.csv, sigma_residual.csv and meta.json.
void write_model(const fs::path& dir, const DecompositionModel& m);
DecompositionModel read_model(const fs::path& dir);

/// samples.csv (header x0..x{p-1} unless names are set) plus meta.json.
void write_samples(const fs::path& dir, const SampleSet& s);

/// j_hat.csv, sigma_r.csv and diagnostics.json.
nlohmann::json diagnostics_json(const SolveResult& r, const SolverConfig& cfg);
void write_solve_result(const fs::path& dir, const SolveResult& r, const SolverConfig& cfg);

/// iteration, mean_error, var_error rows.
void write_lbp_trace(const fs::path& path, const LbpTrace& t);

void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

/// "%.17g": shortest text that reads back to the same double.
std::string format_double(double x);

}  // namespace cdecomp::io
