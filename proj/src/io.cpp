#include "cdecomp/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cdecomp/errors.hpp"

namespace cdecomp::io {

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw NonNumericCell(row, col, cell);
  }
  return v;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedCsv("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

// Parses lines[first..] as a rectangular numeric block; errors name the
// 1-based file line.
Eigen::MatrixXd parse_block(const std::vector<std::string>& lines, std::size_t first,
                            std::size_t width, const fs::path& path) {
  const auto rows = static_cast<Index>(lines.size() - first);
  Eigen::MatrixXd m(rows, static_cast<Index>(width));
  for (std::size_t r = first; r < lines.size(); ++r) {
    const auto cells = split(lines[r]);
    if (cells.size() != width) {
      throw MalformedCsv(path.string() + ": row " + std::to_string(r + 1) + " has " +
                         std::to_string(cells.size()) + " cells, expected " + std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      m(static_cast<Index>(r - first), static_cast<Index>(c)) = parse_cell(cells[c], r + 1, c + 1);
    }
  }
  return m;
}

void write_rows(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

nlohmann::json pairs_json(const std::vector<IndexPair>& pairs) {
  auto arr = nlohmann::json::array();
  for (const auto& pr : pairs) arr.push_back({pr.row, pr.col});
  return arr;
}

// JSON has no infinity; lambda = +inf is written as the string "inf".
nlohmann::json real(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return nullptr;
  return x;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path);
  write_rows(out, m);
}

SymmetricMatrix read_matrix_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw MalformedCsv(path.string() + ": empty matrix file");
  const std::size_t width = split(lines.front()).size();
  Eigen::MatrixXd m = parse_block(lines, 0, width, path);
  if (m.rows() != m.cols()) {
    throw MalformedCsv(path.string() + ": matrix is " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + ", expected square");
  }
  return SymmetricMatrix(m);
}

Table read_table_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw MalformedCsv(path.string() + ": empty file");
  Table t;
  t.header = split(lines.front());
  if (t.header.empty() || (t.header.size() == 1 && t.header[0].empty())) {
    throw MalformedCsv(path.string() + ": empty header");
  }
  if (lines.size() < 2) throw MalformedCsv(path.string() + ": no data rows");
  t.values = parse_block(lines, 1, t.header.size(), path);
  return t;
}

void write_table_csv(const fs::path& path, const std::vector<std::string>& header,
                     const Eigen::MatrixXd& values) {
  auto out = open_out(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  write_rows(out, values);
}

nlohmann::json to_json(const GeneratorInfo& g) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : g.params) params[k] = real(v);
  return {{"name", g.name}, {"seed", g.seed}, {"params", params}};
}

GeneratorInfo generator_from_json(const nlohmann::json& j) {
  GeneratorInfo g;
  g.name = j.value("name", std::string("user"));
  g.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("params")) {
    for (const auto& [k, v] : j.at("params").items()) {
      if (v.is_number()) g.params[k] = v.get<double>();
    }
  }
  return g;
}

void write_model(const fs::path& dir, const DecompositionModel& m) {
  fs::create_directories(dir);
  write_matrix_csv(dir / "j_markov.csv", m.j_markov.dense());
  write_matrix_csv(dir / "sigma_residual.csv", m.sigma_residual.dense());
  nlohmann::json meta = {{"schema_version", kSchemaVersion},
                         {"p", m.dim()},
                         {"lambda_star", m.lambda_star},
                         {"generator", to_json(m.generator)}};
  if (m.mean.size() > 0) meta["mean"] = std::vector<double>(m.mean.begin(), m.mean.end());
  write_json(dir / "meta.json", meta);
}

DecompositionModel read_model(const fs::path& dir) {
  DecompositionModel m;
  m.j_markov = read_matrix_csv(dir / "j_markov.csv");
  m.sigma_residual = read_matrix_csv(dir / "sigma_residual.csv");
  const auto meta = read_json(dir / "meta.json");
  m.lambda_star = meta.at("lambda_star").get<double>();
  if (meta.contains("generator")) m.generator = generator_from_json(meta.at("generator"));
  if (meta.contains("mean")) {
    const auto v = meta.at("mean").get<std::vector<double>>();
    m.mean = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
  }
  if (m.sigma_residual.dim() != m.j_markov.dim()) {
    throw DimensionMismatch("model files disagree on the dimension");
  }
  return m;
}

void write_samples(const fs::path& dir, const SampleSet& s) {
  fs::create_directories(dir);
  std::vector<std::string> header = s.column_names;
  if (header.empty()) {
    for (Index i = 0; i < s.p(); ++i) header.push_back("x" + std::to_string(i));
  }
  write_table_csv(dir / "samples.csv", header, s.data);
  write_json(dir / "meta.json", {{"schema_version", kSchemaVersion},
                                    {"n", s.n()},
                                    {"p", s.p()},
                                    {"seed", s.seed},
                                    {"provenance", s.provenance}});
}

nlohmann::json diagnostics_json(const SolveResult& r, const SolverConfig& cfg) {
  return {{"schema_version", kSchemaVersion},
          {"p", r.j_hat.dim()},
          {"duality_gap", real(r.duality_gap)},
          {"kkt_residual", real(r.kkt_residual)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"overall_pd", r.overall_pd},
          {"min_eig_overall", real(r.min_eig_overall)},
          {"objective", real(r.objective)},
          {"primal_residual", real(r.primal_residual)},
          {"dual_residual", real(r.dual_residual)},
          {"rho_final", real(r.rho_final)},
          {"clip_set", pairs_json(r.clip_set)},
          {"sign_conflicts", pairs_json(r.sign_conflicts)},
          {"config",
           {{"gamma", real(cfg.gamma)},
            {"lambda_off", real(cfg.lambda_off)},
            {"lambda_on", real(cfg.lambda_on)},
            {"rho_admm", real(cfg.rho_admm)},
            {"max_iter", cfg.max_iter},
            {"eps_abs", real(cfg.eps_abs)},
            {"eps_rel", real(cfg.eps_rel)},
            {"eps_tie", real(cfg.tie_tolerance())}}}};
}

void write_solve_result(const fs::path& dir, const SolveResult& r, const SolverConfig& cfg) {
  fs::create_directories(dir);
  write_matrix_csv(dir / "j_hat.csv", r.j_hat.dense());
  write_matrix_csv(dir / "sigma_r.csv", r.sigma_r_hat.dense());
  write_json(dir / "diagnostics.json", diagnostics_json(r, cfg));
}

void write_lbp_trace(const fs::path& path, const LbpTrace& t) {
  auto out = open_out(path);
  out << "iteration,mean_error,var_error\n";
  for (std::size_t k = 0; k < t.mean_errors.size(); ++k) {
    out << k + 1 << ',' << format_double(t.mean_errors[k]) << ','
        << format_double(t.var_errors[k]) << '\n';
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace cdecomp::io
