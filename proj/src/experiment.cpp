#include "cdecomp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <tuple>

#include <omp.h>

#include "cdecomp/errors.hpp"
#include "cdecomp/io.hpp"
#include "cdecomp/rng.hpp"

namespace cdecomp {

namespace {

// Path tags keep the derived seed streams of different purposes apart.
enum SeedTag : std::uint64_t { kModelTag = 1, kSampleTag = 2, kLbpTag = 3, kMeanTag = 4 };

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw PreconditionViolated("cannot parse " + what + " from '" + text + "'");
  }
}

std::string number_text(double x) {
  std::ostringstream ss;
  ss << x;
  return ss.str();
}

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

// LambdaPolicy

LambdaPolicy LambdaPolicy::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  LambdaPolicy p;
  if (head == "lambda_star" && arg.empty()) {
    p.kind = Kind::LambdaStar;
  } else if ((head == "inf" || head == "infinity") && arg.empty()) {
    p.kind = Kind::Infinite;
  } else if ((head == "zero" || head == "near_zero") && arg.empty()) {
    p.kind = Kind::NearZero;
  } else if (head == "fixed" && !arg.empty()) {
    p.kind = Kind::Fixed;
    p.value = parse_number(arg, "fixed lambda");
    if (!(p.value > 0.0)) throw PreconditionViolated("fixed lambda must be > 0");
  } else if (head == "inflated" && !arg.empty()) {
    p.kind = Kind::Inflated;
    p.value = parse_number(arg, "inflation constant");
  } else if (head == "scaled" && !arg.empty()) {
    p.kind = Kind::Scaled;
    p.value = parse_number(arg, "lambda scale");
    if (!(p.value > 0.0)) throw PreconditionViolated("lambda scale must be > 0");
  } else if (colon == std::string::npos) {
    // A bare number is a fixed value.
    p.kind = Kind::Fixed;
    p.value = parse_number(text, "lambda policy");
    if (!(p.value > 0.0)) throw PreconditionViolated("fixed lambda must be > 0");
  } else {
    throw PreconditionViolated("unknown lambda policy '" + text + "'");
  }
  return p;
}

std::string LambdaPolicy::to_string() const {
  switch (kind) {
    case Kind::Fixed: return "fixed:" + number_text(value);
    case Kind::LambdaStar: return "lambda_star";
    case Kind::Infinite: return "inf";
    case Kind::NearZero: return "zero";
    case Kind::Inflated: return "inflated:" + number_text(value);
    case Kind::Scaled: return "scaled:" + number_text(value);
  }
  return "lambda_star";
}

double LambdaPolicy::resolve(const DecompositionModel* m, double p, double n) const {
  const auto star = [&] {
    if (m == nullptr) throw PreconditionViolated("lambda policy " + to_string() + " needs a model");
    return m->lambda_star;
  };
  switch (kind) {
    case Kind::Fixed: return value;
    case Kind::LambdaStar: return star();
    case Kind::Infinite: return kInf;
    case Kind::NearZero: return kNearZeroLambda;
    case Kind::Inflated: return star() + value * std::sqrt(std::log(p) / n);
    case Kind::Scaled: return value * star();
  }
  return star();
}

// ExperimentSpec

void ExperimentSpec::validate() const {
  static const std::vector<std::string> modes{"generate", "fit", "sweep", "lbp", "ingest",
                                              "exactdecomp"};
  if (std::find(modes.begin(), modes.end(), mode) == modes.end()) {
    throw PreconditionViolated("unknown mode '" + mode + "'");
  }
  if (generator != "grid" && generator != "chain") {
    throw PreconditionViolated("generator must be grid or chain");
  }
  if (trials < 1) throw PreconditionViolated("trials must be >= 1");
  if (generator == "grid" && sizes.empty()) throw PreconditionViolated("sizes must not be empty");
  for (int q : sizes)
    if (q < 2) throw PreconditionViolated("grid sizes must be >= 2");
  for (Index n : sample_sizes)
    if (n < 1) throw PreconditionViolated("sample sizes must be >= 1");
  for (double r : n_over_log_p)
    if (!(r > 0.0)) throw PreconditionViolated("n_over_log_p entries must be > 0");
  for (double c : c_gamma)
    if (!(c > 0.0)) throw PreconditionViolated("c_gamma entries must be > 0");
  if (mode == "sweep" && sample_sizes.empty() && n_over_log_p.empty()) {
    throw PreconditionViolated("sweep needs sample_sizes or n_over_log_p");
  }
  if (mode == "sweep" && c_gamma.empty() && c_gamma_by_p.empty()) {
    throw PreconditionViolated("sweep needs c_gamma");
  }
  if (!(support_threshold >= 0.0)) throw PreconditionViolated("support_threshold must be >= 0");
  if (lbp_models < 1) throw PreconditionViolated("lbp models must be >= 1");
  solver.validate();
}

std::vector<Index> ExperimentSpec::sample_sizes_for(Index p) const {
  std::vector<Index> out = sample_sizes;
  for (double r : n_over_log_p) {
    out.push_back(static_cast<Index>(std::ceil(r * std::log(static_cast<double>(p)))));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> ExperimentSpec::c_gamma_for(Index p) const {
  const auto it = c_gamma_by_p.find(p);
  if (it != c_gamma_by_p.end()) return {it->second};
  return c_gamma;
}

namespace {

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

double json_real(const nlohmann::json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
    return parse_number(s, "number");
  }
  return v.get<double>();
}

nlohmann::json real_json(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return nullptr;
  return x;
}

const std::vector<std::string> kSpecKeys{
    "mode", "generator", "sizes", "grid", "chain_rhos", "chain_residual_magnitude", "seed",
    "trials", "fresh_models", "sample_sizes", "n_over_log_p", "c_gamma", "c_gamma_by_p",
    "gamma", "lambda", "solver", "support_threshold", "centered", "data", "model",
    "exact_statistics", "lbp", "output_dir", "threads"};

}  // namespace

ExperimentSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw PreconditionViolated("experiment config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key == "schema_version") continue;
    if (std::find(kSpecKeys.begin(), kSpecKeys.end(), key) == kSpecKeys.end()) {
      throw PreconditionViolated("unknown config key '" + key + "'");
    }
  }
  ExperimentSpec s;
  try {
    read_if(j, "mode", s.mode);
    read_if(j, "generator", s.generator);
    read_if(j, "sizes", s.sizes);
    read_if(j, "chain_rhos", s.chain_rhos);
    read_if(j, "chain_residual_magnitude", s.chain_residual_magnitude);
    read_if(j, "seed", s.seed);
    read_if(j, "trials", s.trials);
    read_if(j, "fresh_models", s.fresh_models);
    read_if(j, "sample_sizes", s.sample_sizes);
    read_if(j, "n_over_log_p", s.n_over_log_p);
    read_if(j, "c_gamma", s.c_gamma);
    if (j.contains("c_gamma_by_p")) {
      for (const auto& [k, v] : j.at("c_gamma_by_p").items()) {
        s.c_gamma_by_p[static_cast<Index>(parse_number(k, "c_gamma_by_p key"))] = v.get<double>();
      }
    }
    if (j.contains("gamma")) s.gamma = j.at("gamma").get<double>();
    if (j.contains("lambda")) s.lambda = LambdaPolicy::parse(j.at("lambda").get<std::string>());
    read_if(j, "support_threshold", s.support_threshold);
    read_if(j, "centered", s.centered);
    if (j.contains("data")) s.data_path = j.at("data").get<std::string>();
    if (j.contains("model")) s.model_dir = j.at("model").get<std::string>();
    read_if(j, "exact_statistics", s.exact_statistics);
    if (j.contains("output_dir")) s.output_dir = j.at("output_dir").get<std::string>();
    read_if(j, "threads", s.threads);

    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      read_if(g, "clip_fraction", s.grid.clip_fraction);
      read_if(g, "magnitude_lo", s.grid.magnitude_lo);
      read_if(g, "magnitude_hi", s.grid.magnitude_hi);
      read_if(g, "residual_lo", s.grid.residual_lo);
      read_if(g, "residual_hi", s.grid.residual_hi);
      read_if(g, "pd_margin", s.grid.pd_margin);
      read_if(g, "boost_start", s.grid.boost_start);
      read_if(g, "max_residual_shrinks", s.grid.max_residual_shrinks);
    }
    if (j.contains("solver")) {
      const auto& c = j.at("solver");
      if (c.contains("lambda_on")) s.solver.lambda_on = json_real(c.at("lambda_on"));
      read_if(c, "rho_admm", s.solver.rho_admm);
      read_if(c, "max_iter", s.solver.max_iter);
      read_if(c, "eps_abs", s.solver.eps_abs);
      read_if(c, "eps_rel", s.solver.eps_rel);
      if (c.contains("eps_tie")) s.solver.eps_tie = c.at("eps_tie").get<double>();
      read_if(c, "adapt_rho", s.solver.adapt_rho);
    }
    if (j.contains("lbp")) {
      const auto& l = j.at("lbp");
      read_if(l, "models", s.lbp_models);
      read_if(l, "clip_fraction", s.lbp_clip_fraction);
      read_if(l, "max_iter", s.lbp.max_iter);
      read_if(l, "tol", s.lbp.tol);
      read_if(l, "damping", s.lbp.damping);
    }
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionViolated(std::string("config: ") + e.what());
  }
  return s;
}

nlohmann::json to_json(const ExperimentSpec& s) {
  nlohmann::json by_p = nlohmann::json::object();
  for (const auto& [p, c] : s.c_gamma_by_p) by_p[std::to_string(p)] = c;
  nlohmann::json j = {
      {"schema_version", io::kSchemaVersion},
      {"mode", s.mode},
      {"generator", s.generator},
      {"sizes", s.sizes},
      {"grid",
       {{"clip_fraction", s.grid.clip_fraction},
        {"magnitude_lo", s.grid.magnitude_lo},
        {"magnitude_hi", s.grid.magnitude_hi},
        {"residual_lo", s.grid.residual_lo},
        {"residual_hi", s.grid.residual_hi},
        {"pd_margin", s.grid.pd_margin},
        {"boost_start", s.grid.boost_start},
        {"max_residual_shrinks", s.grid.max_residual_shrinks}}},
      {"chain_rhos", s.chain_rhos},
      {"chain_residual_magnitude", s.chain_residual_magnitude},
      {"seed", s.seed},
      {"trials", s.trials},
      {"fresh_models", s.fresh_models},
      {"sample_sizes", s.sample_sizes},
      {"n_over_log_p", s.n_over_log_p},
      {"c_gamma", s.c_gamma},
      {"c_gamma_by_p", by_p},
      {"lambda", s.lambda.to_string()},
      {"solver",
       {{"lambda_on", real_json(s.solver.lambda_on)},
        {"rho_admm", s.solver.rho_admm},
        {"max_iter", s.solver.max_iter},
        {"eps_abs", s.solver.eps_abs},
        {"eps_rel", s.solver.eps_rel},
        {"adapt_rho", s.solver.adapt_rho}}},
      {"support_threshold", s.support_threshold},
      {"centered", s.centered},
      {"exact_statistics", s.exact_statistics},
      {"lbp",
       {{"models", s.lbp_models},
        {"clip_fraction", s.lbp_clip_fraction},
        {"max_iter", s.lbp.max_iter},
        {"tol", s.lbp.tol},
        {"damping", s.lbp.damping}}},
      {"output_dir", s.output_dir.string()},
      {"threads", s.threads}};
  if (s.gamma) j["gamma"] = *s.gamma;
  if (s.solver.eps_tie) j["solver"]["eps_tie"] = *s.solver.eps_tie;
  if (!s.data_path.empty()) j["data"] = s.data_path.string();
  if (!s.model_dir.empty()) j["model"] = s.model_dir.string();
  return j;
}

// Sweep

namespace {

DecompositionModel chain_from_spec(const ExperimentSpec& spec, std::size_t index) {
  const auto& rho = spec.chain_rhos.at(index % spec.chain_rhos.size());
  // J_M[0][1] = -rho1 / (1 - rho1^2), so the residual takes the opposite sign of rho1.
  const double sign = rho[0] > 0.0 ? -1.0 : 1.0;
  return chain_model(rho, sign * spec.chain_residual_magnitude);
}

Index model_dim(const ExperimentSpec& spec, Index size) {
  return spec.generator == "chain" ? 4 : size * size;
}

}  // namespace

DecompositionModel sweep_model(const ExperimentSpec& spec, Index size, int trial, Index n) {
  if (spec.generator == "chain") return chain_from_spec(spec, static_cast<std::size_t>(trial));
  const std::uint64_t seed =
      spec.fresh_models
          ? derive_seed(spec.seed, {kModelTag, static_cast<std::uint64_t>(size),
                                    static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(n)})
          : derive_seed(spec.seed, {kModelTag, static_cast<std::uint64_t>(size),
                                    static_cast<std::uint64_t>(trial)});
  return grid_model(static_cast<int>(size), seed, spec.grid);
}

std::uint64_t sweep_sample_seed(const ExperimentSpec& spec, Index size, int trial, Index n) {
  return derive_seed(spec.seed, {kSampleTag, static_cast<std::uint64_t>(size),
                                 static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(n)});
}

SolverConfig fit_config(const ExperimentSpec& spec, const DecompositionModel* model, Index p,
                        Index n) {
  SolverConfig cfg = spec.solver;
  const double pd = static_cast<double>(p);
  const double nd = static_cast<double>(n);
  if (spec.gamma) {
    cfg.gamma = *spec.gamma;
  } else if (spec.exact_statistics) {
    cfg.gamma = 0.0;
  } else {
    const auto cs = spec.c_gamma_for(p);
    if (cs.empty()) throw PreconditionViolated("fit needs gamma or c_gamma");
    cfg.gamma = gamma_schedule(cs.front(), pd, nd);
  }
  cfg.lambda_off = spec.lambda.resolve(model, pd, nd);
  return cfg;
}

SweepOutput run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.threads > 0) omp_set_num_threads(spec.threads);

  std::vector<Index> sizes;
  if (spec.generator == "chain") {
    sizes = {1};
  } else {
    sizes.assign(spec.sizes.begin(), spec.sizes.end());
  }

  struct Cell {
    Index size, p, n;
    int trial;
    double c_gamma;
  };
  std::vector<Cell> cells;
  std::map<std::pair<Index, int>, DecompositionModel> shared;
  for (Index size : sizes) {
    const Index p = model_dim(spec, size);
    for (int t = 0; t < spec.trials; ++t) {
      if (!spec.fresh_models) shared.emplace(std::pair{size, t}, sweep_model(spec, size, t));
      for (double c : spec.c_gamma_for(p))
        for (Index n : spec.sample_sizes_for(p)) cells.push_back({size, p, n, t, c});
    }
  }

  std::vector<SweepRow> rows(cells.size());
  const auto count = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const Cell& cell = cells[static_cast<std::size_t>(k)];
    SweepRow& row = rows[static_cast<std::size_t>(k)];
    row.p = cell.p;
    row.n = cell.n;
    row.trial = cell.trial;
    row.c_gamma = cell.c_gamma;
    row.n_over_log_p = static_cast<double>(cell.n) / std::log(static_cast<double>(cell.p));
    try {
      const DecompositionModel model = spec.fresh_models
                                           ? sweep_model(spec, cell.size, cell.trial, cell.n)
                                           : shared.at({cell.size, cell.trial});
      const auto sample_seed = sweep_sample_seed(spec, cell.size, cell.trial, cell.n);
      const SampleSet samples = draw_samples(model, cell.n, sample_seed);
      const SymmetricMatrix sigma_hat =
          spec.centered ? sample_covariance_centered(samples) : sample_covariance(samples);
      SolverConfig cfg = spec.solver;
      cfg.gamma = gamma_schedule(cell.c_gamma, static_cast<double>(cell.p),
                                 static_cast<double>(cell.n));
      cfg.lambda_off = spec.lambda.resolve(&model, static_cast<double>(cell.p),
                                           static_cast<double>(cell.n));
      row.lambda = cfg.lambda_off;
      const SolveResult res = admm_solve(sigma_hat, cfg);
      row.iterations = res.iterations;
      row.converged = res.converged;
      row.metrics = evaluate(res.j_hat, res.sigma_r_hat, model, spec.support_threshold);

      // Re-derive the certificate from the returned matrices before emitting.
      row.kkt_residual =
          kkt_residual(sigma_hat, res.sigma_m_hat, res.sigma_r_hat, res.z_gamma, cfg.gamma);
      row.duality_gap = res.duality_gap;
      if (row.converged && !(row.kkt_residual <= kEmissionKktBound)) {
        row.converged = false;
        row.error = "kkt residual " + io::format_double(row.kkt_residual) + " above bound";
      }
    } catch (const Error& e) {
      row.converged = false;
      row.error = e.what();
      row.kkt_residual = row.duality_gap = nan_value();
      auto& m = row.metrics;
      m.normalized_edit_markov = m.normalized_edit_residual = nan_value();
      m.linf_error_j = m.linf_error_r = nan_value();
      m.linf_error_precision_overall = m.spectral_error_sigma = nan_value();
    }
  }

  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.p, a.c_gamma, a.n, a.trial) < std::tie(b.p, b.c_gamma, b.n, b.trial);
  });

  // Means over trials, skipping NaN entries (undefined normalized distances, failed cells).
  nlohmann::json groups = nlohmann::json::array();
  for (std::size_t a = 0; a < rows.size();) {
    std::size_t b = a;
    while (b < rows.size() && rows[b].p == rows[a].p && rows[b].n == rows[a].n &&
           rows[b].c_gamma == rows[a].c_gamma)
      ++b;
    const auto mean_of = [&](auto field) {
      double sum = 0.0;
      int used = 0;
      for (std::size_t k = a; k < b; ++k) {
        const double v = field(rows[k]);
        if (std::isfinite(v)) {
          sum += v;
          ++used;
        }
      }
      return used ? sum / used : nan_value();
    };
    int converged = 0;
    for (std::size_t k = a; k < b; ++k) converged += rows[k].converged ? 1 : 0;
    groups.push_back({
        {"p", rows[a].p},
        {"n", rows[a].n},
        {"c_gamma", rows[a].c_gamma},
        {"n_over_log_p", rows[a].n_over_log_p},
        {"trials", b - a},
        {"converged", converged},
        {"normalized_edit_markov",
         real_json(mean_of([](const SweepRow& r) { return r.metrics.normalized_edit_markov; }))},
        {"normalized_edit_residual",
         real_json(mean_of([](const SweepRow& r) { return r.metrics.normalized_edit_residual; }))},
        {"edit_distance_markov", real_json(mean_of([](const SweepRow& r) {
           return static_cast<double>(r.metrics.edit_distance_markov);
         }))},
        {"edit_distance_residual", real_json(mean_of([](const SweepRow& r) {
           return static_cast<double>(r.metrics.edit_distance_residual);
         }))},
        {"linf_error_precision_overall", real_json(mean_of([](const SweepRow& r) {
           return r.metrics.linf_error_precision_overall;
         }))},
    });
    a = b;
  }

  SweepOutput out;
  out.rows = std::move(rows);
  out.summary = {{"schema_version", io::kSchemaVersion},
                 {"version", io::kToolVersion},
                 {"lambda_policy", spec.lambda.to_string()},
                 {"aggregation", "mean of per-trial normalized distances"},
                 {"groups", groups}};
  return out;
}

std::string sweep_csv(const SweepOutput& out) {
  std::ostringstream ss;
  ss << "# " << io::kToolVersion << " schema " << io::kSchemaVersion << '\n';
  ss << "p,n,trial,c_gamma,lambda,edit_distance_markov,edit_distance_residual,"
        "normalized_edit_markov,normalized_edit_residual,linf_error_j,linf_error_r,"
        "linf_error_precision_overall,spectral_error_sigma,sign_consistent_r,sign_consistent_j,"
        "iterations,converged,n_over_log_p,kkt_residual,duality_gap\n";
  const auto f = [](double x) { return io::format_double(x); };
  for (const auto& r : out.rows) {
    const auto& m = r.metrics;
    ss << r.p << ',' << r.n << ',' << r.trial << ',' << f(r.c_gamma) << ',' << f(r.lambda) << ','
       << m.edit_distance_markov << ',' << m.edit_distance_residual << ','
       << f(m.normalized_edit_markov) << ',' << f(m.normalized_edit_residual) << ','
       << f(m.linf_error_j) << ',' << f(m.linf_error_r) << ',' << f(m.linf_error_precision_overall)
       << ',' << f(m.spectral_error_sigma) << ',' << (m.sign_consistent_r ? 1 : 0) << ','
       << (m.sign_consistent_j ? 1 : 0) << ',' << r.iterations << ',' << (r.converged ? 1 : 0)
       << ',' << f(r.n_over_log_p) << ',' << f(r.kkt_residual) << ',' << f(r.duality_gap) << '\n';
  }
  return ss.str();
}

void write_sweep(const fs::path& dir, const SweepOutput& out) {
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / "sweep.csv", std::ios::binary);
    if (!csv) throw Error("cannot write " + (dir / "sweep.csv").string());
    csv << sweep_csv(out);
  }
  io::write_json(dir / "summary.json", out.summary);
  for (const auto& r : out.rows) {
    if (!r.error.empty()) {
      std::cerr << "warning: p=" << r.p << " n=" << r.n << " trial=" << r.trial << ": " << r.error
                << '\n';
    }
  }
}

// Exact decomposition

ExactCase exact_decomposition_case(const std::string& name, const DecompositionModel& m,
                                   const LambdaPolicy& policy, const SolverConfig& base) {
  SolverConfig cfg = base;
  cfg.gamma = 0.0;
  cfg.lambda_off = policy.resolve(&m, static_cast<double>(m.dim()), 1.0);
  const SolveResult res = admm_solve(true_covariance(m), cfg);
  ExactCase c;
  c.name = name;
  c.p = m.dim();
  c.lambda = cfg.lambda_off;
  c.error_j = max_abs_entry(res.j_hat.dense() - m.j_markov.dense());
  c.error_r = max_abs_entry(res.sigma_r_hat.dense() - m.sigma_residual.dense());
  c.kkt_residual = res.kkt_residual;
  c.duality_gap = res.duality_gap;
  c.iterations = res.iterations;
  c.converged = res.converged;
  c.pass = c.error_j <= kExactTolerance && c.error_r <= kExactTolerance;
  return c;
}

std::vector<ExactCase> run_exact_decomposition(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<ExactCase> cases;
  if (spec.generator == "chain") {
    for (std::size_t k = 0; k < spec.chain_rhos.size(); ++k) {
      const auto& r = spec.chain_rhos[k];
      const std::string name = "chain(" + number_text(r[0]) + "," + number_text(r[1]) + "," +
                               number_text(r[2]) + ")";
      cases.push_back(exact_decomposition_case(name, chain_from_spec(spec, k), spec.lambda, spec.solver));
    }
  } else {
    for (int q : spec.sizes) {
      for (int t = 0; t < spec.trials; ++t) {
        const std::string name = "grid(q=" + std::to_string(q) + ",trial=" + std::to_string(t) + ")";
        cases.push_back(
            exact_decomposition_case(name, sweep_model(spec, q, t), spec.lambda, spec.solver));
      }
    }
  }
  return cases;
}

nlohmann::json exact_report_json(const std::vector<ExactCase>& cases) {
  nlohmann::json arr = nlohmann::json::array();
  bool all = !cases.empty();
  for (const auto& c : cases) {
    all = all && c.pass;
    arr.push_back({{"name", c.name},
                   {"p", c.p},
                   {"lambda", real_json(c.lambda)},
                   {"error_j", c.error_j},
                   {"error_r", c.error_r},
                   {"kkt_residual", real_json(c.kkt_residual)},
                   {"duality_gap", real_json(c.duality_gap)},
                   {"iterations", c.iterations},
                   {"converged", c.converged},
                   {"pass", c.pass}});
  }
  return {{"schema_version", io::kSchemaVersion},
          {"tolerance", kExactTolerance},
          {"all_pass", all},
          {"cases", arr}};
}

// LBP study

std::vector<LbpStudyRecord> run_lbp_study(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.generator != "grid") throw PreconditionViolated("the LBP study uses grid models");
  GridOptions opt = spec.grid;
  opt.clip_fraction = spec.lbp_clip_fraction;
  const int q = spec.sizes.front();

  std::vector<LbpStudyRecord> out(static_cast<std::size_t>(spec.lbp_models));
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < spec.lbp_models; ++k) {
    LbpStudyRecord& rec = out[static_cast<std::size_t>(k)];
    rec.model = k;
    rec.seed = derive_seed(spec.seed, {kLbpTag, static_cast<std::uint64_t>(q),
                                       static_cast<std::uint64_t>(k)});
    DecompositionModel m = grid_model(q, rec.seed, opt);
    CounterRng rng(derive_seed(rec.seed, {kMeanTag}));
    Eigen::VectorXd mu(m.dim());
    for (Index i = 0; i < mu.size(); ++i) mu(i) = rng.uniform();

    const SymmetricMatrix j_overall = inverse_pd(true_covariance(m));
    rec.walk_markov = walk_summability(m.j_markov);
    rec.walk_overall = walk_summability(j_overall);
    rec.markov = lbp_run({m.j_markov, m.j_markov.dense() * mu}, spec.lbp);
    rec.overall = lbp_run({j_overall, j_overall.dense() * mu}, spec.lbp);
  }
  return out;
}

nlohmann::json lbp_summary_json(const std::vector<LbpStudyRecord>& records) {
  const auto status = [](LbpStatus s) {
    switch (s) {
      case LbpStatus::Converged: return "converged";
      case LbpStatus::Diverged: return "diverged";
      case LbpStatus::MaxIterations: return "max_iterations";
    }
    return "unknown";
  };
  const auto last = [](const std::vector<double>& v) {
    return v.empty() ? nlohmann::json(nullptr) : real_json(v.back());
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    arr.push_back({{"model", r.model},
                   {"seed", r.seed},
                   {"walk_summability_markov", r.walk_markov},
                   {"walk_summability_overall", r.walk_overall},
                   {"markov",
                    {{"status", status(r.markov.status)},
                     {"iterations", r.markov.iterations_run},
                     {"final_mean_error", last(r.markov.mean_errors)},
                     {"final_var_error", last(r.markov.var_errors)}}},
                   {"overall",
                    {{"status", status(r.overall.status)},
                     {"iterations", r.overall.iterations_run},
                     {"final_mean_error", last(r.overall.mean_errors)},
                     {"final_var_error", last(r.overall.var_errors)}}}});
  }
  return {{"schema_version", io::kSchemaVersion}, {"models", arr}};
}

// Data and graphs

SampleSet ingest_csv(const fs::path& path) {
  io::Table t = io::read_table_csv(path);
  SampleSet s;
  s.data = std::move(t.values);
  s.column_names = std::move(t.header);
  s.provenance = path.filename().string();
  return s;
}

nlohmann::json dataset_summary_json(const SampleSet& s) {
  return {{"schema_version", io::kSchemaVersion},
          {"n", s.n()},
          {"p", s.p()},
          {"columns", s.column_names},
          {"provenance", s.provenance}};
}

nlohmann::json export_graphs(const SolveResult& result, const std::vector<std::string>& names,
                             double threshold) {
  const Index p = result.j_hat.dim();
  if (static_cast<Index>(names.size()) != p) {
    throw DimensionMismatch("export_graphs: " + std::to_string(names.size()) + " names for p = " +
                            std::to_string(p));
  }
  const auto edges = [&](const SymmetricMatrix& m) {
    nlohmann::json arr = nlohmann::json::array();
    for (Index i = 0; i < p; ++i)
      for (Index j = i + 1; j < p; ++j)
        if (std::abs(m(i, j)) > threshold) {
          arr.push_back({{"source", names[static_cast<std::size_t>(i)]},
                         {"target", names[static_cast<std::size_t>(j)]},
                         {"weight", m(i, j)}});
        }
    return arr;
  };
  return {{"schema_version", io::kSchemaVersion},
          {"nodes", names},
          {"markov", edges(result.j_hat)},
          {"residual", edges(result.sigma_r_hat)}};
}

}  // namespace cdecomp
