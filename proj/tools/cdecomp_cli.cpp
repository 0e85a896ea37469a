#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "cdecomp/errors.hpp"
#include "cdecomp/experiment.hpp"
#include "cdecomp/io.hpp"

namespace {

using namespace cdecomp;

// Rejection threshold for the overall covariance of a fit, matching the
// eigenvalue floor used on real data.
constexpr double kMinEigWarning = 1e-3;
constexpr const char* kOutEnv = "CDECOMP_OUT";

struct Overrides {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string lambda;
  std::vector<double> cgamma;
};

ExperimentSpec load_spec(const std::string& mode, const Overrides& o, CLI::App& sub) {
  ExperimentSpec spec;
  if (!o.config.empty()) {
    spec = spec_from_json(io::read_json(o.config));
    // Input paths in a config file are relative to that file.
    const auto base = std::filesystem::path(o.config).parent_path();
    if (!spec.data_path.empty() && spec.data_path.is_relative()) spec.data_path = base / spec.data_path;
    if (!spec.model_dir.empty() && spec.model_dir.is_relative()) spec.model_dir = base / spec.model_dir;
  }
  spec.mode = mode;
  if (const char* env = std::getenv(kOutEnv); env != nullptr && *env != '\0') spec.output_dir = env;
  if (!o.out.empty()) spec.output_dir = o.out;
  if (sub.count("--seed") > 0) spec.seed = o.seed;
  if (o.threads > 0) spec.threads = o.threads;
  if (!o.lambda.empty()) spec.lambda = LambdaPolicy::parse(o.lambda);
  if (!o.cgamma.empty()) {
    spec.c_gamma = o.cgamma;
    spec.c_gamma_by_p.clear();
  }
  spec.validate();
  if (spec.threads > 0) omp_set_num_threads(spec.threads);
  return spec;
}

void warn_overall(const SolveResult& r) {
  if (r.min_eig_overall < kMinEigWarning) {
    std::cerr << "warning: smallest eigenvalue of the fitted overall covariance is "
              << r.min_eig_overall << " (below " << kMinEigWarning << "); the fit is suspect\n";
  }
  if (!r.converged) std::cerr << "warning: solver stopped after " << r.iterations
                              << " iterations without converging\n";
}

int cmd_generate(const ExperimentSpec& spec) {
  for (int q : spec.generator == "chain" ? std::vector<int>{1} : spec.sizes) {
    for (int t = 0; t < spec.trials; ++t) {
      const auto m = sweep_model(spec, q, t);
      const std::string tag =
          spec.generator == "chain" ? "chain_t" + std::to_string(t)
                                    : "grid_q" + std::to_string(q) + "_t" + std::to_string(t);
      const auto dir = spec.output_dir / tag;
      io::write_model(dir, m);
      for (Index n : spec.sample_sizes_for(m.dim())) {
        io::write_samples(dir / ("samples_n" + std::to_string(n)),
                          draw_samples(m, n, sweep_sample_seed(spec, q, t, n)));
      }
      std::cout << dir.string() << '\n';
    }
  }
  return 0;
}

int cmd_fit(const ExperimentSpec& spec) {
  std::optional<DecompositionModel> model;
  SymmetricMatrix sigma_hat;
  Index n = 1;
  std::vector<std::string> names;
  if (!spec.model_dir.empty()) model = io::read_model(spec.model_dir);

  if (!spec.data_path.empty()) {
    const SampleSet s = ingest_csv(spec.data_path);
    // Observed data carries its own mean.
    sigma_hat = sample_covariance_centered(s);
    n = s.n();
    names = s.column_names;
  } else if (model) {
    if (spec.exact_statistics) {
      sigma_hat = true_covariance(*model);
    } else {
      const auto sizes = spec.sample_sizes_for(model->dim());
      if (sizes.empty()) throw PreconditionViolated("fit from a model needs a sample size");
      n = sizes.front();
      const auto s = draw_samples(*model, n, spec.seed);
      sigma_hat = spec.centered ? sample_covariance_centered(s) : sample_covariance(s);
    }
  } else {
    throw PreconditionViolated("fit needs \"data\" or \"model\" in the config");
  }
  if (names.empty()) {
    for (Index i = 0; i < sigma_hat.dim(); ++i) names.push_back("x" + std::to_string(i));
  }

  const SolverConfig cfg = fit_config(spec, model ? &*model : nullptr, sigma_hat.dim(), n);
  const SolveResult r = admm_solve(sigma_hat, cfg);
  io::write_solve_result(spec.output_dir, r, cfg);
  io::write_json(spec.output_dir / "graphs.json", export_graphs(r, names, spec.support_threshold));
  if (model) {
    const MetricsRecord m = evaluate(r.j_hat, r.sigma_r_hat, *model, spec.support_threshold);
    io::write_json(spec.output_dir / "metrics.json",
                   {{"schema_version", io::kSchemaVersion},
                    {"edit_distance_markov", m.edit_distance_markov},
                    {"edit_distance_residual", m.edit_distance_residual},
                    {"linf_error_j", m.linf_error_j},
                    {"linf_error_r", m.linf_error_r},
                    {"sign_consistent_j", m.sign_consistent_j},
                    {"sign_consistent_r", m.sign_consistent_r}});
  }
  warn_overall(r);
  std::cout << "iterations=" << r.iterations << " converged=" << r.converged
            << " kkt_residual=" << r.kkt_residual << " duality_gap=" << r.duality_gap << '\n';
  return 0;
}

int cmd_sweep(const ExperimentSpec& spec) {
  const SweepOutput out = run_sweep(spec);
  write_sweep(spec.output_dir, out);
  std::cout << out.rows.size() << " rows written to " << (spec.output_dir / "sweep.csv").string()
            << '\n';
  return 0;
}

int cmd_lbp(const ExperimentSpec& spec) {
  const auto records = run_lbp_study(spec);
  io::write_json(spec.output_dir / "lbp_summary.json", lbp_summary_json(records));
  for (const auto& r : records) {
    const auto stem = "model" + std::to_string(r.model);
    io::write_lbp_trace(spec.output_dir / (stem + "_markov.csv"), r.markov);
    io::write_lbp_trace(spec.output_dir / (stem + "_overall.csv"), r.overall);
  }
  std::cout << records.size() << " models written to " << spec.output_dir.string() << '\n';
  return 0;
}

int cmd_ingest(const ExperimentSpec& spec) {
  if (spec.data_path.empty()) throw PreconditionViolated("ingest needs \"data\" in the config");
  const SampleSet s = ingest_csv(spec.data_path);
  const auto summary = dataset_summary_json(s);
  io::write_json(spec.output_dir / "dataset.json", summary);
  io::write_matrix_csv(spec.output_dir / "covariance.csv", sample_covariance_centered(s).dense());
  std::cout << "n=" << s.n() << " p=" << s.p() << '\n';
  return 0;
}

int cmd_exactdecomp(const ExperimentSpec& spec) {
  const auto cases = run_exact_decomposition(spec);
  const auto report = exact_report_json(cases);
  io::write_json(spec.output_dir / "exact_report.json", report);
  for (const auto& c : cases) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " error_j=" << c.error_j
              << " error_r=" << c.error_r << '\n';
  }
  return report.at("all_pass").get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Markov plus residual covariance decomposition"};
  app.require_subcommand(1);
  Overrides o;

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const ExperimentSpec&);
  };
  const std::vector<Command> commands{
      {"generate", "write synthetic models (and samples) to the output directory", cmd_generate},
      {"fit", "fit one covariance from data or a model", cmd_fit},
      {"sweep", "support-recovery sweep over sizes, sample sizes and trials", cmd_sweep},
      {"lbp", "loopy belief propagation study on generated models", cmd_lbp},
      {"ingest", "load a numeric CSV with a header row and summarise it", cmd_ingest},
      {"exactdecomp", "recover models from exact covariances", cmd_exactdecomp},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", o.config, "JSON experiment file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (overrides $" + std::string(kOutEnv) + ")");
    sub->add_option("--seed", o.seed, "base seed");
    sub->add_option("--threads", o.threads, "OpenMP threads")->check(CLI::PositiveNumber);
    sub->add_option("--lambda", o.lambda,
                    "lambda policy: lambda_star | inf | zero | fixed:V | inflated:C | scaled:C");
    sub->add_option("--cgamma", o.cgamma, "c_gamma list")->delimiter(',');
    subs.emplace_back(sub, &c);
  }

  CLI11_PARSE(app, argc, argv);
  try {
    for (auto& [sub, cmd] : subs) {
      if (sub->parsed()) return cmd->run(load_spec(cmd->name, o, *sub));
    }
  } catch (const cdecomp::NonNumericCell& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const cdecomp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
