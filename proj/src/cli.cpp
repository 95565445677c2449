#include "gamma_glm/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "gamma_glm/design.hpp"
#include "gamma_glm/fista.hpp"
#include "gamma_glm/gamma_model.hpp"
#include "gamma_glm/io.hpp"
#include "gamma_glm/lambda_path.hpp"
#include "gamma_glm/simulation.hpp"

namespace gamma_glm {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr int kSchemaVersion = 1;

/// Missing or contradictory command-line inputs.
struct UsageError : InputError {
  using InputError::InputError;
};

Json to_json(const VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back(v(i));
  return a;
}

Json to_json(const SolveStats& s) {
  return Json{{"solves", s.solves},
              {"iterations", s.iterations},
              {"line_search_activations", s.line_search_activations},
              {"momentum_restarts", s.momentum_restarts},
              {"not_converged", s.not_converged},
              {"max_objective_ascent", s.solves > 0 ? Json(s.max_ascent) : Json(nullptr)}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out)
    throw InputError("failed writing '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw InputError("cannot create directory '" + dir.string() + "': " + ec.message());
}

struct DataFlags {
  std::string data;
  std::string design;
  std::string response;
  bool intercept = false;
  bool standardize = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--data", data, "Combined CSV: response first, predictors after");
    cmd.add_option("--design", design, "Design matrix CSV (use with --response)");
    cmd.add_option("--response", response, "Single-column response CSV (use with --design)");
    cmd.add_flag("--intercept", intercept, "Append an unpenalized intercept column");
    cmd.add_flag("--standardize", standardize, "Scale predictors to unit variance");
  }

  Dataset load() const {
    const bool combined = !data.empty();
    const bool split = !design.empty() || !response.empty();
    if (combined && split)
      throw UsageError("give either --data or --design/--response, not both");
    if (combined)
      return read_combined_csv(data);
    if (design.empty() || response.empty())
      throw UsageError("an input dataset is required: --data FILE, or --design FILE --response FILE");
    return read_split_csv(design, response);
  }
};

struct SolverFlags {
  SolverConfig config;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--tol", config.tol, "Fixed-point residual tolerance")->capture_default_str();
    cmd.add_option("--max-iter", config.max_iter, "Iteration limit per fit")->capture_default_str();
  }
};

/// Fitted coefficients on the original scale, split into predictors/intercept.
void put_coefficients(Json& j, const PreparedDesign& prepared, const VectorXd& fitted) {
  const VectorXd original = prepared.to_original(fitted);
  const Eigen::Index p = prepared.center.size();
  j["coefficients"] = to_json(original.head(p));
  if (prepared.intercept)
    j["intercept"] = original(p);
}

int cmd_fit(const DataFlags& df, double lambda, double alpha, double shape,
            const SolverConfig& solver, const std::string& out_path, std::ostream& out) {
  const Dataset raw = df.load();
  const PreparedDesign prepared =
      prepare_design(raw, DesignOptions{df.intercept, df.standardize});
  const GammaGlmProblem problem(prepared.data, shape,
                                EnPenalty{lambda, alpha, prepared.penalty_factors});
  const FitResult fit = solve(problem, solver);

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "fit";
  j["shape"] = shape;
  j["lambda"] = lambda;
  j["alpha"] = alpha;
  j["intercept_column"] = df.intercept;
  j["standardize"] = df.standardize;
  put_coefficients(j, prepared, fit.coefficients);
  j["objective"] = objective(problem, fit.coefficients);
  j["nll"] = nll(problem, fit.coefficients);
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["residual"] = fit.residual;
  j["line_search_activations"] = fit.line_search_activations;
  j["momentum_restarts"] = fit.momentum_restarts;
  j["warnings"] = fit.warnings;

  const std::string text = j.dump(2) + "\n";
  if (out_path.empty() || out_path == "-")
    out << text;
  else
    write_text(out_path, text);
  return kExitOk;
}

int cmd_cv(const DataFlags& df, double alpha, double shape, const PathConfig& path,
           SelectionRule rule, unsigned workers, const SolverConfig& solver,
           const std::string& out_dir, std::ostream& out) {
  const Dataset raw = df.load();
  const PreparedDesign prepared =
      prepare_design(raw, DesignOptions{df.intercept, df.standardize});
  CvOptions options;
  options.workers = workers;
  options.penalty_factors = prepared.penalty_factors;
  const CvReport report =
      cross_validate(prepared.data, shape, alpha, path, solver, options);

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "cv";
  j["shape"] = shape;
  j["alpha"] = alpha;
  j["n_lambda"] = path.n_lambda;
  j["epsilon_ratio"] = path.epsilon_ratio;
  j["folds"] = path.n_folds;
  j["percentile"] = path.percentile;
  j["seed"] = path.rng_seed;
  j["intercept_column"] = df.intercept;
  j["standardize"] = df.standardize;
  j["lambda_max"] = report.grid(report.grid.size() - 1);
  j["grid"] = to_json(report.grid);
  j["mean_nll"] = to_json(report.mean_nll);
  j["sd_nll"] = to_json(report.sd_nll);
  Json folds = Json::array();
  for (Eigen::Index f = 0; f < report.fold_nll.rows(); ++f)
    folds.push_back(to_json(report.fold_nll.row(f).transpose()));
  j["fold_nll"] = std::move(folds);
  j["flagged_folds"] = report.flagged_folds;

  Json selected = Json::object();
  for (auto r : kAllRules) {
    const Selection& s = report.selected.at(r);
    Json entry{{"lambda", s.lambda}, {"grid_index", s.grid_index}};
    put_coefficients(entry, prepared, s.coefficients);
    selected[std::string(to_string(r))] = std::move(entry);
  }
  j["selected"] = std::move(selected);

  const Selection& chosen = report.selected.at(rule);
  Json best{{"rule", std::string(to_string(rule))}, {"lambda", chosen.lambda}};
  put_coefficients(best, prepared, chosen.coefficients);
  j["best"] = std::move(best);
  j["solver"] = to_json(report.stats);
  j["warnings"] = report.warnings;

  std::string csv = "lambda,mean_nll,sd_nll\n";
  for (Eigen::Index k = 0; k < report.grid.size(); ++k)
    csv += format_double(report.grid(k)) + "," + format_double(report.mean_nll(k)) + "," +
           format_double(report.sd_nll(k)) + "\n";

  ensure_dir(out_dir);
  write_text(fs::path(out_dir) / "cv_report.json", j.dump(2) + "\n");
  write_text(fs::path(out_dir) / "path.csv", csv);

  out << "rule " << to_string(rule) << ": lambda = " << format_double(chosen.lambda)
      << " (lambda_max = " << format_double(report.grid(report.grid.size() - 1)) << ")\n";
  for (const auto& w : report.warnings)
    out << "warning: " << w << "\n";
  return kExitOk;
}

int cmd_simulate(const SimConfig& config, unsigned workers, const std::string& out_dir,
                 bool save_datasets, std::ostream& out) {
  config.validate();
  ensure_dir(out_dir);
  if (save_datasets) {
    const fs::path data_dir = fs::path(out_dir) / "datasets";
    ensure_dir(data_dir);
    for (int r = 0; r < config.n_runs; ++r) {
      char name[32];
      std::snprintf(name, sizeof name, "run_%05d.csv", r);
      write_combined_csv(data_dir / name, generate_run(config, r).data);
    }
  }

  const SimulationReport report = run_study(config, workers);

  std::string t3 = "method,error.L1,pct_error.L1\n";
  std::string t4 = "method,zeros.correct,nonzeros.correct\n";
  std::string hist = "method,zeros.correct,count\n";
  Json methods = Json::object();
  for (auto m : kAllMethods) {
    const MethodSummary& s = report[m];
    const std::string name(method_name(m));
    t3 += name + "," + format_double(s.mean_error_l1) + "," +
          format_double(s.mean_pct_error_l1) + "\n";
    t4 += name + "," + format_double(s.mean_zeros_correct) + "," +
          format_double(s.mean_nonzeros_correct) + "\n";
    for (std::size_t z = 0; z < s.zeros_histogram.size(); ++z)
      hist += name + "," + std::to_string(z) + "," + std::to_string(s.zeros_histogram[z]) + "\n";
    methods[name] = Json{{"error.L1", s.mean_error_l1},
                         {"pct_error.L1", s.mean_pct_error_l1},
                         {"zeros.correct", s.mean_zeros_correct},
                         {"nonzeros.correct", s.mean_nonzeros_correct},
                         {"full_nonzero_recovery", s.full_nonzero_recovery},
                         {"zeros_histogram", s.zeros_histogram}};
  }

  Json failures = Json::array();
  for (const auto& f : report.failures)
    failures.push_back(Json{{"run", f.run_index}, {"error", f.message}});

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "simulate";
  j["config"] = Json{{"runs", config.n_runs},
                     {"n", config.n},
                     {"p", config.p},
                     {"zeros", config.n_zeros},
                     {"shape", config.shape},
                     {"alpha", config.alpha},
                     {"seed", config.rng_seed},
                     {"folds", config.path.n_folds},
                     {"n_lambda", config.path.n_lambda},
                     {"epsilon_ratio", config.path.epsilon_ratio},
                     {"percentile", config.path.percentile},
                     {"zero_tol", config.zero_tol}};
  j["runs_completed"] = report.n_runs_completed;
  j["failures"] = std::move(failures);
  j["redraws"] = report.redraws;
  j["methods"] = std::move(methods);
  j["solver"] = to_json(report.stats);

  const fs::path dir(out_dir);
  write_text(dir / "table3.csv", t3);
  write_text(dir / "table4.csv", t4);
  write_text(dir / "histogram.csv", hist);
  write_text(dir / "report.json", j.dump(2) + "\n");

  out << "completed " << report.n_runs_completed << " of " << config.n_runs << " runs\n";
  out << std::left << std::setw(32) << "method" << std::setw(12) << "error.L1" << std::setw(14)
      << "%error.L1" << std::setw(15) << "zeros.correct" << "nonzeros.correct\n";
  for (auto m : kAllMethods) {
    const MethodSummary& s = report[m];
    out << std::left << std::setw(32) << method_name(m) << std::fixed << std::setprecision(3)
        << std::setw(12) << s.mean_error_l1 << std::setw(14) << s.mean_pct_error_l1
        << std::setw(15) << s.mean_zeros_correct << s.mean_nonzeros_correct << "\n";
  }
  out << std::defaultfloat;
  out << "line-search activations: " << report.stats.line_search_activations << "\n";
  return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const argv[], std::ostream& out, std::ostream& err) {
  CLI::App app{"Gamma GLM with elastic-net regularization"};
  app.name("gamma_glm");
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit at a fixed lambda");
  DataFlags fit_data;
  SolverFlags fit_solver;
  double fit_lambda = 0.0, fit_alpha = 1.0, fit_shape = 1.0;
  std::string fit_out;
  fit_data.add_to(*fit);
  fit_solver.add_to(*fit);
  fit->add_option("--lambda", fit_lambda, "Regularization strength")->capture_default_str();
  fit->add_option("--alpha", fit_alpha, "Elastic-net mixing in [0, 1]")->capture_default_str();
  fit->add_option("--shape", fit_shape, "Gamma shape k")->capture_default_str();
  fit->add_option("--out", fit_out, "Output JSON path (default: stdout)");

  // cv
  auto* cv = app.add_subcommand("cv", "Cross-validate the lambda path and fit at the chosen lambda");
  DataFlags cv_data;
  SolverFlags cv_solver;
  PathConfig cv_path;
  double cv_alpha = 1.0, cv_shape = 1.0;
  std::string cv_rule = "min";
  unsigned cv_workers = 1;
  std::string cv_out = ".";
  cv_data.add_to(*cv);
  cv_solver.add_to(*cv);
  cv->add_option("--alpha", cv_alpha, "Elastic-net mixing in (0, 1]")->capture_default_str();
  cv->add_option("--shape", cv_shape, "Gamma shape k")->capture_default_str();
  cv->add_option("--n-lambda", cv_path.n_lambda, "Grid size")->capture_default_str();
  cv->add_option("--epsilon-ratio", cv_path.epsilon_ratio, "lambda_min / lambda_max")
      ->capture_default_str();
  cv->add_option("--folds", cv_path.n_folds, "Number of folds")->capture_default_str();
  cv->add_option("--rule", cv_rule, "Selection rule: min, 1sd or percentile")
      ->check(CLI::IsMember({"min", "1sd", "percentile"}))
      ->capture_default_str();
  cv->add_option("--percentile", cv_path.percentile, "Percentile-rule threshold")
      ->capture_default_str();
  cv->add_option("--seed", cv_path.rng_seed, "Fold partition seed")->capture_default_str();
  cv->add_option("--workers", cv_workers, "Worker threads (0 = all cores)")->capture_default_str();
  cv->add_option("--out-dir", cv_out, "Directory for cv_report.json and path.csv")
      ->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the Monte-Carlo variable-selection study");
  SimConfig sim_config;
  SolverFlags sim_solver;
  unsigned sim_workers = 1;
  std::string sim_out = "simulation";
  bool sim_save = false;
  sim_solver.add_to(*sim);
  sim->add_option("--runs", sim_config.n_runs, "Monte-Carlo runs")->capture_default_str();
  sim->add_option("--n", sim_config.n, "Examples per run")->capture_default_str();
  sim->add_option("--p", sim_config.p, "Predictors")->capture_default_str();
  sim->add_option("--zeros", sim_config.n_zeros, "True zero coefficients")->capture_default_str();
  sim->add_option("--shape", sim_config.shape, "Gamma shape k")->capture_default_str();
  sim->add_option("--alpha", sim_config.alpha, "Elastic-net mixing in (0, 1]")->capture_default_str();
  sim->add_option("--folds", sim_config.path.n_folds, "CV folds")->capture_default_str();
  sim->add_option("--n-lambda", sim_config.path.n_lambda, "Grid size")->capture_default_str();
  sim->add_option("--epsilon-ratio", sim_config.path.epsilon_ratio, "lambda_min / lambda_max")
      ->capture_default_str();
  sim->add_option("--percentile", sim_config.path.percentile, "Percentile-rule threshold")
      ->capture_default_str();
  sim->add_option("--seed", sim_config.rng_seed, "Study seed")->capture_default_str();
  sim->add_option("--workers", sim_workers, "Worker threads (0 = all cores)")->capture_default_str();
  sim->add_option("--out-dir", sim_out, "Output directory")->capture_default_str();
  sim->add_flag("--save-datasets", sim_save, "Also write every run's data as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInputError;
  }

  try {
    if (*fit)
      return cmd_fit(fit_data, fit_lambda, fit_alpha, fit_shape, fit_solver.config, fit_out, out);
    if (*cv)
      return cmd_cv(cv_data, cv_alpha, cv_shape, cv_path, parse_rule(cv_rule), cv_workers,
                    cv_solver.config, cv_out, out);
    if (*sim) {
      sim_config.solver = sim_solver.config;
      return cmd_simulate(sim_config, sim_workers, sim_out, sim_save, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n";
    for (auto* sub : app.get_subcommands())
      err << sub->help();
    return kExitInputError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitSolverError;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolverError;
  }
  err << app.help();
  return kExitInputError;
}

} // namespace gamma_glm
