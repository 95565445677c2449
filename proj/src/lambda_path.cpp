#include "gamma_glm/lambda_path.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "gamma_glm/gamma_model.hpp"
#include "gamma_glm/parallel.hpp"
#include "gamma_glm/random.hpp"

namespace gamma_glm {

void PathConfig::validate() const {
  if (n_lambda < 2)
    throw InputError("n_lambda must be >= 2");
  if (!(epsilon_ratio > 0 && epsilon_ratio < 1))
    throw InputError("epsilon_ratio must lie in (0, 1)");
  if (n_folds < 2)
    throw InputError("n_folds must be >= 2");
  if (!(percentile > 0 && percentile < 100))
    throw InputError("percentile must lie in (0, 100)");
}

void PathConfig::validate(Eigen::Index rows) const {
  validate();
  if (n_folds > rows)
    throw InputError("n_folds (" + std::to_string(n_folds) +
                     ") exceeds the number of rows (" + std::to_string(rows) + ")");
}

std::string_view to_string(SelectionRule rule) {
  switch (rule) {
  case SelectionRule::min:
    return "min";
  case SelectionRule::one_sd:
    return "1sd";
  case SelectionRule::percentile:
    return "percentile";
  }
  return "unknown";
}

SelectionRule parse_rule(std::string_view name) {
  for (auto rule : kAllRules)
    if (to_string(rule) == name)
      return rule;
  throw InputError("unknown selection rule '" + std::string(name) +
                   "' (expected min, 1sd or percentile)");
}

void SolveStats::record(const FitResult& fit) {
  ++solves;
  iterations += fit.iterations;
  line_search_activations += fit.line_search_activations;
  momentum_restarts += fit.momentum_restarts;
  if (!fit.converged)
    ++not_converged;
  for (std::size_t i = 1; i < fit.objective_trace.size(); ++i)
    max_ascent = std::max(max_ascent, fit.objective_trace[i] - fit.objective_trace[i - 1]);
}

void SolveStats::merge(const SolveStats& other) {
  solves += other.solves;
  iterations += other.iterations;
  line_search_activations += other.line_search_activations;
  momentum_restarts += other.momentum_restarts;
  not_converged += other.not_converged;
  max_ascent = std::max(max_ascent, other.max_ascent);
}

double path_lambda_max(const Dataset& data, double shape, double alpha,
                       const VectorXd& penalty_factors, const SolverConfig& solver) {
  if (penalty_factors.size() == 0)
    return lambda_max(data, shape, alpha);
  if (penalty_factors.size() != data.cols())
    throw InputError("penalty factor length does not match design columns");
  if (!(alpha > 0))
    throw InputError("lambda_max requires alpha > 0");

  std::vector<Eigen::Index> free_columns;
  for (Eigen::Index j = 0; j < data.cols(); ++j)
    if (penalty_factors(j) == 0.0)
      free_columns.push_back(j);

  VectorXd x = VectorXd::Zero(data.cols());
  if (!free_columns.empty())
    x = refit_on_support(data, shape, free_columns, solver).coefficients;

  const GammaGlmProblem problem(data, shape);
  const VectorXd g = nll_gradient(problem, x);
  double out = 0.0;
  for (Eigen::Index j = 0; j < data.cols(); ++j)
    if (penalty_factors(j) > 0.0)
      out = std::max(out, std::abs(g(j)) / (alpha * penalty_factors(j)));
  return out;
}

VectorXd log_grid(double lambda_max, double ratio, int n) {
  VectorXd grid(n);
  const double lo = std::log(lambda_max * ratio);
  const double hi = std::log(lambda_max);
  for (int j = 0; j < n; ++j)
    grid(j) = std::exp(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1));
  grid(0) = lambda_max * ratio;
  grid(n - 1) = lambda_max;
  return grid;
}

VectorXd build_grid(const Dataset& data, double shape, double alpha,
                    const PathConfig& config, const VectorXd& penalty_factors) {
  config.validate();
  const double top = path_lambda_max(data, shape, alpha, penalty_factors);
  if (!(top > 0.0))
    throw InputError("lambda_max is 0: the null model is already optimal "
                     "(all responses equal 1); there is no path to fit");
  return log_grid(top, config.epsilon_ratio, config.n_lambda);
}

std::vector<std::vector<Eigen::Index>> partition_rows(Eigen::Index rows, int n_folds,
                                                      std::uint64_t seed) {
  if (n_folds < 1 || n_folds > rows)
    throw InputError("fold count must lie in [1, rows]");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(rows));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(seed, {0x666f6c64u}); // "fold"
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.below(i)]);

  std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(n_folds));
  const auto m = static_cast<std::size_t>(rows);
  const auto n = static_cast<std::size_t>(n_folds);
  for (std::size_t f = 0; f < n; ++f) {
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(f * m / n),
                    order.begin() + static_cast<std::ptrdiff_t>((f + 1) * m / n));
    std::sort(folds[f].begin(), folds[f].end());
  }
  return folds;
}

namespace {

struct FoldOutcome {
  VectorXd held_out; // per lambda, per-observation nll
  bool flagged = false;
  SolveStats stats;
};

FoldOutcome run_fold(const Dataset& data, const std::vector<Eigen::Index>& test_rows,
                     double shape, double alpha, const VectorXd& grid,
                     const SolverConfig& solver, const VectorXd& factors) {
  std::vector<bool> in_test(static_cast<std::size_t>(data.rows()), false);
  for (auto i : test_rows)
    in_test[static_cast<std::size_t>(i)] = true;
  std::vector<Eigen::Index> train_rows;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    if (!in_test[static_cast<std::size_t>(i)])
      train_rows.push_back(i);

  const Dataset train = data.subset(train_rows);
  const Dataset test = data.subset(test_rows);

  FoldOutcome out;
  out.held_out = VectorXd::Constant(grid.size(), std::numeric_limits<double>::quiet_NaN());
  if (!(path_lambda_max(train, shape, alpha, factors, solver) > 0.0)) {
    out.flagged = true;
    return out;
  }

  const GammaGlmProblem test_problem(test, shape);
  const auto test_size = static_cast<double>(test.rows());
  std::optional<VectorXd> warm;
  for (Eigen::Index j = grid.size() - 1; j >= 0; --j) {
    const GammaGlmProblem problem(train, shape, EnPenalty{grid(j), alpha, factors});
    FitResult fit = solve(problem, solver, warm);
    out.stats.record(fit);
    try {
      out.held_out(j) = nll(test_problem, fit.coefficients) / test_size;
    } catch (const NumericalError&) {
      out.held_out(j) = std::numeric_limits<double>::infinity();
    }
    warm = std::move(fit.coefficients);
  }
  return out;
}

} // namespace

CvReport cross_validate(const Dataset& data, double shape, double alpha,
                        const PathConfig& path, const SolverConfig& solver,
                        const CvOptions& options) {
  data.validate();
  path.validate(data.rows());
  solver.validate();
  if (!(shape > 0))
    throw InputError("shape must be > 0");

  CvReport report;
  report.grid = build_grid(data, shape, alpha, path, options.penalty_factors);
  report.folds = partition_rows(data.rows(), path.n_folds, path.rng_seed);

  const auto n_folds = static_cast<std::size_t>(path.n_folds);
  std::vector<FoldOutcome> outcomes(n_folds);
  parallel_for(n_folds, options.workers, [&](std::size_t f) {
    outcomes[f] = run_fold(data, report.folds[f], shape, alpha, report.grid, solver,
                           options.penalty_factors);
  });

  const Eigen::Index n_lambda = report.grid.size();
  report.fold_nll.resize(path.n_folds, n_lambda);
  std::vector<std::size_t> valid;
  for (std::size_t f = 0; f < n_folds; ++f) {
    report.fold_nll.row(static_cast<Eigen::Index>(f)) = outcomes[f].held_out.transpose();
    report.stats.merge(outcomes[f].stats);
    if (outcomes[f].flagged) {
      report.flagged_folds.push_back(static_cast<int>(f));
      report.warnings.push_back("fold " + std::to_string(f) +
                                " skipped: its training split has lambda_max = 0");
    } else {
      valid.push_back(f);
    }
  }
  if (valid.empty())
    throw InputError("every fold was flagged; cross-validation has no usable folds");

  report.mean_nll.resize(n_lambda);
  report.sd_nll.resize(n_lambda);
  const auto n_valid = static_cast<double>(valid.size());
  for (Eigen::Index j = 0; j < n_lambda; ++j) {
    double sum = 0.0;
    for (auto f : valid)
      sum += report.fold_nll(static_cast<Eigen::Index>(f), j);
    const double mean = sum / n_valid;
    double ss = 0.0;
    for (auto f : valid) {
      const double d = report.fold_nll(static_cast<Eigen::Index>(f), j) - mean;
      ss += d * d;
    }
    report.mean_nll(j) = mean;
    report.sd_nll(j) = valid.size() > 1 ? std::sqrt(ss / (n_valid - 1.0)) : 0.0;
  }

  std::map<SelectionRule, Eigen::Index> picks{
      {SelectionRule::min, select_lambda_min_index(report)},
      {SelectionRule::one_sd, select_lambda_1sd_index(report)},
      {SelectionRule::percentile, select_lambda_percentile_index(report, path.percentile)}};

  Eigen::Index lowest = n_lambda - 1;
  for (const auto& [rule, idx] : picks)
    lowest = std::min(lowest, idx);

  // Full-data path from lambda_max down to the smallest selected lambda.
  std::map<Eigen::Index, VectorXd> full_fits;
  std::optional<VectorXd> warm;
  for (Eigen::Index j = n_lambda - 1; j >= lowest; --j) {
    const GammaGlmProblem problem(data, shape,
                                  EnPenalty{report.grid(j), alpha, options.penalty_factors});
    FitResult fit = solve(problem, solver, warm);
    report.stats.record(fit);
    full_fits[j] = fit.coefficients;
    warm = std::move(fit.coefficients);
  }
  for (const auto& [rule, idx] : picks)
    report.selected[rule] = Selection{report.grid(idx), idx, full_fits.at(idx)};

  return report;
}

Eigen::Index select_lambda_min_index(const CvReport& report) {
  Eigen::Index best = -1;
  for (Eigen::Index j = 0; j < report.mean_nll.size(); ++j) {
    const double v = report.mean_nll(j);
    if (std::isnan(v))
      continue;
    if (best < 0 || v <= report.mean_nll(best))
      best = j;
  }
  if (best < 0)
    throw InputError("cross-validation curve has no usable values");
  return best;
}

Eigen::Index select_lambda_1sd_index(const CvReport& report) {
  const Eigen::Index star = select_lambda_min_index(report);
  const double sd = std::isfinite(report.sd_nll(star)) ? report.sd_nll(star) : 0.0;
  const double threshold = report.mean_nll(star) + sd;
  Eigen::Index pick = star;
  for (Eigen::Index j = star; j < report.mean_nll.size(); ++j)
    if (report.mean_nll(j) <= threshold)
      pick = j;
  return pick;
}

double percentile_of(std::vector<double> values, double percentile) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty())
    throw InputError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * percentile / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size())
    return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

Eigen::Index select_lambda_percentile_index(const CvReport& report, double percentile) {
  if (!(percentile > 0 && percentile <= 100))
    throw InputError("percentile must lie in (0, 100]");
  std::vector<double> values(report.mean_nll.data(),
                             report.mean_nll.data() + report.mean_nll.size());
  const double threshold = percentile_of(values, percentile);
  for (Eigen::Index j = report.mean_nll.size() - 1; j >= 0; --j)
    if (report.mean_nll(j) < threshold)
      return j;
  return select_lambda_min_index(report);
}

double select_lambda_min(const CvReport& report) {
  return report.grid(select_lambda_min_index(report));
}

double select_lambda_1sd(const CvReport& report) {
  return report.grid(select_lambda_1sd_index(report));
}

double select_lambda_percentile(const CvReport& report, double percentile) {
  return report.grid(select_lambda_percentile_index(report, percentile));
}

std::vector<Eigen::Index> support_of(const VectorXd& x, double zero_tol) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (std::abs(x(j)) > zero_tol)
      out.push_back(j);
  return out;
}

FitResult refit_on_support(const Dataset& data, double shape,
                           const std::vector<Eigen::Index>& support,
                           const SolverConfig& solver) {
  if (support.empty()) {
    FitResult out;
    out.coefficients = VectorXd::Zero(data.cols());
    out.converged = true;
    out.warnings.push_back("empty support: refit returns the all-zero vector");
    return out;
  }
  for (auto j : support)
    if (j < 0 || j >= data.cols())
      throw InputError("support index out of range");

  const Dataset restricted = data.select_columns(support);
  const GammaGlmProblem problem(restricted, shape, EnPenalty{0.0, 1.0});
  FitResult fit = solve(problem, solver);

  VectorXd full = VectorXd::Zero(data.cols());
  for (std::size_t c = 0; c < support.size(); ++c)
    full(support[c]) = fit.coefficients(static_cast<Eigen::Index>(c));
  fit.coefficients = std::move(full);
  return fit;
}

} // namespace gamma_glm
