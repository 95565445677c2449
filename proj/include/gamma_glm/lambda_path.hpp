#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gamma_glm/dataset.hpp"
#include "gamma_glm/fista.hpp"

namespace gamma_glm {

struct PathConfig {
  int n_lambda = 100;
  /// lambda_min = epsilon_ratio * lambda_max.
  double epsilon_ratio = 1e-3;
  int n_folds = 10;
  /// Threshold for the percentile rule, in (0, 100).
  double percentile = 10.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
  /// Also checks 2 <= n_folds <= rows.
  void validate(Eigen::Index rows) const;
};

enum class SelectionRule { min, one_sd, percentile };

inline constexpr SelectionRule kAllRules[] = {SelectionRule::min, SelectionRule::one_sd,
                                              SelectionRule::percentile};

std::string_view to_string(SelectionRule rule);
/// Accepts "min", "1sd", "percentile".
SelectionRule parse_rule(std::string_view name);

/// Aggregate solver diagnostics over many fits.
struct SolveStats {
  long solves = 0;
  long iterations = 0;
  long line_search_activations = 0;
  long momentum_restarts = 0;
  long not_converged = 0;
  /// Largest objective increase between consecutive accepted iterates.
  double max_ascent = -std::numeric_limits<double>::infinity();

  void record(const FitResult& fit);
  void merge(const SolveStats& other);
};

struct Selection {
  double lambda = 0.0;
  Eigen::Index grid_index = 0;
  /// Full-data fit at `lambda`.
  VectorXd coefficients;
};

struct CvReport {
  /// Ascending, log-equispaced from epsilon_ratio * lambda_max to lambda_max.
  VectorXd grid;
  /// Per-lambda mean over valid folds of the per-observation held-out nll.
  VectorXd mean_nll;
  /// Per-lambda sample standard deviation of the same fold values.
  VectorXd sd_nll;
  /// n_folds x n_lambda per-observation held-out nll; NaN rows for flagged folds.
  Matrix<double> fold_nll;
  std::vector<std::vector<Eigen::Index>> folds;
  std::vector<int> flagged_folds;
  std::map<SelectionRule, Selection> selected;
  SolveStats stats;
  std::vector<std::string> warnings;
};

struct CvOptions {
  /// Worker threads for the per-fold paths; 0 = hardware concurrency.
  unsigned workers = 1;
  /// Per-column penalty factors (see BasicEnPenalty); empty = all ones.
  VectorXd penalty_factors{};
};

/// Smallest lambda at which every penalized coefficient is zero. With unit
/// factors this is lambda_max(); with unpenalized columns the gradient is
/// taken at the unpenalized-only fit.
double path_lambda_max(const Dataset& data, double shape, double alpha,
                       const VectorXd& penalty_factors = {},
                       const SolverConfig& solver = {});

VectorXd build_grid(const Dataset& data, double shape, double alpha,
                    const PathConfig& config, const VectorXd& penalty_factors = {});

/// Log-equispaced grid of `n` values on [lambda_max * ratio, lambda_max].
VectorXd log_grid(double lambda_max, double ratio, int n);

/// Random partition of row indices into n_folds parts whose sizes differ by
/// at most one. Indices within a fold are ascending.
std::vector<std::vector<Eigen::Index>> partition_rows(Eigen::Index rows, int n_folds,
                                                      std::uint64_t seed);

CvReport cross_validate(const Dataset& data, double shape, double alpha,
                        const PathConfig& path, const SolverConfig& solver,
                        const CvOptions& options = {});

Eigen::Index select_lambda_min_index(const CvReport& report);
Eigen::Index select_lambda_1sd_index(const CvReport& report);
Eigen::Index select_lambda_percentile_index(const CvReport& report, double percentile);

double select_lambda_min(const CvReport& report);
double select_lambda_1sd(const CvReport& report);
double select_lambda_percentile(const CvReport& report, double percentile);

/// Linear-interpolation ("type 7") percentile of the finite values.
double percentile_of(std::vector<double> values, double percentile);

/// Unregularized fit restricted to `support`; zeros elsewhere.
FitResult refit_on_support(const Dataset& data, double shape,
                           const std::vector<Eigen::Index>& support,
                           const SolverConfig& solver);

/// Indices j with |x_j| > zero_tol.
std::vector<Eigen::Index> support_of(const VectorXd& x, double zero_tol = 0.0);

} // namespace gamma_glm
