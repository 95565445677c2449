#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gamma_glm/dataset.hpp"
#include "gamma_glm/fista.hpp"
#include "gamma_glm/lambda_path.hpp"

namespace gamma_glm {

/// Monte-Carlo study settings. Defaults reproduce the reference study:
/// 100 x 15 standard-normal design, 10 of 15 true coefficients zero.
struct SimConfig {
  int n_runs = 1000;
  int n = 100;
  int p = 15;
  int n_zeros = 10;
  /// Gamma shape used both to sample responses and to fit.
  double shape = 1.0;
  double alpha = 1.0;
  std::uint64_t rng_seed = 0;
  /// |x_j| <= zero_tol counts as a zero coefficient.
  double zero_tol = 1e-10;
  /// rng_seed inside is ignored; each run derives its own fold seed.
  PathConfig path{};
  SolverConfig solver{};

  void validate() const;
};

struct SimTruth {
  VectorXd x_true;
  /// exp(A x_true): the mean of each response.
  VectorXd b_true;
  /// shape / b_true.
  VectorXd rate_true;
};

struct GeneratedRun {
  Dataset data;
  SimTruth truth;
  /// Number of redraws needed because exp(A x_true) overflowed.
  int redraws = 0;
  /// Seed for the run's cross-validation partition.
  std::uint64_t fold_seed = 0;
};

enum class Method : std::size_t {
  glm_gamma,
  net_min,
  net_percentile,
  net_one_sd,
  net_percentile_nonzero,
  net_one_sd_nonzero,
};

inline constexpr std::size_t kMethodCount = 6;
inline constexpr std::array<Method, kMethodCount> kAllMethods{
    Method::glm_gamma,       Method::net_min,
    Method::net_percentile,  Method::net_one_sd,
    Method::net_percentile_nonzero, Method::net_one_sd_nonzero};

std::string_view method_name(Method method);

struct MethodEstimates {
  std::array<VectorXd, kMethodCount> coefficients;
  SolveStats stats;
  std::vector<std::string> warnings;

  const VectorXd& operator[](Method m) const {
    return coefficients[static_cast<std::size_t>(m)];
  }
};

struct RecoveryMetrics {
  double error_l1 = 0.0;
  /// Absent when x_true is identically zero.
  std::optional<double> pct_error_l1;
  int zeros_correct = 0;
  int nonzeros_correct = 0;
};

struct MethodSummary {
  double mean_error_l1 = 0.0;
  /// NaN when no run had a defined percentage error.
  double mean_pct_error_l1 = 0.0;
  double mean_zeros_correct = 0.0;
  double mean_nonzeros_correct = 0.0;
  /// Fraction of runs with every true nonzero recovered.
  double full_nonzero_recovery = 0.0;
  /// histogram[z] = runs with zeros_correct == z, z = 0..n_zeros.
  std::vector<int> zeros_histogram;
};

struct FailedRun {
  int run_index = 0;
  std::string message;
};

struct SimulationReport {
  SimConfig config;
  std::array<MethodSummary, kMethodCount> methods;
  int n_runs_completed = 0;
  std::vector<FailedRun> failures;
  int redraws = 0;
  SolveStats stats;

  const MethodSummary& operator[](Method m) const {
    return methods[static_cast<std::size_t>(m)];
  }
};

/// Design, truth and responses for one run; a pure function of
/// (config.rng_seed, run_index).
GeneratedRun generate_run(const SimConfig& config, int run_index);

/// Unregularized fit, the three cross-validated elastic-net selections and
/// the two support refits.
MethodEstimates run_methods(const Dataset& data, const SimConfig& config,
                            std::uint64_t fold_seed);

RecoveryMetrics compute_metrics(const VectorXd& estimate, const SimTruth& truth,
                                double zero_tol = 1e-10);

/// All runs, executed on `workers` threads and reduced in run order.
SimulationReport run_study(const SimConfig& config, unsigned workers = 1);

} // namespace gamma_glm
