#include "gamma_glm/simulation.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include "gamma_glm/parallel.hpp"
#include "gamma_glm/random.hpp"

namespace gamma_glm {

void SimConfig::validate() const {
  if (n_runs < 1)
    throw InputError("n_runs must be >= 1");
  if (n < 1 || p < 1)
    throw InputError("n and p must be >= 1");
  if (n_zeros < 0 || n_zeros > p)
    throw InputError("n_zeros must lie in [0, p]");
  if (!(shape > 0))
    throw InputError("shape must be > 0");
  if (!(alpha > 0 && alpha <= 1))
    throw InputError("alpha must lie in (0, 1]");
  if (!(zero_tol >= 0))
    throw InputError("zero_tol must be >= 0");
  path.validate(n);
  solver.validate();
}

std::string_view method_name(Method method) {
  switch (method) {
  case Method::glm_gamma:
    return "glmGamma";
  case Method::net_min:
    return "glmGammaNet";
  case Method::net_percentile:
    return "glmGammaNet.percentile";
  case Method::net_one_sd:
    return "glmGammaNet.1sd";
  case Method::net_percentile_nonzero:
    return "glmGammaNet.percentile.nonzero";
  case Method::net_one_sd_nonzero:
    return "glmGammaNet.1sd.nonzero";
  }
  return "unknown";
}

GeneratedRun generate_run(const SimConfig& config, int run_index) {
  constexpr int kMaxRedraws = 1000;
  const Eigen::Index n = config.n;
  const Eigen::Index p = config.p;
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    Rng rng(config.rng_seed, {static_cast<std::uint64_t>(run_index),
                              static_cast<std::uint64_t>(attempt)});

    Matrix<double> design(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j)
        design(i, j) = rng.normal();

    VectorXd x_true(p);
    for (Eigen::Index j = 0; j < p; ++j)
      x_true(j) = rng.normal();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (int z = 0; z < config.n_zeros; ++z) {
      const auto remaining = static_cast<std::uint64_t>(p - z);
      const auto pick = static_cast<std::size_t>(z) + rng.below(remaining);
      std::swap(order[static_cast<std::size_t>(z)], order[pick]);
      x_true(order[static_cast<std::size_t>(z)]) = 0.0;
    }

    const VectorXd b_true = (design * x_true).array().exp().matrix();
    if (!b_true.allFinite() || (b_true.array() <= 0.0).any())
      continue;

    VectorXd responses(n);
    for (Eigen::Index i = 0; i < n; ++i)
      responses(i) = b_true(i) / config.shape * rng.gamma(config.shape);
    if (!responses.allFinite() || (responses.array() <= 0.0).any())
      continue;

    GeneratedRun out;
    out.truth.x_true = std::move(x_true);
    out.truth.rate_true = (config.shape / b_true.array()).matrix();
    out.truth.b_true = b_true;
    out.data = Dataset(std::move(design), std::move(responses));
    out.redraws = attempt;
    out.fold_seed = rng.next_u64();
    return out;
  }
  throw NumericalError("run " + std::to_string(run_index) +
                           ": could not draw finite responses",
                       -1);
}

MethodEstimates run_methods(const Dataset& data, const SimConfig& config,
                            std::uint64_t fold_seed) {
  MethodEstimates out;
  auto set = [&](Method m, VectorXd x) {
    out.coefficients[static_cast<std::size_t>(m)] = std::move(x);
  };

  const GammaGlmProblem unregularized(data, config.shape, EnPenalty{0.0, config.alpha});
  FitResult plain = solve(unregularized, config.solver);
  out.stats.record(plain);
  set(Method::glm_gamma, std::move(plain.coefficients));

  PathConfig path = config.path;
  path.rng_seed = fold_seed;
  CvReport cv = cross_validate(data, config.shape, config.alpha, path, config.solver);
  out.stats.merge(cv.stats);
  for (auto& w : cv.warnings)
    out.warnings.push_back(std::move(w));
  set(Method::net_min, cv.selected.at(SelectionRule::min).coefficients);
  set(Method::net_percentile, cv.selected.at(SelectionRule::percentile).coefficients);
  set(Method::net_one_sd, cv.selected.at(SelectionRule::one_sd).coefficients);

  auto refit = [&](Method parent, Method child) {
    FitResult fit = refit_on_support(data, config.shape,
                                     support_of(out[parent], config.zero_tol), config.solver);
    if (!fit.objective_trace.empty())
      out.stats.record(fit);
    for (auto& w : fit.warnings)
      out.warnings.push_back(std::string(method_name(child)) + ": " + w);
    set(child, std::move(fit.coefficients));
  };
  refit(Method::net_percentile, Method::net_percentile_nonzero);
  refit(Method::net_one_sd, Method::net_one_sd_nonzero);
  return out;
}

RecoveryMetrics compute_metrics(const VectorXd& estimate, const SimTruth& truth,
                                double zero_tol) {
  if (estimate.size() != truth.x_true.size())
    throw InputError("estimate length does not match x_true");
  RecoveryMetrics out;
  out.error_l1 = (estimate - truth.x_true).lpNorm<1>();
  const double norm = truth.x_true.lpNorm<1>();
  if (norm > 0.0)
    out.pct_error_l1 = 100.0 * out.error_l1 / norm;
  for (Eigen::Index j = 0; j < estimate.size(); ++j) {
    const bool estimated_zero = std::abs(estimate(j)) <= zero_tol;
    if (truth.x_true(j) == 0.0)
      out.zeros_correct += estimated_zero ? 1 : 0;
    else
      out.nonzeros_correct += estimated_zero ? 0 : 1;
  }
  return out;
}

namespace {

struct RunOutcome {
  bool ok = false;
  std::string error;
  int redraws = 0;
  std::array<RecoveryMetrics, kMethodCount> metrics;
  SolveStats stats;
};

} // namespace

SimulationReport run_study(const SimConfig& config, unsigned workers) {
  config.validate();
  const auto n_runs = static_cast<std::size_t>(config.n_runs);
  std::vector<RunOutcome> outcomes(n_runs);

  parallel_for(n_runs, workers, [&](std::size_t r) {
    RunOutcome& out = outcomes[r];
    try {
      const GeneratedRun run = generate_run(config, static_cast<int>(r));
      out.redraws = run.redraws;
      const MethodEstimates est = run_methods(run.data, config, run.fold_seed);
      for (auto m : kAllMethods)
        out.metrics[static_cast<std::size_t>(m)] =
            compute_metrics(est[m], run.truth, config.zero_tol);
      out.stats = est.stats;
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  SimulationReport report;
  report.config = config;
  const auto bins = static_cast<std::size_t>(config.n_zeros) + 1;
  for (auto& s : report.methods)
    s.zeros_histogram.assign(bins, 0);

  std::array<int, kMethodCount> pct_counts{};
  const int target_nonzeros = config.p - config.n_zeros;
  for (std::size_t r = 0; r < n_runs; ++r) {
    const RunOutcome& out = outcomes[r];
    report.redraws += out.redraws;
    if (!out.ok) {
      report.failures.push_back({static_cast<int>(r), out.error});
      continue;
    }
    ++report.n_runs_completed;
    report.stats.merge(out.stats);
    for (std::size_t m = 0; m < kMethodCount; ++m) {
      const RecoveryMetrics& mt = out.metrics[m];
      MethodSummary& s = report.methods[m];
      s.mean_error_l1 += mt.error_l1;
      if (mt.pct_error_l1) {
        s.mean_pct_error_l1 += *mt.pct_error_l1;
        ++pct_counts[m];
      }
      s.mean_zeros_correct += mt.zeros_correct;
      s.mean_nonzeros_correct += mt.nonzeros_correct;
      s.full_nonzero_recovery += mt.nonzeros_correct == target_nonzeros ? 1.0 : 0.0;
      ++s.zeros_histogram[static_cast<std::size_t>(mt.zeros_correct)];
    }
  }

  const double done = report.n_runs_completed;
  for (std::size_t m = 0; m < kMethodCount; ++m) {
    MethodSummary& s = report.methods[m];
    if (done > 0) {
      s.mean_error_l1 /= done;
      s.mean_zeros_correct /= done;
      s.mean_nonzeros_correct /= done;
      s.full_nonzero_recovery /= done;
    }
    s.mean_pct_error_l1 = pct_counts[m] > 0
                              ? s.mean_pct_error_l1 / pct_counts[m]
                              : std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

} // namespace gamma_glm
