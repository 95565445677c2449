#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "gamma_glm/dataset.hpp"
#include "gamma_glm/errors.hpp"
#include "gamma_glm/gamma_model.hpp"
#include "gamma_glm/prox_en.hpp"

namespace gamma_glm {

struct SolverConfig {
  /// Stop once |x - prox(x - grad/L)|_inf <= tol, with L the smaller of the
  /// local bound at x (raised to any value the safeguard has already needed)
  /// and the trace of the nll Hessian at x.
  double tol = 1e-7;
  int max_iter = 10000;
  /// Safeguard step shrink factor; L is divided by this on every retry.
  double line_search_backtrack = 0.5;
  int line_search_max = 60;

  void validate() const {
    if (!(tol > 0))
      throw InputError("solver tol must be > 0");
    if (max_iter < 1)
      throw InputError("solver max_iter must be >= 1");
    if (!(line_search_backtrack > 0 && line_search_backtrack < 1))
      throw InputError("line_search_backtrack must lie in (0, 1)");
    if (line_search_max < 1)
      throw InputError("line_search_max must be >= 1");
  }
};

template <typename Scalar>
struct BasicFitResult {
  Vector<Scalar> coefficients;
  /// Objective (nll + penalty) at the start point and after every accepted
  /// step. Later entries are the start value plus the accumulated changes.
  std::vector<Scalar> objective_trace;
  /// Momentum scalar s after every accepted step, starting with s_1 = 1.
  std::vector<Scalar> momentum_trace;
  int iterations = 0;
  bool converged = false;
  /// Times the local bound had to be enlarged to obtain descent.
  int line_search_activations = 0;
  /// Times a momentum step increased the objective and was replaced by a
  /// plain proximal step from the current iterate.
  int momentum_restarts = 0;
  /// Fixed-point residual at the returned coefficients.
  Scalar residual{0};
  std::vector<std::string> warnings;
};

using FitResult = BasicFitResult<double>;

/// Accelerated proximal gradient (FISTA) for nll + elastic net.
///
/// Each step is taken from the momentum point with step size 1/L, where L is
/// the local curvature bound evaluated at that point. If the candidate would
/// increase the objective, the momentum is restarted and a plain proximal
/// step is taken from the current iterate at its local bound. Should that
/// still fail to descend, L is enlarged by 1/line_search_backtrack per retry;
/// each enlargement counts as one line-search activation, and the enlarged L
/// becomes a floor for every later step and for the stopping test.
template <typename Scalar>
BasicFitResult<Scalar>
solve(const BasicGammaGlmProblem<Scalar>& problem, const SolverConfig& config = {},
      const std::type_identity_t<std::optional<Vector<Scalar>>>& warm_start = std::nullopt) {
  using Vec = Vector<Scalar>;
  problem.validate();
  config.validate();

  const auto& data = problem.dataset();
  const auto& A = data.design;
  const auto& pen = problem.penalty;
  const Eigen::Index p = data.cols();

  Vec x = Vec::Zero(p);
  if (warm_start) {
    if (warm_start->size() != p)
      throw InputError("warm start length does not match design columns");
    if (!warm_start->allFinite())
      throw InputError("warm start has non-finite entries");
    x = *warm_start;
  }

  const detail::GammaTerms<Scalar> terms(data, problem.shape);
  auto objective_at = [&](const Vec& eta, const Vec& coef) {
    return terms.nll(eta) + penalty(pen, coef);
  };
  auto fixed_point_residual = [&](const Vec& coef, const Vec& grad, Scalar L) {
    const Scalar step = Scalar(1) / L;
    return (coef - prox(pen, step, coef - step * grad)).cwiseAbs().maxCoeff();
  };

  Vec eta_x = A * x;
  Scalar h_x = objective_at(eta_x, x);
  if (!std::isfinite(static_cast<double>(h_x))) {
    try {
      detail::check_rows_finite(data, eta_x, "solve");
    } catch (const NumericalError& e) {
      throw InputError(std::string("objective is not finite at the start point; ") + e.what());
    }
    throw InputError("objective is not finite at the start point");
  }

  // Largest L the safeguard has needed so far; later bounds never go below it.
  Scalar L_learned{0};
  auto bound_at = [&](const Vec& r) { return std::max(terms.bound_from_residuals(r), L_learned); };

  Vec r_x = terms.residuals(eta_x);
  Vec g_x = terms.gradient_from_residuals(r_x);
  Scalar L_x = bound_at(r_x);

  // Objective change from x, summed from per-row differences so that tiny
  // decreases near the optimum are not lost to rounding of the total.
  auto change_from_x = [&](const Vec& coef) {
    const Vec d = A * (coef - x);
    return terms.nll_change(r_x, d) + penalty_change(pen, x, coef);
  };

  Vec omega = x;
  Vec g_w = g_x;
  Scalar L_w = L_x;
  Scalar s{1};

  BasicFitResult<Scalar> result;
  result.objective_trace.push_back(h_x);
  result.momentum_trace.push_back(s);

  for (;;) {
    // The residual grows with the step 1/L, so testing at the smaller of the
    // bound and the Hessian trace is at least as strict as testing at the
    // bound alone. The trace keeps the test meaningful when huge residuals
    // inflate the bound.
    const Scalar L_stop = std::min(L_x, terms.hessian_trace_from_residuals(r_x));
    result.residual = fixed_point_residual(x, g_x, L_stop);
    if (result.residual <= static_cast<Scalar>(config.tol)) {
      result.converged = true;
      break;
    }
    if (result.iterations >= config.max_iter)
      break;

    Scalar step = Scalar(1) / L_w;
    Vec x_new = prox(pen, step, omega - step * g_w);
    Vec eta_new = A * x_new;
    Scalar dh = change_from_x(x_new);

    if (!(dh <= Scalar(0))) {
      // Restart momentum and retry a plain proximal step from x at the local
      // bound; only if that also fails is L enlarged.
      s = Scalar(1);
      ++result.momentum_restarts;
      Scalar L = L_x;
      step = Scalar(1) / L;
      x_new = prox(pen, step, x - step * g_x);
      eta_new = A * x_new;
      dh = change_from_x(x_new);
      for (int retry = 0; !(dh <= Scalar(0)) && retry < config.line_search_max; ++retry) {
        L /= static_cast<Scalar>(config.line_search_backtrack);
        ++result.line_search_activations;
        step = Scalar(1) / L;
        x_new = prox(pen, step, x - step * g_x);
        eta_new = A * x_new;
        dh = change_from_x(x_new);
      }
      if (L > L_x)
        L_learned = L;
      if (!(dh <= Scalar(0))) {
        std::ostringstream msg;
        msg << "safeguard line search found no decrease after "
            << config.line_search_max << " retries (fixed-point residual "
            << result.residual << "; stationarity suspected)";
        throw SolverError(msg.str(), static_cast<double>(result.residual));
      }
    }

    const Scalar s_new = (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * s * s)) / Scalar(2);
    const Scalar beta = (s - Scalar(1)) / s_new;

    r_x = terms.residuals(eta_new);
    g_x = terms.gradient_from_residuals(r_x);
    L_x = bound_at(r_x);

    if (beta == Scalar(0)) {
      omega = x_new;
      g_w = g_x;
      L_w = L_x;
    } else {
      omega = x_new + beta * (x_new - x);
      // A * omega, by linearity.
      const Vec eta_w = eta_new + beta * (eta_new - eta_x);
      const Vec r_w = terms.residuals(eta_w);
      g_w = terms.gradient_from_residuals(r_w);
      L_w = bound_at(r_w);
    }

    x = std::move(x_new);
    eta_x = std::move(eta_new);
    h_x += dh;
    s = s_new;
    ++result.iterations;
    result.objective_trace.push_back(h_x);
    result.momentum_trace.push_back(s);
  }

  result.coefficients = std::move(x);
  return result;
}

} // namespace gamma_glm
