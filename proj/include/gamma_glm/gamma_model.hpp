#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>

#include "gamma_glm/dataset.hpp"
#include "gamma_glm/errors.hpp"
#include "gamma_glm/prox_en.hpp"

namespace gamma_glm {

/// A dataset together with the Gamma shape k (common to all rows) and the
/// elastic-net penalty. The mean of row i is exp(A_i . x) under the log link;
/// the per-row scale exp(A_i . x) / k is derived on the fly.
///
/// The dataset is referenced, not copied; it must outlive the problem.
template <typename Scalar>
struct BasicGammaGlmProblem {
  std::reference_wrapper<const BasicDataset<Scalar>> data;
  Scalar shape{1};
  BasicEnPenalty<Scalar> penalty{};

  BasicGammaGlmProblem(const BasicDataset<Scalar>& d, Scalar k,
                       BasicEnPenalty<Scalar> pen = {})
      : data(d), shape(k), penalty(std::move(pen)) {}

  const BasicDataset<Scalar>& dataset() const noexcept { return data.get(); }

  void validate() const {
    if (!(shape > Scalar(0)) || !std::isfinite(static_cast<double>(shape)))
      throw InputError("shape must be finite and > 0");
    penalty.validate();
    if (penalty.factors.size() != 0 &&
        penalty.factors.size() != dataset().cols())
      throw InputError("penalty factor length does not match design columns");
  }
};

using GammaGlmProblem = BasicGammaGlmProblem<double>;

namespace detail {

/// Row-wise pieces of the Gamma negative log-likelihood, parameterized by
/// the linear predictor eta = A x. Evaluation never throws; non-finite values
/// propagate so the solver can treat them as a rejected step.
template <typename Scalar>
class GammaTerms {
public:
  GammaTerms(const BasicDataset<Scalar>& data, Scalar shape)
      : data_(data), shape_(shape) {
    const Scalar k = shape;
    const auto m = static_cast<Scalar>(data.rows());
    constant_ = m * (std::lgamma(k) - k * std::log(k)) -
                (k - Scalar(1)) * data.responses.array().log().sum();
    frob2_ = data.design.squaredNorm();
    row_norms2_ = data.design.rowwise().squaredNorm();
  }

  Scalar frobenius_squared() const noexcept { return frob2_; }

  Scalar curvature_floor() const noexcept {
    return Scalar(1e-6) * (Scalar(1) + frob2_);
  }

  /// Residuals 1 - b_i exp(-eta_i).
  Vector<Scalar> residuals(const Vector<Scalar>& eta) const {
    return (Scalar(1) -
            data_.responses.array() * (-eta.array()).exp()).matrix();
  }

  Scalar nll(const Vector<Scalar>& eta) const {
    const Scalar k = shape_;
    const Scalar varying =
        (k * eta.array() +
         k * data_.responses.array() * (-eta.array()).exp()).sum();
    return constant_ + varying;
  }

  /// nll(eta + d) - nll(eta) from the predictor change d = A (x_new - x)
  /// and the residuals at eta. Stays accurate when the change is far below
  /// the rounding error of nll itself.
  Scalar nll_change(const Vector<Scalar>& r, const Vector<Scalar>& d) const {
    Scalar sum{0};
    for (Eigen::Index i = 0; i < d.size(); ++i)
      sum += d(i) + (Scalar(1) - r(i)) * std::expm1(-d(i));
    return shape_ * sum;
  }

  Vector<Scalar> gradient_from_residuals(const Vector<Scalar>& r) const {
    return shape_ * (data_.design.transpose() * r);
  }

  /// Raw local curvature estimate |A|_F^2 * sum_i k^2 r_i^2.
  Scalar raw_bound_from_residuals(const Vector<Scalar>& r) const {
    return frob2_ * shape_ * shape_ * r.squaredNorm();
  }

  Scalar bound_from_residuals(const Vector<Scalar>& r) const {
    const Scalar raw = raw_bound_from_residuals(r);
    if (!std::isfinite(static_cast<double>(raw)))
      throw NumericalError("curvature bound overflowed (responses or design too extreme)", -1);
    return std::max(raw, curvature_floor());
  }

  /// Trace of the nll Hessian, k * sum_i b_i exp(-eta_i) |A_i|^2, floored
  /// like the bound. It dominates the Hessian's largest eigenvalue at eta.
  Scalar hessian_trace_from_residuals(const Vector<Scalar>& r) const {
    const Scalar raw = shape_ * ((Scalar(1) - r.array()) * row_norms2_.array()).sum();
    return std::max(raw, curvature_floor());
  }

private:
  const BasicDataset<Scalar>& data_;
  Scalar shape_;
  Scalar constant_{0};
  Scalar frob2_{0};
  Vector<Scalar> row_norms2_;
};

/// Throws NumericalError naming the first row whose exp(-eta_i) term is not
/// finite. The reported exponent is clamped to +-700 for display only.
template <typename Scalar>
void check_rows_finite(const BasicDataset<Scalar>& data,
                       const Vector<Scalar>& eta, const char* what) {
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const Scalar term = data.responses(i) * std::exp(-eta(i));
    if (!std::isfinite(static_cast<double>(term)) ||
        !std::isfinite(static_cast<double>(eta(i)))) {
      const double shown = std::clamp(static_cast<double>(eta(i)), -700.0, 700.0);
      std::ostringstream msg;
      msg << what << ": non-finite likelihood term at row " << i
          << " (linear predictor " << shown << ")";
      throw NumericalError(msg.str(), i);
    }
  }
}

} // namespace detail

template <typename Scalar, typename Derived>
Vector<Scalar> linear_predictor(const BasicGammaGlmProblem<Scalar>& problem,
                                const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != problem.dataset().cols())
    throw InputError("coefficient length does not match design columns");
  return problem.dataset().design * x;
}

/// Full Gamma negative log-likelihood including every x-independent
/// constant, so values are comparable across folds and datasets:
///   sum_i lgamma(k) + k eta_i - k log k - (k-1) log b_i + k b_i exp(-eta_i)
template <typename Scalar, typename Derived>
Scalar nll(const BasicGammaGlmProblem<Scalar>& problem,
           const Eigen::MatrixBase<Derived>& x) {
  const Vector<Scalar> eta = linear_predictor(problem, x);
  detail::check_rows_finite(problem.dataset(), eta, "nll");
  const detail::GammaTerms<Scalar> terms(problem.dataset(), problem.shape);
  const Scalar value = terms.nll(eta);
  if (!std::isfinite(static_cast<double>(value)))
    throw NumericalError("nll: non-finite value", -1);
  return value;
}

/// d nll / d x_j = sum_i k (1 - b_i exp(-eta_i)) A_ij
template <typename Scalar, typename Derived>
Vector<Scalar> nll_gradient(const BasicGammaGlmProblem<Scalar>& problem,
                            const Eigen::MatrixBase<Derived>& x) {
  const Vector<Scalar> eta = linear_predictor(problem, x);
  detail::check_rows_finite(problem.dataset(), eta, "nll_gradient");
  const detail::GammaTerms<Scalar> terms(problem.dataset(), problem.shape);
  return terms.gradient_from_residuals(terms.residuals(eta));
}

/// Local quadratic upper-bound estimate |A|_F^2 * sum_i k^2 r_i^2, floored
/// at 1e-6 (1 + |A|_F^2) so it stays strictly positive at a perfect fit.
template <typename Scalar, typename Derived>
Scalar local_curvature_bound(const BasicGammaGlmProblem<Scalar>& problem,
                             const Eigen::MatrixBase<Derived>& x) {
  const Vector<Scalar> eta = linear_predictor(problem, x);
  detail::check_rows_finite(problem.dataset(), eta, "local_curvature_bound");
  const detail::GammaTerms<Scalar> terms(problem.dataset(), problem.shape);
  return terms.bound_from_residuals(terms.residuals(eta));
}

template <typename Scalar, typename Derived>
Scalar objective(const BasicGammaGlmProblem<Scalar>& problem,
                 const Eigen::MatrixBase<Derived>& x) {
  return nll(problem, x) + penalty(problem.penalty, x);
}

/// Smallest lambda for which x = 0 is optimal:
///   max_j |sum_i k (1 - b_i) A_ij| / alpha
template <typename Scalar>
Scalar lambda_max(const BasicDataset<Scalar>& data, Scalar shape, Scalar alpha) {
  if (!(alpha > Scalar(0)))
    throw InputError("lambda_max requires alpha > 0; a pure ridge penalty "
                     "never yields an all-zero solution");
  const Vector<Scalar> r = (Scalar(1) - data.responses.array()).matrix();
  const Vector<Scalar> g = shape * (data.design.transpose() * r);
  return g.cwiseAbs().maxCoeff() / alpha;
}

} // namespace gamma_glm
