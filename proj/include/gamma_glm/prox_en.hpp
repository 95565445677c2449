#pragma once

#include <Eigen/Dense>

#include <string>

#include "gamma_glm/dataset.hpp"
#include "gamma_glm/errors.hpp"

namespace gamma_glm {

/// Elastic-net penalty lambda * (alpha * |x|_1 + (1 - alpha) / 2 * |x|_2^2).
///
/// `factors` optionally scales the penalty per coordinate (glmnet-style
/// penalty factors). Empty means every coordinate has factor 1; a factor of
/// 0 leaves that coordinate unpenalized (used for an intercept column).
template <typename Scalar>
struct BasicEnPenalty {
  Scalar lambda{0};
  Scalar alpha{1};
  Vector<Scalar> factors{};

  void validate() const {
    if (!(lambda >= Scalar(0)))
      throw InputError("lambda must be >= 0");
    if (!(alpha >= Scalar(0) && alpha <= Scalar(1)))
      throw InputError("alpha must lie in [0, 1]");
    if (factors.size() > 0 && (factors.array() < Scalar(0)).any())
      throw InputError("penalty factors must be >= 0");
  }

  Scalar factor(Eigen::Index j) const {
    return factors.size() == 0 ? Scalar(1) : factors(j);
  }
};

using EnPenalty = BasicEnPenalty<double>;

template <typename Scalar, typename Derived>
Scalar penalty(const BasicEnPenalty<Scalar>& pen,
               const Eigen::MatrixBase<Derived>& x) {
  if (pen.lambda == Scalar(0))
    return Scalar(0);
  Scalar l1{0};
  Scalar l2{0};
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const Scalar f = pen.factor(j);
    l1 += f * std::abs(x(j));
    l2 += f * x(j) * x(j);
  }
  return pen.lambda * (pen.alpha * l1 + (Scalar(1) - pen.alpha) / Scalar(2) * l2);
}

/// penalty(pen, to) - penalty(pen, from), summed coordinate-wise.
template <typename Scalar, typename D1, typename D2>
Scalar penalty_change(const BasicEnPenalty<Scalar>& pen,
                      const Eigen::MatrixBase<D1>& from,
                      const Eigen::MatrixBase<D2>& to) {
  if (pen.lambda == Scalar(0))
    return Scalar(0);
  Scalar l1{0};
  Scalar l2{0};
  for (Eigen::Index j = 0; j < from.size(); ++j) {
    const Scalar f = pen.factor(j);
    l1 += f * (std::abs(to(j)) - std::abs(from(j)));
    l2 += f * (to(j) - from(j)) * (to(j) + from(j));
  }
  return pen.lambda * (pen.alpha * l1 + (Scalar(1) - pen.alpha) / Scalar(2) * l2);
}

/// Closed-form proximity operator of step * penalty, evaluated element-wise:
/// soft-threshold at step*lambda*alpha, then shrink by 1/(1 + step*lambda*(1-alpha)).
template <typename Scalar, typename Derived>
Vector<Scalar> prox(const BasicEnPenalty<Scalar>& pen, Scalar step,
                    const Eigen::MatrixBase<Derived>& v) {
  Vector<Scalar> out(v.size());
  const Scalar l1 = step * pen.lambda * pen.alpha;
  const Scalar l2 = step * pen.lambda * (Scalar(1) - pen.alpha);
  if (pen.factors.size() == 0) {
    const Scalar shrink = Scalar(1) / (Scalar(1) + l2);
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      const Scalar mag = std::abs(v(j)) - l1;
      out(j) = mag > Scalar(0) ? shrink * std::copysign(mag, v(j)) : Scalar(0);
    }
    return out;
  }
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const Scalar f = pen.factors(j);
    const Scalar mag = std::abs(v(j)) - f * l1;
    out(j) = mag > Scalar(0)
                 ? std::copysign(mag, v(j)) / (Scalar(1) + f * l2)
                 : Scalar(0);
  }
  return out;
}

} // namespace gamma_glm
