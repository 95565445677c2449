#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gamma_glm/errors.hpp"

namespace gamma_glm {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Design matrix (rows = examples, columns = predictors) and the positive
/// responses observed for each row.
template <typename Scalar>
struct BasicDataset {
  Matrix<Scalar> design;
  Vector<Scalar> responses;

  BasicDataset() = default;

  BasicDataset(Matrix<Scalar> a, Vector<Scalar> b)
      : design(std::move(a)), responses(std::move(b)) {
    validate();
  }

  Eigen::Index rows() const noexcept { return design.rows(); }
  Eigen::Index cols() const noexcept { return design.cols(); }

  /// Throws InputError unless m >= 1, p >= 1, shapes agree, the design is
  /// finite and every response is finite and strictly positive.
  void validate() const {
    if (design.rows() < 1 || design.cols() < 1)
      throw InputError("dataset needs at least one row and one column");
    if (responses.size() != design.rows())
      throw InputError("response length " + std::to_string(responses.size()) +
                       " does not match design rows " +
                       std::to_string(design.rows()));
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
      for (Eigen::Index j = 0; j < design.cols(); ++j) {
        if (!std::isfinite(static_cast<double>(design(i, j))))
          throw InputError("non-finite design entry at row " +
                           std::to_string(i) + ", column " + std::to_string(j));
      }
      const Scalar b = responses(i);
      if (!std::isfinite(static_cast<double>(b)) || !(b > Scalar(0)))
        throw InputError("response at row " + std::to_string(i) +
                         " must be finite and > 0");
    }
  }

  /// Rows selected by `index`, in the order given.
  BasicDataset subset(const std::vector<Eigen::Index>& index) const {
    BasicDataset out;
    out.design.resize(static_cast<Eigen::Index>(index.size()), design.cols());
    out.responses.resize(static_cast<Eigen::Index>(index.size()));
    for (std::size_t r = 0; r < index.size(); ++r) {
      const auto i = static_cast<Eigen::Index>(r);
      out.design.row(i) = design.row(index[r]);
      out.responses(i) = responses(index[r]);
    }
    return out;
  }

  /// Columns selected by `columns`, all rows kept.
  BasicDataset select_columns(const std::vector<Eigen::Index>& columns) const {
    BasicDataset out;
    out.design.resize(design.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c)
      out.design.col(static_cast<Eigen::Index>(c)) = design.col(columns[c]);
    out.responses = responses;
    return out;
  }

  friend bool operator==(const BasicDataset& lhs, const BasicDataset& rhs) {
    return lhs.design.rows() == rhs.design.rows() &&
           lhs.design.cols() == rhs.design.cols() &&
           lhs.design == rhs.design && lhs.responses == rhs.responses;
  }
};

using Dataset = BasicDataset<double>;
using VectorXd = Vector<double>;

} // namespace gamma_glm
