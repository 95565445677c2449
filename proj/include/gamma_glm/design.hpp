#pragma once

#include "gamma_glm/dataset.hpp"

namespace gamma_glm {

struct DesignOptions {
  /// Append an unpenalized column of ones as the last coefficient.
  bool intercept = false;
  /// Scale each predictor column to unit (population) standard deviation;
  /// columns are also centered when an intercept is present.
  bool standardize = false;
};

/// A dataset after optional standardization / intercept augmentation, with
/// what is needed to map fitted coefficients back to the original columns.
struct PreparedDesign {
  Dataset data;
  /// Empty when every column is penalized; otherwise 1 per predictor and 0
  /// for the intercept column.
  VectorXd penalty_factors;
  VectorXd center;
  VectorXd scale;
  bool intercept = false;

  /// Coefficients on the original predictor scale; the intercept, when
  /// present, stays last.
  VectorXd to_original(const VectorXd& fitted) const;
};

PreparedDesign prepare_design(const Dataset& data, const DesignOptions& options);

} // namespace gamma_glm
