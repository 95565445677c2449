#include "gamma_glm/design.hpp"

#include <cmath>

namespace gamma_glm {

PreparedDesign prepare_design(const Dataset& data, const DesignOptions& options) {
  data.validate();
  const Eigen::Index m = data.rows();
  const Eigen::Index p = data.cols();

  PreparedDesign out;
  out.intercept = options.intercept;
  out.center = VectorXd::Zero(p);
  out.scale = VectorXd::Ones(p);

  Matrix<double> design = data.design;
  if (options.standardize) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const double mean = design.col(j).mean();
      const double var = (design.col(j).array() - mean).square().sum() / static_cast<double>(m);
      const double sd = std::sqrt(var);
      if (options.intercept)
        out.center(j) = mean;
      if (sd > 0)
        out.scale(j) = sd;
      design.col(j) = (design.col(j).array() - out.center(j)) / out.scale(j);
    }
  }

  if (options.intercept) {
    design.conservativeResize(m, p + 1);
    design.col(p).setOnes();
    out.penalty_factors = VectorXd::Ones(p + 1);
    out.penalty_factors(p) = 0.0;
  }

  out.data = Dataset(std::move(design), data.responses);
  return out;
}

VectorXd PreparedDesign::to_original(const VectorXd& fitted) const {
  const Eigen::Index p = center.size();
  VectorXd out(fitted.size());
  out.head(p) = fitted.head(p).cwiseQuotient(scale);
  if (intercept)
    out(p) = fitted(p) - center.dot(out.head(p));
  return out;
}

} // namespace gamma_glm
