#include "live/types.hpp"

#include <cmath>

namespace live {

Dataset validate_dataset(Eigen::MatrixXd x, Eigen::VectorXd y,
                         bool has_intercept_column) {
  if (x.rows() != y.size())
    throw_validation("DimensionMismatch: X has " + std::to_string(x.rows()) +
                     " rows but y has " + std::to_string(y.size()) + " entries");
  if (x.rows() < 2 || x.cols() < 1)
    throw_validation("DimensionMismatch: need n >= 2 and p >= 1, got n=" +
                     std::to_string(x.rows()) + ", p=" + std::to_string(x.cols()));
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 0.0 && y[i] != 1.0)
      throw_validation("NonBinaryOutcome: y[" + std::to_string(i) + "] = " +
                       std::to_string(y[i]));
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (!std::isfinite(x(i, j)))
        throw_validation("NonFiniteEntry: X(" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
  if (has_intercept_column)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (x(i, 0) != 1.0)
        throw_validation("BadInterceptColumn: X(" + std::to_string(i) +
                         ",0) = " + std::to_string(x(i, 0)) + ", expected 1");
  return Dataset{std::move(x), std::move(y), has_intercept_column};
}

Loading validate_loading(Eigen::VectorXd values, Eigen::Index p) {
  if (values.size() != p)
    throw_validation("DimensionMismatch: loading has " +
                     std::to_string(values.size()) + " entries, dataset has p=" +
                     std::to_string(p));
  for (Eigen::Index j = 0; j < values.size(); ++j)
    if (!std::isfinite(values[j]))
      throw_validation("NonFiniteEntry: loading[" + std::to_string(j) + "]");
  if (values.norm() == 0.0)
    throw_validation("loading must have a positive norm");
  return Loading{std::move(values)};
}

std::string method_name(Method m) {
  switch (m) {
    case Method::live: return "live";
    case Method::plugin_lasso: return "plugin";
    case Method::post_selection: return "postsel";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "live") return Method::live;
  if (name == "plugin") return Method::plugin_lasso;
  if (name == "postsel") return Method::post_selection;
  throw_validation("unknown method '" + name + "' (expected live|plugin|postsel)");
}

}  // namespace live
