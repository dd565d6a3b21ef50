#pragma once

#include <Eigen/Dense>

namespace cvi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Points on a manifold are stored as ambient coordinate vectors. Stiefel
/// points are n-by-m matrices flattened column-major.
using Point = Vector;
using Tangent = Vector;

inline double inf_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

}  // namespace cvi
