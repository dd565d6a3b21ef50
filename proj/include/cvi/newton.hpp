#pragma once

#include <functional>

#include "cvi/errors.hpp"
#include "cvi/types.hpp"

namespace cvi {

struct NewtonConfig {
  double tol = 1e-10;     ///< infinity norm of the residual
  int max_iter = 50;
  double fd_step = 1e-6;  ///< relative step of the central-difference Jacobian

  void validate() const {
    if (!(tol > 0)) throw InvalidArgument("newton: tol must be positive");
    if (max_iter < 1) throw InvalidArgument("newton: max_iter must be >= 1");
    if (!(fd_step > 0)) throw InvalidArgument("newton: fd_step must be positive");
  }
};

struct NewtonResult {
  Vector x;
  int iterations = 0;
  double residual_norm = 0.0;
};

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

/// Central-difference Jacobian with step fd_step * (1 + |x|_inf).
inline Matrix finite_difference_jacobian(const ResidualFn& residual, const Vector& x,
                                         double fd_step) {
  const double step = fd_step * (1.0 + inf_norm(x));
  Vector xp = x;
  Matrix jac;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + step;
    const Vector fp = residual(xp);
    xp[j] = x[j] - step;
    const Vector fm = residual(xp);
    xp[j] = x[j];
    if (j == 0) jac.resize(fp.size(), x.size());
    jac.col(j) = (fp - fm) / (2.0 * step);
  }
  return jac;
}

/// Solves residual(x) = 0 by Newton's method. An empty `jacobian` selects the
/// finite-difference fallback.
inline NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian,
                                 Vector x, const NewtonConfig& cfg) {
  cfg.validate();
  Vector res = residual(x);
  if (res.size() != x.size())
    throw DimensionError("newton_solve: residual and unknown sizes differ");
  double norm = inf_norm(res);
  int it = 0;
  while (!(norm <= cfg.tol)) {
    if (!std::isfinite(norm)) throw NewtonError("newton_solve: non-finite residual", norm, it);
    if (it == cfg.max_iter)
      throw NewtonError("newton_solve: no convergence", norm, it);
    const Matrix jac = jacobian ? jacobian(x) : finite_difference_jacobian(residual, x, cfg.fd_step);
    const Eigen::ColPivHouseholderQR<Matrix> qr(jac);
    if (qr.rank() < x.size())
      throw SingularJacobian("newton_solve: singular Jacobian", norm, it);
    x -= qr.solve(res);
    res = residual(x);
    norm = inf_norm(res);
    ++it;
  }
  return {std::move(x), it, norm};
}

}  // namespace cvi
