#pragma once

#include <functional>

#include "cvi/manifold.hpp"
#include "cvi/newton.hpp"

namespace cvi {

/// Discrete Lagrangian L_d(q0, q1; h) with its partial derivatives.
///
/// `d12` is optional and returns d(D1 L_d)/d q1; when present the Newton
/// solves use it instead of finite differences.
struct DiscreteLagrangian {
  using Scalar = std::function<double(const Point&, const Point&, double)>;
  using Grad = std::function<Vector(const Point&, const Point&, double)>;
  using Hess = std::function<Matrix(const Point&, const Point&, double)>;

  double h = 0.0;
  Scalar eval;
  Grad d1;
  Grad d2;
  Hess d12;
};

/// Discrete right (H_d^+(q0, p1)) or left (H_d^-(q1, p0)) Hamiltonian. In
/// both cases the first argument is a position and the second a momentum.
///
/// Optional second partials: `d12` = d(D1 H)/dp, `d22` = d(D2 H)/dp.
struct DiscreteHamiltonian {
  enum class Kind { right, left };
  using Scalar = std::function<double(const Point&, const Vector&, double)>;
  using Grad = std::function<Vector(const Point&, const Vector&, double)>;
  using Hess = std::function<Matrix(const Point&, const Vector&, double)>;

  Kind kind = Kind::right;
  double h = 0.0;
  Scalar eval;
  Grad d1;
  Grad d2;
  Hess d12;
  Hess d22;
};

/// One step of a constrained discrete map in position-momentum form.
struct ConstrainedStep {
  Point q;
  Vector p;
  Vector lam;
  int newton_iters = 0;
};

/// p1 = D2 L_d(q0, q1).
inline Vector legendre_plus(const DiscreteLagrangian& ld, const Point& q0, const Point& q1) {
  return ld.d2(q0, q1, ld.h);
}

/// p0 = -D1 L_d(q0, q1).
inline Vector legendre_minus(const DiscreteLagrangian& ld, const Point& q0, const Point& q1) {
  return -ld.d1(q0, q1, ld.h);
}

/// Removes the span of the constraint gradients from p, so that dH/dp is
/// tangent for Hamiltonians quadratic in p under the inherited metric.
inline Vector project_momentum(const EmbeddedManifold& m, const Point& q, const Vector& p) {
  return m.tangent_project(q, p);
}

namespace detail {

inline void require_feasible(const EmbeddedManifold& m, const Point& q, const char* op) {
  if (q.size() != m.ambient_dim())
    throw DimensionError(std::string(op) + ": point dimension mismatch");
  if (!m.is_feasible(q))
    throw InfeasibleError(std::string(op) + ": point is not on " + m.name());
}

inline Vector stack(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

inline Vector initial_multiplier(const EmbeddedManifold& m, const Vector& guess) {
  return guess.size() == m.constraint_dim() ? guess : Vector::Zero(m.constraint_dim());
}

}  // namespace detail

/// Solves the constrained discrete Euler-Lagrange equations in momentum form:
///   p_k = -D1 L_d(q_k, q_{k+1}) + J_C(q_k)^T lam_k,   C(q_{k+1}) = 0,
/// then returns q_{k+1}, p_{k+1} = D2 L_d(q_k, q_{k+1}) and lam_k.
inline ConstrainedStep constrained_del_momentum_step(const DiscreteLagrangian& ld,
                                                     const EmbeddedManifold& m,
                                                     const Point& q, const Vector& p,
                                                     const NewtonConfig& cfg,
                                                     const Vector& lam_guess = {},
                                                     const Point& q_guess = {}) {
  detail::require_feasible(m, q, "constrained_del_step");
  const Eigen::Index n = m.ambient_dim();
  const Eigen::Index d = m.constraint_dim();
  const double h = ld.h;
  const Matrix jac_q = m.constraint_jacobian(q);

  auto residual = [&](const Vector& x) {
    const Vector q1 = x.head(n);
    const Vector lam = x.tail(d);
    return detail::stack(ld.d1(q, q1, h) + p - jac_q.transpose() * lam, m.constraint(q1));
  };
  JacobianFn jacobian;
  if (ld.d12) {
    jacobian = [&](const Vector& x) {
      const Vector q1 = x.head(n);
      Matrix jac = Matrix::Zero(n + d, n + d);
      jac.topLeftCorner(n, n) = ld.d12(q, q1, h);
      jac.topRightCorner(n, d) = -jac_q.transpose();
      jac.bottomLeftCorner(d, n) = m.constraint_jacobian(q1);
      return jac;
    };
  }
  const Vector q0 = q_guess.size() == n ? q_guess : Vector(q + h * p);
  const auto sol =
      newton_solve(residual, jacobian, detail::stack(q0, detail::initial_multiplier(m, lam_guess)), cfg);
  ConstrainedStep out;
  out.q = sol.x.head(n);
  out.lam = sol.x.tail(d);
  out.p = ld.d2(q, out.q, h);
  out.newton_iters = sol.iterations;
  return out;
}

/// Two-step form: D1 L_d(q_k, q_{k+1}) + D2 L_d(q_{k-1}, q_k) = J_C(q_k)^T lam_k
/// with C(q_{k+1}) = 0.
inline ConstrainedStep constrained_del_step(const DiscreteLagrangian& ld,
                                            const EmbeddedManifold& m, const Point& q_prev,
                                            const Point& q_curr, const NewtonConfig& cfg,
                                            const Vector& lam_guess = {}) {
  detail::require_feasible(m, q_prev, "constrained_del_step");
  const Vector p = legendre_plus(ld, q_prev, q_curr);
  return constrained_del_momentum_step(ld, m, q_curr, p, cfg, lam_guess,
                                       Vector(2.0 * q_curr - q_prev));
}

/// Discrete constrained right Hamilton's equations:
///   q_{k+1} = D2 H_d^+(q_k, p_{k+1}),
///   p_k = D1 H_d^+(q_k, p_{k+1}) + J_C(q_k)^T lam_k,   C(q_{k+1}) = 0.
inline ConstrainedStep constrained_right_hamilton_step(const DiscreteHamiltonian& hd,
                                                       const EmbeddedManifold& m,
                                                       const Point& q, const Vector& p,
                                                       const NewtonConfig& cfg,
                                                       const Vector& lam_guess = {}) {
  if (hd.kind != DiscreteHamiltonian::Kind::right)
    throw InvalidArgument("constrained_right_hamilton_step: needs a right Hamiltonian");
  detail::require_feasible(m, q, "constrained_right_hamilton_step");
  const Eigen::Index n = m.ambient_dim();
  const Eigen::Index d = m.constraint_dim();
  const double h = hd.h;
  const Matrix jac_q = m.constraint_jacobian(q);

  auto residual = [&](const Vector& x) {
    const Vector p1 = x.head(n);
    const Vector lam = x.tail(d);
    return detail::stack(hd.d1(q, p1, h) + jac_q.transpose() * lam - p,
                         m.constraint(hd.d2(q, p1, h)));
  };
  JacobianFn jacobian;
  if (hd.d12 && hd.d22) {
    jacobian = [&](const Vector& x) {
      const Vector p1 = x.head(n);
      Matrix jac = Matrix::Zero(n + d, n + d);
      jac.topLeftCorner(n, n) = hd.d12(q, p1, h);
      jac.topRightCorner(n, d) = jac_q.transpose();
      jac.bottomLeftCorner(d, n) = m.constraint_jacobian(hd.d2(q, p1, h)) * hd.d22(q, p1, h);
      return jac;
    };
  }
  const auto sol = newton_solve(residual, jacobian,
                                detail::stack(p, detail::initial_multiplier(m, lam_guess)), cfg);
  ConstrainedStep out;
  out.p = sol.x.head(n);
  out.lam = sol.x.tail(d);
  out.q = hd.d2(q, out.p, h);
  out.newton_iters = sol.iterations;
  return out;
}

/// Discrete constrained left Hamilton's equations:
///   q_k = -D2 H_d^-(q_{k+1}, p_k),
///   p_{k+1} = -D1 H_d^-(q_{k+1}, p_k) - J_C(q_{k+1})^T lam_{k+1}.
///
/// The multiplier attached to a point is only determined once the following
/// point is required to be feasible. The step therefore takes the momentum
/// *before* the constraint force at q_k is applied, solves for lam_k together
/// with q_{k+1} subject to C(q_{k+1}) = 0, and returns the next pre-force
/// momentum -D1 H_d^-(q_{k+1}, p_k). The returned `lam` is the multiplier at
/// the incoming point q_k.
inline ConstrainedStep constrained_left_hamilton_step(const DiscreteHamiltonian& hd,
                                                      const EmbeddedManifold& m,
                                                      const Point& q, const Vector& p,
                                                      const NewtonConfig& cfg,
                                                      const Vector& lam_guess = {}) {
  if (hd.kind != DiscreteHamiltonian::Kind::left)
    throw InvalidArgument("constrained_left_hamilton_step: needs a left Hamiltonian");
  detail::require_feasible(m, q, "constrained_left_hamilton_step");
  const Eigen::Index n = m.ambient_dim();
  const Eigen::Index d = m.constraint_dim();
  const double h = hd.h;
  const Matrix jac_q = m.constraint_jacobian(q);

  auto residual = [&](const Vector& x) {
    const Vector q1 = x.head(n);
    const Vector pk = p - jac_q.transpose() * x.tail(d);
    return detail::stack(q + hd.d2(q1, pk, h), m.constraint(q1));
  };
  JacobianFn jacobian;
  if (hd.d12 && hd.d22) {
    jacobian = [&](const Vector& x) {
      const Vector q1 = x.head(n);
      const Vector pk = p - jac_q.transpose() * x.tail(d);
      Matrix jac = Matrix::Zero(n + d, n + d);
      jac.topLeftCorner(n, n) = hd.d12(q1, pk, h).transpose();
      jac.topRightCorner(n, d) = -hd.d22(q1, pk, h) * jac_q.transpose();
      jac.bottomLeftCorner(d, n) = m.constraint_jacobian(q1);
      return jac;
    };
  }
  const Vector q1_guess = 2.0 * q + hd.d2(q, p, h);
  const auto sol = newton_solve(
      residual, jacobian, detail::stack(q1_guess, detail::initial_multiplier(m, lam_guess)), cfg);
  ConstrainedStep out;
  out.q = sol.x.head(n);
  out.lam = sol.x.tail(d);
  out.p = -hd.d1(out.q, p - jac_q.transpose() * out.lam, h);
  out.newton_iters = sol.iterations;
  return out;
}

}  // namespace cvi
