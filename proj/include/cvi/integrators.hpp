#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvi/bregman.hpp"
#include "cvi/dynamics.hpp"
#include "cvi/problems.hpp"

namespace cvi {

enum class Method { htvi_direct, htvi_adaptive, el_v1, el_v2, rgd };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::htvi_direct: return "htvi_direct";
    case Method::htvi_adaptive: return "htvi_adaptive";
    case Method::el_v1: return "el_v1";
    case Method::el_v2: return "el_v2";
    case Method::rgd: return "rgd";
  }
  return {};
}

inline Method parse_method(std::string_view s) {
  if (s == "htvi_direct") return Method::htvi_direct;
  if (s == "htvi_adaptive") return Method::htvi_adaptive;
  if (s == "el_v1") return Method::el_v1;
  if (s == "el_v2") return Method::el_v2;
  if (s == "rgd") return Method::rgd;
  throw InvalidArgument("unknown method '" + std::string(s) + "'");
}

struct RunConfig {
  Method method = Method::htvi_adaptive;
  BregmanParams params;
  long max_iters = 10000;
  double stop_grad_tol = 1e-8;  ///< 0 disables the gradient test
  double stop_f_tol = 1e-8;     ///< 0 disables the oracle gap test
  std::uint64_t seed = 0;       ///< seed of the initial point drawn by the CLI
  bool momentum_projection = false;
  NewtonConfig newton;

  void validate() const {
    params.validate();
    newton.validate();
    if (max_iters < 0) throw InvalidArgument("run: max_iters must be >= 0");
    if (stop_grad_tol < 0 || stop_f_tol < 0)
      throw InvalidArgument("run: tolerances must be nonnegative");
  }
};

struct TraceRow {
  long k = 0;
  double t = 0.0;
  double f = 0.0;
  double grad_norm = 0.0;
  double constraint_violation = 0.0;
  std::optional<double> error_vs_oracle;
  std::optional<int> newton_iters;
};

struct Trace {
  std::string method;
  std::vector<TraceRow> rows;
  bool converged = false;
  bool failed = false;
  std::string failure;

  /// Iteration index of the last recorded row.
  long iterations() const { return rows.empty() ? 0 : rows.back().k; }
};

struct HtviResult {
  ExtendedState state;
  int newton_iters = 0;
};

namespace detail {

/// Finds lam with C(y - s J_C(q)^T lam) = 0. On the sphere this is a scalar
/// quadratic and the root of smallest magnitude is taken, which is the branch
/// that vanishes as h -> 0.
inline std::pair<Vector, int> solve_position_multiplier(const EmbeddedManifold& m,
                                                        const Point& q, const Vector& y,
                                                        double s, const Vector& guess,
                                                        const NewtonConfig& cfg) {
  const int d = m.constraint_dim();
  if (d == 0) return {Vector(0), 0};
  if (m.kind() == EmbeddedManifold::Kind::sphere) {
    // |y - mu q|^2 = 1 with mu = 2 s lam.
    const double a = q.squaredNorm();
    const double b = y.dot(q);
    const double c = y.squaredNorm() - 1.0;
    const double disc = b * b - a * c;
    if (!(disc >= 0.0))
      throw DegenerateError("htvi_step: no real multiplier keeps the iterate on the sphere");
    const double root = std::sqrt(disc);
    const double denom = b + (b >= 0.0 ? root : -root);
    const double mu = denom != 0.0 ? c / denom : root / a;
    return {Vector::Constant(1, mu / (2.0 * s)), 0};
  }
  const Matrix jac_t = m.constraint_jacobian(q).transpose();
  auto residual = [&](const Vector& lam) { return m.constraint(y - s * (jac_t * lam)); };
  auto jacobian = [&](const Vector& lam) {
    return Matrix(-s * m.constraint_jacobian(y - s * (jac_t * lam)) * jac_t);
  };
  const Vector x0 = guess.size() == d && guess.allFinite() ? guess : Vector::Zero(d);
  const auto sol = newton_solve(residual, jacobian, x0, cfg);
  return {sol.x, sol.iterations};
}

}  // namespace detail

/// One step of the constrained r = 0 Type II Hamiltonian Taylor variational
/// integrator for the direct or adaptive Bregman Hamiltonian. `grad_f` is the
/// ambient gradient at s.q; the gradient is evaluated at q_k only.
///
/// The update chain is: q^t closed form; (r_{k+1}, lam_k) from the momentum
/// update and C(q_{k+1}) = 0; r^t_{k+1}; q_{k+1}.
inline HtviResult htvi_step(BregmanFamily family, const BregmanParams& prm,
                            const EmbeddedManifold& m, const ExtendedState& s,
                            const Vector& grad_f, double f_val, const NewtonConfig& cfg) {
  if (!(s.q_t > 0)) throw DegenerateError("htvi_step: q_t must be positive");
  detail::require_feasible(m, s.q, "htvi_step");
  if (grad_f.size() != s.q.size() || s.r.size() != s.q.size())
    throw DimensionError("htvi_step: gradient or momentum size mismatch");

  const auto c = hamiltonian_coefficients(prm, s.q_t, family);
  const double gcoef = std::min(prm.coeff_cap, prm.h * c.potential);
  const double step = prm.h * 2.0 * c.kinetic;

  const Vector r_free = s.r - gcoef * grad_f;
  const Vector y = s.q + step * r_free;
  auto [lam, iters] = detail::solve_position_multiplier(m, s.q, y, step, s.lam, cfg);

  HtviResult out;
  out.newton_iters = iters;
  ExtendedState& next = out.state;
  next.r = r_free - m.jacobian_transpose_times(s.q, lam);
  next.q = s.q + step * next.r;
  next.r_t = (s.r_t - prm.h * (c.d_kinetic * next.r.squaredNorm() + c.d_potential * f_val)) /
             (1.0 + prm.h * c.d_time);
  next.q_t = s.q_t + prm.h * c.time;
  next.lam = std::move(lam);
  return out;
}

inline HtviResult htvi_step(bool adaptive, const BregmanParams& prm, const EmbeddedManifold& m,
                            const ExtendedState& s, const Vector& grad_f, double f_val,
                            const NewtonConfig& cfg) {
  return htvi_step(adaptive ? BregmanFamily::adaptive : BregmanFamily::direct, prm, m, s,
                   grad_f, f_val, cfg);
}

struct ElState {
  Point x;
  Tangent v;
};

using AmbientGradient = std::function<Vector(const Point&)>;

/// Semi-implicit Euler step of the p-Bregman Euler-Lagrange equations at
/// iteration k >= 1. Version 2 evaluates the gradient at R_X(h b_k V) and
/// projects it onto T_X.
inline ElState el_step(int version, const BregmanParams& prm, const EmbeddedManifold& m,
                       const Point& x, const Tangent& v, long k, const AmbientGradient& grad) {
  if (version != 1 && version != 2) throw InvalidArgument("el_step: version must be 1 or 2");
  const double b = 1.0 - (prm.lambda_conv * prm.p + 1.0) / static_cast<double>(k);
  const double c = el_grad_coefficient(prm, k);
  const Point at = version == 1 ? x : m.retract(x, prm.h * b * v);
  const Tangent a = b * v - prm.h * c * m.riemannian_gradient(x, grad(at));
  const Point x_next = m.retract(x, prm.h * a);
  return {x_next, m.transport(x, x_next, a)};
}

/// X_{k+1} = R_X(-h grad f(X)).
inline Point rgd_step(const EmbeddedManifold& m, const Point& x, double h,
                      const Vector& grad_ambient) {
  return m.retract(x, -h * m.riemannian_gradient(x, grad_ambient));
}

/// Iterates the configured method from `initial` until the stopping rule
/// fires, max_iters is reached or a step fails.
inline Trace run(const RunConfig& cfg, const ProblemSpec& prob, const Point& initial) {
  cfg.validate();
  const EmbeddedManifold& m = prob.manifold;
  detail::require_feasible(m, initial, "run");

  Trace trace;
  trace.method = to_string(cfg.method);
  const BregmanFamily family =
      cfg.method == Method::htvi_adaptive ? BregmanFamily::adaptive : BregmanFamily::direct;
  const bool is_htvi = cfg.method == Method::htvi_direct || cfg.method == Method::htvi_adaptive;

  ExtendedState state{initial, 1.0, Vector::Zero(initial.size()), 0.0,
                      Vector::Zero(m.constraint_dim())};
  Tangent velocity = Vector::Zero(initial.size());

  auto record = [&](long k, double t, const Point& q, const Vector& grad,
                    std::optional<int> iters) {
    TraceRow row;
    row.k = k;
    row.t = t;
    row.f = prob.f(q);
    row.constraint_violation = inf_norm(m.constraint(q));
    row.newton_iters = iters;
    if (!std::isfinite(row.f) || !q.allFinite()) {
      trace.rows.push_back(row);
      throw DegenerateError("run: non-finite iterate at k=" + std::to_string(k));
    }
    row.grad_norm = m.riemannian_gradient(q, grad).norm();
    if (prob.oracle_value) row.error_vs_oracle = row.f - *prob.oracle_value;
    trace.rows.push_back(row);
    const bool grad_ok = cfg.stop_grad_tol > 0 && row.grad_norm <= cfg.stop_grad_tol;
    const bool gap_ok = cfg.stop_f_tol > 0 && row.error_vs_oracle &&
                        std::abs(*row.error_vs_oracle) <= cfg.stop_f_tol;
    return grad_ok || gap_ok;
  };

  try {
    Vector grad = prob.ambient_grad(state.q);
    if (record(0, is_htvi ? state.q_t : 0.0, state.q, grad,
               is_htvi ? std::optional<int>(0) : std::nullopt)) {
      trace.converged = true;
      return trace;
    }
    for (long k = 1; k <= cfg.max_iters; ++k) {
      std::optional<int> iters;
      double t = static_cast<double>(k) * cfg.params.h;
      switch (cfg.method) {
        case Method::htvi_direct:
        case Method::htvi_adaptive: {
          auto res = htvi_step(family, cfg.params, m, state, grad, prob.f(state.q), cfg.newton);
          state = std::move(res.state);
          if (cfg.momentum_projection) state.r = project_momentum(m, state.q, state.r);
          iters = res.newton_iters;
          t = state.q_t;
          break;
        }
        case Method::el_v1:
        case Method::el_v2: {
          auto next = el_step(cfg.method == Method::el_v1 ? 1 : 2, cfg.params, m, state.q,
                              velocity, k, prob.ambient_grad);
          state.q = std::move(next.x);
          velocity = std::move(next.v);
          break;
        }
        case Method::rgd:
          state.q = rgd_step(m, state.q, cfg.params.h, grad);
          break;
      }
      grad = prob.ambient_grad(state.q);
      if (record(k, t, state.q, grad, iters)) {
        trace.converged = true;
        break;
      }
    }
  } catch (const Error& e) {
    trace.failed = true;
    trace.failure = e.what();
  }
  return trace;
}

}  // namespace cvi
