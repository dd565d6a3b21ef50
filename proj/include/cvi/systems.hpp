#pragma once

#include <cmath>

#include "cvi/dynamics.hpp"
#include "cvi/order_check.hpp"

namespace cvi::systems {

/// Midpoint discrete Lagrangian of L = |qdot|^2 / 2 - g q_3 in R^3, i.e. the
/// spherical pendulum once constrained to S^2.
inline DiscreteLagrangian spherical_pendulum_midpoint(double h, double g = 9.81) {
  DiscreteLagrangian ld;
  ld.h = h;
  ld.eval = [g](const Point& q0, const Point& q1, double step) {
    const Vector v = (q1 - q0) / step;
    return step * (0.5 * v.squaredNorm() - g * 0.5 * (q0[2] + q1[2]));
  };
  ld.d1 = [g](const Point& q0, const Point& q1, double step) {
    Vector out = -(q1 - q0) / step;
    out[2] -= 0.5 * step * g;
    return out;
  };
  ld.d2 = [g](const Point& q0, const Point& q1, double step) {
    Vector out = (q1 - q0) / step;
    out[2] -= 0.5 * step * g;
    return out;
  };
  ld.d12 = [](const Point& q0, const Point&, double step) {
    return Matrix(-Matrix::Identity(q0.size(), q0.size()) / step);
  };
  return ld;
}

/// Left-rectangle discrete Lagrangian h (|(q1 - q0)/h|^2 / 2 - g q0_3). It is
/// the Legendre transform of `quadratic_right(h, 0)` plus the gravity term.
inline DiscreteLagrangian spherical_pendulum_rectangle(double h, double g = 9.81) {
  DiscreteLagrangian ld;
  ld.h = h;
  ld.eval = [g](const Point& q0, const Point& q1, double step) {
    const Vector v = (q1 - q0) / step;
    return step * (0.5 * v.squaredNorm() - g * q0[2]);
  };
  ld.d1 = [g](const Point& q0, const Point& q1, double step) {
    Vector out = -(q1 - q0) / step;
    out[2] -= step * g;
    return out;
  };
  ld.d2 = [](const Point& q0, const Point& q1, double step) {
    return Vector((q1 - q0) / step);
  };
  ld.d12 = [](const Point& q0, const Point&, double step) {
    return Matrix(-Matrix::Identity(q0.size(), q0.size()) / step);
  };
  return ld;
}

/// Energy |P_q p|^2 / 2 + g q_3 on the sphere, with the momentum projected to
/// the tangent space first.
inline double spherical_pendulum_energy(const Point& q, const Vector& p, double g = 9.81) {
  const Vector v = p - q.dot(p) / q.squaredNorm() * q;
  return 0.5 * v.squaredNorm() + g * q[2];
}

/// H(q, p) = |p|^2 / 2 + omega^2 |q|^2 / 2 + g' q with optional linear
/// potential `force` (gradient of the potential is omega^2 q - force).
struct QuadraticHamiltonian {
  double omega2 = 1.0;
  Vector force;

  double value(const Point& q, const Vector& p) const {
    double v = 0.5 * p.squaredNorm() + 0.5 * omega2 * q.squaredNorm();
    if (force.size() == q.size()) v -= force.dot(q);
    return v;
  }
  Vector grad_q(const Point& q) const {
    Vector g = omega2 * q;
    if (force.size() == q.size()) g -= force;
    return g;
  }
};

/// r = 0, s = 1 Taylor variational integrator: H_d^+(q0, p1) = p1'q0 + h H(q0, p1).
inline DiscreteHamiltonian quadratic_right(double h, QuadraticHamiltonian H = {}) {
  DiscreteHamiltonian hd;
  hd.kind = DiscreteHamiltonian::Kind::right;
  hd.h = h;
  hd.eval = [H](const Point& q0, const Vector& p1, double step) {
    return p1.dot(q0) + step * H.value(q0, p1);
  };
  hd.d1 = [H](const Point& q0, const Vector& p1, double step) {
    return Vector(p1 + step * H.grad_q(q0));
  };
  hd.d2 = [](const Point& q0, const Vector& p1, double step) {
    return Vector(q0 + step * p1);
  };
  hd.d12 = [](const Point& q0, const Vector&, double) {
    return Matrix(Matrix::Identity(q0.size(), q0.size()));
  };
  hd.d22 = [](const Point& q0, const Vector&, double step) {
    return Matrix(step * Matrix::Identity(q0.size(), q0.size()));
  };
  return hd;
}

/// H_d^-(q1, p0) = -p0'q1 + h H(q1, p0).
inline DiscreteHamiltonian quadratic_left(double h, QuadraticHamiltonian H = {}) {
  DiscreteHamiltonian hd;
  hd.kind = DiscreteHamiltonian::Kind::left;
  hd.h = h;
  hd.eval = [H](const Point& q1, const Vector& p0, double step) {
    return -p0.dot(q1) + step * H.value(q1, p0);
  };
  hd.d1 = [H](const Point& q1, const Vector& p0, double step) {
    return Vector(-p0 + step * H.grad_q(q1));
  };
  hd.d2 = [](const Point& q1, const Vector& p0, double step) {
    return Vector(-q1 + step * p0);
  };
  hd.d12 = [](const Point& q1, const Vector&, double) {
    return Matrix(-Matrix::Identity(q1.size(), q1.size()));
  };
  hd.d22 = [](const Point& q1, const Vector&, double step) {
    return Matrix(step * Matrix::Identity(q1.size(), q1.size()));
  };
  return hd;
}

/// Exact flow of H = |p|^2/2 + omega^2 |q|^2/2 (no linear term).
inline std::pair<Vector, Vector> harmonic_flow(const Vector& q0, const Vector& p0,
                                               double omega2, double t) {
  const double w = std::sqrt(omega2);
  const double c = std::cos(w * t);
  const double s = std::sin(w * t);
  return {q0 * c + p0 * (s / w), -q0 * (w * s) + p0 * c};
}

}  // namespace cvi::systems

namespace cvi::systems {

/// A one-step map, its reference solution and an initial state for the
/// empirical order-of-accuracy check.
struct OrderSystem {
  StepMap step;
  ReferenceMap reference;
  Vector initial;
};

/// r = 0 right Hamiltonian Taylor integrator on H = |p|^2/2 + |q|^2/2 in R^2,
/// against the exact flow. State is [q; p].
inline OrderSystem quadratic_htvi_order_system() {
  const auto flat = EmbeddedManifold::euclidean(2);
  OrderSystem sys;
  sys.initial = Vector(4);
  sys.initial << 1.0, 0.5, 0.0, 1.0;
  sys.step = [flat](const Vector& x, double h) {
    NewtonConfig cfg;
    cfg.tol = 1e-13;
    const auto res =
        constrained_right_hamilton_step(quadratic_right(h), flat, x.head(2), x.tail(2), cfg);
    Vector out(4);
    out << res.q, res.p;
    return out;
  };
  sys.reference = [](const Vector& x0, double T) {
    const auto [q, p] = harmonic_flow(x0.head(2), x0.tail(2), 1.0, T);
    Vector out(4);
    out << q, p;
    return out;
  };
  return sys;
}

/// Constrained midpoint DEL step on the spherical pendulum in momentum form.
/// The stored momentum is projected onto T_q, which does not change the
/// position sequence because the normal part is absorbed by the multiplier.
inline Vector pendulum_step(const Vector& x, double h, double g) {
  static const auto sphere = EmbeddedManifold::sphere(3);
  NewtonConfig cfg;
  cfg.tol = 1e-10;  // residual scales like 1/h; this is ~1e-14 in position
  const auto res =
      constrained_del_momentum_step(spherical_pendulum_midpoint(h, g), sphere, x.head(3), x.tail(3), cfg);
  Vector out(6);
  out << res.q, project_momentum(sphere, res.q, res.p);
  return out;
}

inline Vector pendulum_initial_state() {
  Vector x(6);
  x << 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
  return x;
}

/// Reference is the same map at h_ref.
inline OrderSystem spherical_pendulum_order_system(double h_ref, double g = 9.81) {
  OrderSystem sys;
  sys.initial = pendulum_initial_state();
  sys.step = [g](const Vector& x, double h) { return pendulum_step(x, h, g); };
  sys.reference = [g, h_ref](const Vector& x0, double T) {
    const long steps = std::lround(T / h_ref);
    Vector x = x0;
    for (long k = 0; k < steps; ++k) x = pendulum_step(x, T / static_cast<double>(steps), g);
    return x;
  };
  return sys;
}

}  // namespace cvi::systems
