#pragma once

#include <cmath>
#include <limits>

#include "cvi/errors.hpp"
#include "cvi/types.hpp"

namespace cvi {

/// Parameters of the p-Bregman Hamiltonian family.
struct BregmanParams {
  double p = 6.0;            ///< convergence exponent
  double p_ring = 4.0;       ///< target exponent of the adaptive family
  double c_const = 1.0;      ///< constant C in front of f
  double lambda_conv = 1.0;  ///< zeta (geodesically convex) or zeta/alpha (WQC)
  double h = 1e-3;           ///< timestep
  double coeff_cap = 1e6;    ///< upper bound on the coefficient of grad f

  void validate() const {
    if (!(p > 0) || !(p_ring > 0) || !(c_const > 0) || !(h > 0))
      throw InvalidArgument("bregman: p, p_ring, c_const and h must be positive");
    if (!(lambda_conv >= 1.0))
      throw InvalidArgument("bregman: lambda_conv must be >= 1");
    if (!(coeff_cap > 0))
      throw InvalidArgument("bregman: coeff_cap must be positive");
  }
};

/// Point of the extended phase space plus the multipliers of the last step.
struct ExtendedState {
  Point q;
  double q_t = 1.0;
  Vector r;
  double r_t = 0.0;
  Vector lam;
};

enum class BregmanFamily { direct, adaptive };

/// zeta = sqrt(-K) D coth(sqrt(-K) D) for K < 0, otherwise 1.
inline double compute_zeta(double k_min, double diameter) {
  if (!(diameter > 0)) throw InvalidArgument("compute_zeta: diameter must be positive");
  if (k_min >= 0.0) return 1.0;
  const double x = std::sqrt(-k_min) * diameter;
  return x / std::tanh(x);
}

/// The Hamiltonians are H = kinetic(t) r'r + potential(t) f + time(t) r^t,
/// with t = q^t. This holds each coefficient and its t-derivative.
struct HamiltonianCoefficients {
  double kinetic, d_kinetic;
  double potential, d_potential;
  double time, d_time;
};

inline HamiltonianCoefficients hamiltonian_coefficients(const BregmanParams& prm,
                                                        double q_t,
                                                        BregmanFamily family) {
  if (!(q_t > 0)) throw DegenerateError("bregman: time coordinate q_t must be positive");
  const double p = prm.p;
  const double lam = prm.lambda_conv;
  HamiltonianCoefficients c{};
  if (family == BregmanFamily::direct) {
    const double ek = -lam * p - 1.0;
    const double ev = (lam + 1.0) * p - 1.0;
    c.kinetic = 0.5 * p * std::pow(q_t, ek);
    c.d_kinetic = 0.5 * p * ek * std::pow(q_t, ek - 1.0);
    c.potential = prm.c_const * p * std::pow(q_t, ev);
    c.d_potential = prm.c_const * p * ev * std::pow(q_t, ev - 1.0);
    c.time = 1.0;
    c.d_time = 0.0;
  } else {
    const double ratio = prm.p_ring / p;
    const double ek = -lam * p - ratio;
    const double ev = (lam + 1.0) * p - ratio;
    const double et = 1.0 - ratio;
    c.kinetic = p * p / (2.0 * prm.p_ring) * std::pow(q_t, ek);
    c.d_kinetic = p * p / (2.0 * prm.p_ring) * ek * std::pow(q_t, ek - 1.0);
    c.potential = prm.c_const * p * p / prm.p_ring * std::pow(q_t, ev);
    c.d_potential = prm.c_const * p * p / prm.p_ring * ev * std::pow(q_t, ev - 1.0);
    c.time = p / prm.p_ring * std::pow(q_t, et);
    c.d_time = p / prm.p_ring * et * std::pow(q_t, et - 1.0);
  }
  return c;
}

/// `in_prod` is <<r, r>>, i.e. r'r under the inherited metric.
inline double hamiltonian(const BregmanParams& prm, BregmanFamily family,
                          const ExtendedState& s, double f_val, double in_prod) {
  const auto c = hamiltonian_coefficients(prm, s.q_t, family);
  return c.kinetic * in_prod + c.potential * f_val + c.time * s.r_t;
}

inline double hamiltonian_direct(const BregmanParams& prm, const ExtendedState& s,
                                 double f_val, double in_prod) {
  return hamiltonian(prm, BregmanFamily::direct, s, f_val, in_prod);
}

inline double hamiltonian_adaptive(const BregmanParams& prm, const ExtendedState& s,
                                   double f_val, double in_prod) {
  return hamiltonian(prm, BregmanFamily::adaptive, s, f_val, in_prod);
}

struct HamiltonianPartials {
  Vector d_q;
  double d_qt;
  Vector d_r;
  double d_rt;
};

/// Exact partial derivatives with respect to q, q^t, r and r^t.
inline HamiltonianPartials hamiltonian_partials(const BregmanParams& prm,
                                                BregmanFamily family,
                                                const ExtendedState& s, double f_val,
                                                const Vector& grad_f) {
  const auto c = hamiltonian_coefficients(prm, s.q_t, family);
  return {c.potential * grad_f,
          c.d_kinetic * s.r.squaredNorm() + c.d_potential * f_val + c.d_time * s.r_t,
          2.0 * c.kinetic * s.r, c.time};
}

/// h times the potential coefficient, capped: the factor in front of grad f
/// in the HTVI momentum update.
inline double grad_coefficient(const BregmanParams& prm, double q_t, BregmanFamily family) {
  const auto c = hamiltonian_coefficients(prm, q_t, family);
  return std::min(prm.coeff_cap, prm.h * c.potential);
}

inline double grad_coefficient(const BregmanParams& prm, double q_t, bool adaptive) {
  return grad_coefficient(prm, q_t,
                          adaptive ? BregmanFamily::adaptive : BregmanFamily::direct);
}

/// C p^2 (k h)^{p-2}, capped: the coefficient of grad f in the semi-implicit
/// Euler-Lagrange discretization at iteration k.
inline double el_grad_coefficient(const BregmanParams& prm, long k) {
  if (k < 1) throw InvalidArgument("el_grad_coefficient: k must be >= 1");
  const double raw = prm.c_const * prm.p * prm.p *
                     std::pow(static_cast<double>(k) * prm.h, prm.p - 2.0);
  return std::min(prm.coeff_cap, raw);
}

}  // namespace cvi
