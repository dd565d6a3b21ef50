#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cvi/systems.hpp"
#include "test_util.hpp"

using cvi::EmbeddedManifold;
using cvi::Matrix;
using cvi::NewtonConfig;
using cvi::Vector;
using testutil::vec;
namespace sys = cvi::systems;

TEST(Legendre, FreeParticle) {
  const double h = 0.1;
  const auto ld = sys::spherical_pendulum_midpoint(h, 0.0);
  const Vector q = vec({0.3, -0.2, 0.5});
  EXPECT_EQ(cvi::legendre_plus(ld, q, q), Vector::Zero(3));
  EXPECT_EQ(cvi::legendre_minus(ld, q, q), Vector::Zero(3));
  const Vector p1 = cvi::legendre_plus(ld, Vector::Zero(3), vec({h, 0, 0}));
  EXPECT_NEAR(p1[0], 1.0, 1e-15);
  EXPECT_NEAR(p1[1], 0.0, 1e-15);
  // translation invariance gives p0 = p1
  const Vector a = vec({1, 2, 3}), b = vec({1.5, 1.0, 2.0});
  EXPECT_LE((cvi::legendre_minus(ld, a, b) - cvi::legendre_plus(ld, a, b)).norm(), 1e-15);
}

TEST(DiscreteLagrangian, PartialsMatchFiniteDifferences) {
  const double h = 0.05;
  for (const auto& ld : {sys::spherical_pendulum_midpoint(h), sys::spherical_pendulum_rectangle(h)}) {
    const Vector q0 = vec({0.3, -0.4, 0.8}), q1 = vec({0.35, -0.38, 0.79});
    auto f0 = [&](const Vector& x) { return ld.eval(x, q1, h); };
    auto f1 = [&](const Vector& x) { return ld.eval(q0, x, h); };
    EXPECT_LE((testutil::fd_gradient(f0, q0) - ld.d1(q0, q1, h)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((testutil::fd_gradient(f1, q1) - ld.d2(q0, q1, h)).cwiseAbs().maxCoeff(), 1e-6);
    // d12 = d(D1)/d q1
    Matrix fd(3, 3);
    for (int j = 0; j < 3; ++j) {
      Vector qp = q1, qm = q1;
      qp[j] += 1e-6;
      qm[j] -= 1e-6;
      fd.col(j) = (ld.d1(q0, qp, h) - ld.d1(q0, qm, h)) / 2e-6;
    }
    EXPECT_LE((fd - ld.d12(q0, q1, h)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(DiscreteHamiltonian, PartialsMatchFiniteDifferences) {
  const double h = 0.07;
  sys::QuadraticHamiltonian H{0.8, vec({0.1, -0.3})};
  for (const auto& hd : {sys::quadratic_right(h, H), sys::quadratic_left(h, H)}) {
    const Vector q = vec({0.4, 1.1}), p = vec({-0.2, 0.6});
    auto fq = [&](const Vector& x) { return hd.eval(x, p, h); };
    auto fp = [&](const Vector& x) { return hd.eval(q, x, h); };
    EXPECT_LE((testutil::fd_gradient(fq, q) - hd.d1(q, p, h)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((testutil::fd_gradient(fp, p) - hd.d2(q, p, h)).cwiseAbs().maxCoeff(), 1e-6);
    Matrix fd12(2, 2), fd22(2, 2);
    for (int j = 0; j < 2; ++j) {
      Vector pp = p, pm = p;
      pp[j] += 1e-6;
      pm[j] -= 1e-6;
      fd12.col(j) = (hd.d1(q, pp, h) - hd.d1(q, pm, h)) / 2e-6;
      fd22.col(j) = (hd.d2(q, pp, h) - hd.d2(q, pm, h)) / 2e-6;
    }
    EXPECT_LE((fd12 - hd.d12(q, p, h)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((fd22 - hd.d22(q, p, h)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(ProjectMomentum, Examples) {
  const auto s = EmbeddedManifold::sphere(2);
  const Vector out = cvi::project_momentum(s, vec({1, 0}), vec({5, 1}));
  EXPECT_NEAR(out[0], 0.0, 1e-15);
  EXPECT_NEAR(out[1], 1.0, 1e-15);
  std::mt19937_64 rng(3);
  const auto st = EmbeddedManifold::stiefel(4, 2);
  for (int i = 0; i < 10; ++i) {
    const Vector q = st.random_point(rng);
    const Vector p = Vector::Random(8);
    const Vector once = cvi::project_momentum(st, q, p);
    EXPECT_LE((cvi::project_momentum(st, q, once) - once).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ConstrainedDel, FreeParticleAtRest) {
  const auto s = EmbeddedManifold::sphere(3);
  const auto ld = sys::spherical_pendulum_midpoint(0.1, 0.0);
  const Vector q = vec({0, 0.6, 0.8});
  const auto step = cvi::constrained_del_step(ld, s, q, q, NewtonConfig{});
  EXPECT_LE((step.q - q).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE(step.lam.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(step.newton_iters, 0);
}

TEST(ConstrainedDel, SatisfiesDiscreteEulerLagrange) {
  const auto s = EmbeddedManifold::sphere(3);
  const double h = 0.05;
  const auto ld = sys::spherical_pendulum_midpoint(h);
  const Vector q0 = vec({1, 0, 0});
  const Vector q1 = s.retract(q0, vec({0, h, -0.01}));
  const auto step = cvi::constrained_del_step(ld, s, q0, q1, NewtonConfig{});
  const Vector el = ld.d1(q1, step.q, h) + ld.d2(q0, q1, h) -
                    s.constraint_jacobian(q1).transpose() * step.lam;
  EXPECT_LE(el.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE(std::abs(s.constraint(step.q)[0]), 1e-10);
}

TEST(ConstrainedDel, UnconstrainedLimitIsImplicitDel) {
  const auto flat = EmbeddedManifold::euclidean(3);
  const double h = 0.1;
  const auto ld = sys::spherical_pendulum_midpoint(h);
  const Vector q0 = vec({0.1, 0.2, 0.3}), q1 = vec({0.15, 0.2, 0.28});
  const auto step = cvi::constrained_del_step(ld, flat, q0, q1, NewtonConfig{});
  EXPECT_EQ(step.lam.size(), 0);
  EXPECT_LE((ld.d1(q1, step.q, h) + ld.d2(q0, q1, h)).cwiseAbs().maxCoeff(), 1e-10);
  // free fall: q2 = 2 q1 - q0 - h^2 g e3
  Vector expected = 2 * q1 - q0;
  expected[2] -= h * h * 9.81;
  EXPECT_LE((step.q - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ConstrainedDel, PendulumStaysOnSphereAndConverges) {
  const auto s = EmbeddedManifold::sphere(3);
  auto integrate = [&](double h, double T) {
    Vector x = sys::pendulum_initial_state();
    double worst = 0.0;
    for (long k = 0; k < std::lround(T / h); ++k) {
      x = sys::pendulum_step(x, h, 9.81);
      worst = std::max(worst, std::abs(s.constraint(x.head(3))[0]));
    }
    return std::make_pair(x, worst);
  };
  const auto [coarse, v1] = integrate(1e-2, 0.5);
  const auto [ref, v2] = integrate(1e-4, 0.5);
  EXPECT_LE(v1, 1e-10);
  EXPECT_LE(v2, 1e-10);
  EXPECT_LE((coarse.head(3) - ref.head(3)).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(ConstrainedDel, RankDeficientConstraintThrows) {
  // q = 0 is not feasible on the sphere; the step refuses it
  const auto s = EmbeddedManifold::sphere(3);
  const auto ld = sys::spherical_pendulum_midpoint(0.1);
  EXPECT_THROW(cvi::constrained_del_momentum_step(ld, s, Vector::Zero(3), Vector::Zero(3),
                                                  NewtonConfig{}),
               cvi::InfeasibleError);
}

TEST(RightHamilton, UnconstrainedIsSymplecticEuler) {
  const auto flat = EmbeddedManifold::euclidean(2);
  const double h = 0.1;
  const Vector q = vec({1, 0.5}), p = vec({0, 1});
  const auto step = cvi::constrained_right_hamilton_step(sys::quadratic_right(h), flat, q, p,
                                                         NewtonConfig{});
  const Vector p1 = p - h * q;
  const Vector q1 = q + h * p1;
  EXPECT_LE((step.p - p1).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((step.q - q1).cwiseAbs().maxCoeff(), 1e-14);

  // free particle: momentum is constant
  const auto free = cvi::constrained_right_hamilton_step(
      sys::quadratic_right(h, {0.0, {}}), flat, q, p, NewtonConfig{});
  EXPECT_EQ(free.p, p);
}

TEST(RightHamilton, SphereFeasibilityOverThousandSteps) {
  const auto s = EmbeddedManifold::sphere(3);
  const auto hd = sys::quadratic_right(0.01, {0.0, {}});
  Vector q = vec({1, 0, 0}), p = vec({0, 1, 0.5});
  Vector lam;
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto step = cvi::constrained_right_hamilton_step(hd, s, q, p, NewtonConfig{}, lam);
    q = step.q;
    p = step.p;
    lam = step.lam;
    worst = std::max(worst, std::abs(s.constraint(q)[0]));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(RightHamilton, ZeroStepIsIdentity) {
  const auto s = EmbeddedManifold::sphere(3);
  const Vector q = vec({0, 0, 1}), p = vec({0.3, -0.1, 0});
  const auto step =
      cvi::constrained_right_hamilton_step(sys::quadratic_right(0.0), s, q, p, NewtonConfig{});
  EXPECT_EQ(step.q, q);
  EXPECT_EQ(step.p, p);
  EXPECT_EQ(step.lam, Vector::Zero(1));
}

TEST(LeftHamilton, ZeroStepIsIdentity) {
  const auto s = EmbeddedManifold::sphere(3);
  const Vector q = vec({0, 0, 1}), p = vec({0.3, -0.1, 0});
  const auto step =
      cvi::constrained_left_hamilton_step(sys::quadratic_left(0.0), s, q, p, NewtonConfig{});
  EXPECT_LE((step.q - q).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((step.p - p).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE(step.lam.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LeftHamilton, AdjointOfRightMap) {
  // left(h) undoes right(-h) on the unconstrained quadratic system
  const auto flat = EmbeddedManifold::euclidean(3);
  sys::QuadraticHamiltonian H{2.0, vec({0.1, 0.0, -0.4})};
  const double h = 0.05;
  const Vector q = vec({0.3, -1.0, 0.2}), p = vec({0.5, 0.1, -0.7});
  NewtonConfig cfg;
  cfg.tol = 1e-13;
  const auto back = cvi::constrained_right_hamilton_step(sys::quadratic_right(-h, H), flat, q, p, cfg);
  const auto fwd = cvi::constrained_left_hamilton_step(sys::quadratic_left(h, H), flat, back.q,
                                                       back.p, cfg);
  EXPECT_LE((fwd.q - q).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((fwd.p - p).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LeftHamilton, SatisfiesLeftHamiltonEquationsOnSphere) {
  const auto s = EmbeddedManifold::sphere(3);
  const double h = 0.02;
  sys::QuadraticHamiltonian H{0.0, vec({0, 0, -9.81})};
  const auto hd = sys::quadratic_left(h, H);
  Vector q = vec({1, 0, 0}), p = vec({0, 1, 0});
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const auto step = cvi::constrained_left_hamilton_step(hd, s, q, p, NewtonConfig{});
    const Vector pk = p - s.constraint_jacobian(q).transpose() * step.lam;
    // q_k = -D2 H^-(q_{k+1}, p_k)
    EXPECT_LE((q + hd.d2(step.q, pk, h)).cwiseAbs().maxCoeff(), 1e-10);
    worst = std::max(worst, std::abs(s.constraint(step.q)[0]));
    q = step.q;
    p = step.p;
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Equivalence, LagrangianAndRightHamiltonianMapsAgree) {
  const auto s = EmbeddedManifold::sphere(3);
  const double h = 0.01, g = 9.81;
  const auto ld = sys::spherical_pendulum_rectangle(h, g);
  const auto hd = sys::quadratic_right(h, {0.0, vec({0, 0, -g})});
  NewtonConfig cfg;
  cfg.tol = 1e-12;
  Vector ql = vec({0.6, 0, 0.8}), pl = vec({0, 1.2, 0});
  Vector qh = ql, ph = pl;
  for (int k = 0; k < 100; ++k) {
    const auto a = cvi::constrained_del_momentum_step(ld, s, ql, pl, cfg);
    const auto b = cvi::constrained_right_hamilton_step(hd, s, qh, ph, cfg);
    if (k == 0) {
      EXPECT_LE((a.q - b.q).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LE((a.p - b.p).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LE((a.lam - b.lam).cwiseAbs().maxCoeff(), 1e-10);
    }
    ql = a.q;
    pl = a.p;
    qh = b.q;
    ph = b.p;
  }
  EXPECT_LE((ql - qh).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Energy, ErrorBandScalesLikeHSquared) {
  auto band = [](double h) {
    Vector x = sys::pendulum_initial_state();
    const double e0 = sys::spherical_pendulum_energy(x.head(3), x.tail(3));
    double worst = 0.0;
    for (long k = 0; k < std::lround(5.0 / h); ++k) {
      x = sys::pendulum_step(x, h, 9.81);
      worst = std::max(worst, std::abs(sys::spherical_pendulum_energy(x.head(3), x.tail(3)) - e0));
    }
    return worst;
  };
  const double ratio = band(0.02) / band(0.01);
  EXPECT_GT(ratio, 3.0);
  EXPECT_LT(ratio, 5.0);
}

TEST(OrderCheck, QuadraticHtviIsFirstOrder) {
  const auto s = sys::quadratic_htvi_order_system();
  const auto res = cvi::order_check(s.step, s.reference, s.initial, {0.1, 0.05, 0.025, 0.0125}, 1.0);
  EXPECT_FALSE(res.noise_floor);
  EXPECT_GE(res.rate, 0.85);
  EXPECT_LE(res.rate, 1.15);
}

TEST(OrderCheck, PendulumMidpointIsSecondOrder) {
  const std::vector<double> hs{0.1, 0.05, 0.025, 0.0125};
  const auto s = sys::spherical_pendulum_order_system(0.0125 / 100);
  const auto res = cvi::order_check(s.step, s.reference, s.initial, hs, 1.0);
  EXPECT_GE(res.rate, 1.8);
  EXPECT_LE(res.rate, 2.2);
}

TEST(OrderCheck, ExactMapIsFlagged) {
  auto exact = [](const Vector& x, double h) {
    const auto [q, p] = sys::harmonic_flow(x.head(1), x.tail(1), 1.0, h);
    return vec({q[0], p[0]});
  };
  auto ref = [](const Vector& x, double T) {
    const auto [q, p] = sys::harmonic_flow(x.head(1), x.tail(1), 1.0, T);
    return vec({q[0], p[0]});
  };
  const auto res = cvi::order_check(exact, ref, vec({1, 0}), {0.5, 0.25, 0.125}, 1.0);
  EXPECT_TRUE(res.noise_floor);
  EXPECT_TRUE(std::isnan(res.rate));
  EXPECT_FALSE(res.warnings.empty());
}

TEST(OrderCheck, InputValidation) {
  auto id = [](const Vector& x, double) { return x; };
  EXPECT_THROW(cvi::order_check(id, id, vec({1}), {0.1, 0.05}, 1.0), cvi::InvalidArgument);
  EXPECT_THROW(cvi::order_check(id, id, vec({1}), {0.1, 0.2, 0.05}, 1.0), cvi::InvalidArgument);
  EXPECT_THROW(cvi::order_check(id, id, vec({1}), {0.3, 0.2, 0.1}, 1.0), cvi::InvalidArgument);
  EXPECT_THROW(cvi::order_check(id, id, vec({1}), {0.1, 0.05, 0.025}, 0.0), cvi::InvalidArgument);
}

TEST(OrderCheck, LogLogSlope) {
  EXPECT_NEAR(cvi::log_log_slope({1, 2, 4}, {3, 12, 48}), 2.0, 1e-14);
}
