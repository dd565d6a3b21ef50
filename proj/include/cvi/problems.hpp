#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cvi/manifold.hpp"

namespace cvi {

/// Objective on an embedded manifold together with its ambient gradient and,
/// when one is known in closed form, the global optimum.
struct ProblemSpec {
  std::string name;
  EmbeddedManifold manifold;
  std::function<double(const Point&)> f;
  std::function<Vector(const Point&)> ambient_grad;
  std::optional<double> oracle_value;
  std::optional<Point> oracle_point;
};

struct EigenDecomposition {
  Vector values;   ///< ascending
  Matrix vectors;  ///< orthonormal columns, matching `values`
};

struct SvdResult {
  Matrix U;        ///< p-by-k, orthonormal columns, k = min(p, q)
  Vector sigma;    ///< nonincreasing, >= 0
  Matrix V;        ///< q-by-k, orthonormal columns
};

namespace detail {

inline double symmetry_defect(const Matrix& a) {
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

inline void require_symmetric(const Matrix& a, const char* op) {
  if (a.rows() != a.cols()) throw DimensionError(std::string(op) + ": matrix is not square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (symmetry_defect(a) > 1e-12 * scale)
    throw InvalidArgument(std::string(op) + ": matrix is not symmetric");
}

inline double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

/// Modified Gram-Schmidt, twice. Columns that vanish are replaced by
/// coordinate vectors orthogonal to the rest.
inline void orthonormalize_columns(Matrix& u) {
  const Eigen::Index p = u.rows();
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i) u.col(j) -= u.col(i).dot(u.col(j)) * u.col(i);
    double nrm = u.col(j).norm();
    for (Eigen::Index e = 0; nrm < 1e-8 && e < p; ++e) {
      u.col(j) = Vector::Unit(p, e);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index i = 0; i < j; ++i) u.col(j) -= u.col(i).dot(u.col(j)) * u.col(i);
      nrm = u.col(j).norm();
    }
    u.col(j) /= nrm;
  }
}

}  // namespace detail

/// Cyclic Jacobi eigensolver for dense symmetric matrices (desk scale,
/// n <= 200). Throws if the sweep budget runs out or the residual
/// |A V - V diag(values)|_inf exceeds `tol`.
inline EigenDecomposition jacobi_eigen(const Matrix& a_in, double tol = 1e-9,
                                       int max_sweeps = 100) {
  detail::require_symmetric(a_in, "jacobi_eigen");
  const Eigen::Index n = a_in.rows();
  if (n > 200) throw InvalidArgument("jacobi_eigen: dimension above 200");
  Matrix a = 0.5 * (a_in + a_in.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double target = 1e-15 * std::max(a.norm(), std::numeric_limits<double>::min());

  int sweep = 0;
  for (; sweep < max_sweeps && detail::off_diagonal_norm(a) > target; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (detail::off_diagonal_norm(a) > target && sweep == max_sweeps)
    throw Error("jacobi_eigen: sweep budget exhausted");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  const double residual =
      (a_in * out.vectors - out.vectors * out.values.asDiagonal()).cwiseAbs().maxCoeff();
  if (residual > tol) throw Error("jacobi_eigen: residual above tolerance");
  return out;
}

/// Thin SVD built on the Jacobi eigendecomposition of M'M (or MM').
inline SvdResult svd_small(const Matrix& mat) {
  if (mat.rows() > 200 || mat.cols() > 200) throw InvalidArgument("svd_small: dimension above 200");
  if (mat.rows() < mat.cols()) {
    SvdResult t = svd_small(mat.transpose());
    return {t.V, t.sigma, t.U};
  }
  const Eigen::Index k = mat.cols();
  const Matrix gram = mat.transpose() * mat;
  const auto eig = jacobi_eigen(gram, 1e-8 * std::max(1.0, gram.cwiseAbs().maxCoeff()));
  SvdResult out{Matrix(mat.rows(), k), Vector(k), Matrix(k, k)};
  const double smax = std::sqrt(std::max(0.0, eig.values[k - 1]));
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index src = k - 1 - i;
    out.V.col(i) = eig.vectors.col(src);
    const Vector mv = mat * out.V.col(i);
    out.sigma[i] = mv.norm();
    out.U.col(i) = out.sigma[i] > 1e-12 * std::max(1.0, smax) ? Vector(mv / out.sigma[i])
                                                             : Vector::Zero(mat.rows());
  }
  detail::orthonormalize_columns(out.U);
  return out;
}

/// f(v) = -v'Av on the unit sphere; minimizers are top eigenvectors of A.
inline ProblemSpec rayleigh(const Matrix& a) {
  detail::require_symmetric(a, "rayleigh");
  ProblemSpec prob{"rayleigh", EmbeddedManifold::sphere(static_cast<int>(a.rows())),
                   [a](const Point& v) { return -v.dot(a * v); },
                   [a](const Point& v) { return Vector(-2.0 * (a * v)); },
                   std::nullopt, std::nullopt};
  const auto eig = jacobi_eigen(a);
  const Eigen::Index top = a.rows() - 1;
  prob.oracle_value = -eig.values[top];
  prob.oracle_point = eig.vectors.col(top);
  return prob;
}

/// Brockett cost Trace(X'AXN) on St(m, n) with N = diag(mu), mu ascending and
/// nonnegative.
inline ProblemSpec brockett(const Matrix& a, const Vector& mu) {
  detail::require_symmetric(a, "brockett");
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(mu.size());
  if (m < 1 || m > n) throw DimensionError("brockett: need 1 <= m <= n");
  if (mu[0] < 0) throw InvalidArgument("brockett: mu must be nonnegative");
  for (int i = 1; i < m; ++i)
    if (mu[i] < mu[i - 1]) throw InvalidArgument("brockett: mu must be nondecreasing");

  const auto manifold = EmbeddedManifold::stiefel(n, m);
  ProblemSpec prob{"brockett", manifold,
                   [a, mu, n, m](const Point& x) {
                     const Eigen::Map<const Matrix> xm(x.data(), n, m);
                     return (xm.transpose() * a * xm * mu.asDiagonal()).trace();
                   },
                   [a, mu, n, m](const Point& x) {
                     const Eigen::Map<const Matrix> xm(x.data(), n, m);
                     const Matrix g = 2.0 * a * xm * mu.asDiagonal();
                     return Vector(Eigen::Map<const Vector>(g.data(), g.size()));
                   },
                   std::nullopt, std::nullopt};
  // Largest weight pairs with the smallest eigenvalue.
  const auto eig = jacobi_eigen(a);
  Matrix opt(n, m);
  double value = 0.0;
  for (int i = 0; i < m; ++i) {
    opt.col(i) = eig.vectors.col(m - 1 - i);
    value += mu[i] * eig.values[m - 1 - i];
  }
  prob.oracle_value = value;
  prob.oracle_point = Eigen::Map<const Vector>(opt.data(), opt.size());
  return prob;
}

/// ||AX - B||_F^2 on St(m, n), A l-by-n, B l-by-m. Closed-form optimum only in
/// the balanced case n = m.
inline ProblemSpec procrustes(const Matrix& a, const Matrix& b) {
  const int l = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  const int m = static_cast<int>(b.cols());
  if (b.rows() != l) throw DimensionError("procrustes: A and B need the same row count");
  if (l < n || l <= m) throw DimensionError("procrustes: need l >= n and l > m");
  if (m > n) throw DimensionError("procrustes: need m <= n");

  auto f = [a, b, n, m](const Point& x) {
    const Eigen::Map<const Matrix> xm(x.data(), n, m);
    return (a * xm - b).squaredNorm();
  };
  ProblemSpec prob{"procrustes", EmbeddedManifold::stiefel(n, m), f,
                   [a, b, n, m](const Point& x) {
                     const Eigen::Map<const Matrix> xm(x.data(), n, m);
                     const Matrix g = 2.0 * a.transpose() * (a * xm - b);
                     return Vector(Eigen::Map<const Vector>(g.data(), g.size()));
                   },
                   std::nullopt, std::nullopt};
  if (n == m) {
    // max Trace(X' A'B) over O(n) is attained at U V' with A'B = U S V'.
    const auto svd = svd_small(a.transpose() * b);
    const Matrix opt = svd.U * svd.V.transpose();
    prob.oracle_point = Eigen::Map<const Vector>(opt.data(), opt.size());
    prob.oracle_value = f(*prob.oracle_point);
  }
  return prob;
}

// Instance generation.

template <class Rng>
Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

template <class Rng>
Matrix random_orthogonal(Eigen::Index n, Rng& rng) {
  const Matrix g = random_gaussian(n, n, rng);
  const Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  for (Eigen::Index j = 0; j < n; ++j)
    if (qr.matrixQR()(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

/// A = Q diag(spectrum) Q' with eigenvalues spaced geometrically from 1 down
/// to 1/conditioning.
template <class Rng>
Matrix random_symmetric(Eigen::Index n, double conditioning, Rng& rng) {
  if (!(conditioning >= 1.0)) throw InvalidArgument("random_symmetric: conditioning must be >= 1");
  Vector spectrum(n);
  for (Eigen::Index i = 0; i < n; ++i)
    spectrum[i] = n == 1 ? 1.0
                         : std::pow(conditioning, -static_cast<double>(i) /
                                                      static_cast<double>(n - 1));
  const Matrix q = random_orthogonal(n, rng);
  Matrix a = q * spectrum.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

}  // namespace cvi
