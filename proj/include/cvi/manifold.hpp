#pragma once

#include <cmath>
#include <random>
#include <string>
#include <string_view>

#include "cvi/errors.hpp"
#include "cvi/types.hpp"

namespace cvi {

/// Submanifold of R^N given as the zero level set of a constraint map C.
///
/// Supported instances are the unit sphere S^{n-1} in R^n and the Stiefel
/// manifold St(m, n) of n-by-m matrices with orthonormal columns. The
/// `euclidean` kind has no constraints (d = 0) and lets the constrained
/// integrators run in the plain vector-space setting.
///
/// The metric is the one inherited from the ambient Euclidean/Frobenius inner
/// product, so tangent and cotangent vectors share coordinates.
class EmbeddedManifold {
 public:
  enum class Kind { euclidean, sphere, stiefel };

  static EmbeddedManifold euclidean(int n) {
    if (n < 1) throw InvalidArgument("euclidean: dimension must be >= 1");
    return EmbeddedManifold(Kind::euclidean, n, 1);
  }

  static EmbeddedManifold sphere(int n) {
    if (n < 2) throw InvalidArgument("sphere: ambient dimension must be >= 2");
    return EmbeddedManifold(Kind::sphere, n, 1);
  }

  static EmbeddedManifold stiefel(int n, int m) {
    if (m < 1 || n < m || n < 2)
      throw InvalidArgument("stiefel: need n >= m >= 1 and n >= 2");
    return EmbeddedManifold(Kind::stiefel, n, m);
  }

  /// Parses "sphere:n", "stiefel:n,m" or "euclidean:n".
  static EmbeddedManifold parse(std::string_view spec);

  Kind kind() const noexcept { return kind_; }
  int rows() const noexcept { return n_; }
  int cols() const noexcept { return m_; }

  int ambient_dim() const noexcept {
    return kind_ == Kind::stiefel ? n_ * m_ : n_;
  }

  int constraint_dim() const noexcept {
    switch (kind_) {
      case Kind::euclidean: return 0;
      case Kind::sphere: return 1;
      case Kind::stiefel: return m_ * (m_ + 1) / 2;
    }
    return 0;
  }

  std::string name() const {
    switch (kind_) {
      case Kind::euclidean: return "euclidean:" + std::to_string(n_);
      case Kind::sphere: return "sphere:" + std::to_string(n_);
      case Kind::stiefel:
        return "stiefel:" + std::to_string(n_) + "," + std::to_string(m_);
    }
    return {};
  }

  /// C(q). Sphere: [q'q - 1]. Stiefel: upper triangle (with diagonal) of
  /// X'X - I, row-major.
  Vector constraint(const Point& q) const {
    check_dim(q, "constraint");
    switch (kind_) {
      case Kind::euclidean: return Vector(0);
      case Kind::sphere: return Vector::Constant(1, q.squaredNorm() - 1.0);
      case Kind::stiefel: {
        const Matrix gram = as_matrix(q).transpose() * as_matrix(q);
        Vector c(constraint_dim());
        int k = 0;
        for (int i = 0; i < m_; ++i)
          for (int j = i; j < m_; ++j)
            c[k++] = gram(i, j) - (i == j ? 1.0 : 0.0);
        return c;
      }
    }
    return {};
  }

  /// d-by-N Jacobian of C; row k is the gradient of component k.
  Matrix constraint_jacobian(const Point& q) const {
    check_dim(q, "constraint_jacobian");
    Matrix jac = Matrix::Zero(constraint_dim(), ambient_dim());
    switch (kind_) {
      case Kind::euclidean: break;
      case Kind::sphere: jac.row(0) = 2.0 * q.transpose(); break;
      case Kind::stiefel: {
        // d(X'X)_ij / dX puts column j of X into column i and vice versa.
        int k = 0;
        for (int i = 0; i < m_; ++i) {
          for (int j = i; j < m_; ++j, ++k) {
            jac.block(k, i * n_, 1, n_) += q.segment(j * n_, n_).transpose();
            jac.block(k, j * n_, 1, n_) += q.segment(i * n_, n_).transpose();
          }
        }
        break;
      }
    }
    return jac;
  }

  /// J_C(q)^T lam without forming the Jacobian.
  Vector jacobian_transpose_times(const Point& q, const Vector& lam) const {
    check_dim(q, "jacobian_transpose_times");
    if (lam.size() != constraint_dim())
      throw DimensionError("jacobian_transpose_times: multiplier size mismatch");
    switch (kind_) {
      case Kind::euclidean: return Vector::Zero(ambient_dim());
      case Kind::sphere: return 2.0 * lam[0] * q;
      case Kind::stiefel: {
        Matrix sym = Matrix::Zero(m_, m_);
        int k = 0;
        for (int i = 0; i < m_; ++i)
          for (int j = i; j < m_; ++j, ++k) {
            sym(i, j) += lam[k];
            sym(j, i) += lam[k];
          }
        Matrix out = as_matrix(q) * sym;
        return Eigen::Map<const Vector>(out.data(), out.size());
      }
    }
    return {};
  }

  double feasibility_tolerance() const noexcept { return feas_tol_; }
  void set_feasibility_tolerance(double tol) { feas_tol_ = tol; }

  bool is_feasible(const Point& q) const {
    return q.size() == ambient_dim() && q.allFinite() &&
           inf_norm(constraint(q)) <= feas_tol_;
  }

  /// Orthogonal projection onto T_q. Sphere: z - (q'z) q. Stiefel:
  /// Z - X sym(X'Z).
  Tangent tangent_project(const Point& q, const Vector& z) const {
    require_feasible(q, "tangent_project");
    if (z.size() != ambient_dim())
      throw DimensionError("tangent_project: vector size mismatch");
    return project_unchecked(q, z);
  }

  Tangent riemannian_gradient(const Point& q, const Vector& ambient_grad) const {
    return tangent_project(q, ambient_grad);
  }

  /// Sphere: (q+v)/|q+v|. Stiefel: Q factor of X+xi with positive R diagonal.
  Point retract(const Point& q, const Tangent& v) const {
    check_dim(q, "retract");
    if (v.size() != ambient_dim())
      throw DimensionError("retract: tangent size mismatch");
    if (v.isZero(0.0)) return q;
    switch (kind_) {
      case Kind::euclidean: return q + v;
      case Kind::sphere: {
        const Vector y = q + v;
        const double norm = y.norm();
        if (!(norm > 0.0) || !std::isfinite(norm))
          throw DegenerateError("retract: q + v is zero or non-finite");
        return y / norm;
      }
      case Kind::stiefel: return qf(as_matrix(q) + as_matrix(v));
    }
    return {};
  }

  /// Moves v from T_{from} to T_{to}. Exact parallel transport along the
  /// great circle on the sphere; projection transport on Stiefel.
  Tangent transport(const Point& from, const Point& to, const Tangent& v) const {
    check_dim(from, "transport");
    check_dim(to, "transport");
    if (v.size() != ambient_dim())
      throw DimensionError("transport: tangent size mismatch");
    switch (kind_) {
      case Kind::euclidean: return v;
      case Kind::sphere: {
        const double c = from.dot(to);
        Vector u = to - c * from;
        const double s = u.norm();
        if (s <= 1e-15) {
          if (c > 0.0) return v;
          throw DegenerateError("transport: antipodal points on the sphere");
        }
        u /= s;
        const double angle = std::atan2(s, c);
        const double along = u.dot(v);
        return v + ((std::cos(angle) - 1.0) * u - std::sin(angle) * from) * along;
      }
      case Kind::stiefel:
        require_feasible(to, "transport");
        return project_unchecked(to, v);
    }
    return {};
  }

  /// Draws a feasible point from a Gaussian in the ambient space.
  template <class Rng>
  Point random_point(Rng& rng) const {
    std::normal_distribution<double> normal;
    Vector z(ambient_dim());
    for (auto& x : z) x = normal(rng);
    switch (kind_) {
      case Kind::euclidean: return z;
      case Kind::sphere: return z / z.norm();
      case Kind::stiefel: return qf(as_matrix(z));
    }
    return z;
  }

  template <class Rng>
  Tangent random_tangent(const Point& q, Rng& rng) const {
    std::normal_distribution<double> normal;
    Vector z(ambient_dim());
    for (auto& x : z) x = normal(rng);
    return tangent_project(q, z);
  }

  Eigen::Map<const Matrix> as_matrix(const Vector& v) const {
    return Eigen::Map<const Matrix>(v.data(), n_, kind_ == Kind::stiefel ? m_ : 1);
  }

 private:
  EmbeddedManifold(Kind kind, int n, int m) : kind_(kind), n_(n), m_(m) {}

  void check_dim(const Vector& q, const char* op) const {
    if (q.size() != ambient_dim())
      throw DimensionError(std::string(op) + ": expected ambient dimension " +
                           std::to_string(ambient_dim()) + ", got " +
                           std::to_string(q.size()));
  }

  void require_feasible(const Point& q, const char* op) const {
    check_dim(q, op);
    if (inf_norm(constraint(q)) > feas_tol_)
      throw InfeasibleError(std::string(op) + ": base point is not on " + name());
  }

  Tangent project_unchecked(const Point& q, const Vector& z) const {
    switch (kind_) {
      case Kind::euclidean: return z;
      case Kind::sphere: return z - q.dot(z) * q;
      case Kind::stiefel: {
        const auto x = as_matrix(q);
        const auto zm = as_matrix(z);
        const Matrix xtz = x.transpose() * zm;
        Matrix out = zm - 0.5 * x * (xtz + xtz.transpose());
        return Eigen::Map<const Vector>(out.data(), out.size());
      }
    }
    return z;
  }

  static Point qf(const Matrix& a) {
    const Eigen::HouseholderQR<Matrix> qr(a);
    const Eigen::Index n = a.rows();
    const Eigen::Index m = a.cols();
    Matrix q = qr.householderQ() * Matrix::Identity(n, m);
    const Matrix& r = qr.matrixQR();
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < m; ++j) {
      const double rjj = r(j, j);
      if (!std::isfinite(rjj) || std::abs(rjj) <= 1e-13 * scale)
        throw DegenerateError("retract: X + xi is rank deficient");
      if (rjj < 0.0) q.col(j) = -q.col(j);
    }
    return Eigen::Map<const Vector>(q.data(), q.size());
  }

  Kind kind_;
  int n_;
  int m_;
  double feas_tol_ = 1e-8;
};

inline EmbeddedManifold EmbeddedManifold::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos)
    throw InvalidArgument("manifold spec must look like 'sphere:n' or 'stiefel:n,m'");
  const std::string kind(spec.substr(0, colon));
  const std::string args(spec.substr(colon + 1));
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size())
      throw InvalidArgument("manifold spec: bad integer '" + s + "'");
    return v;
  };
  if (kind == "sphere") return sphere(to_int(args));
  if (kind == "euclidean") return euclidean(to_int(args));
  if (kind == "stiefel") {
    const auto comma = args.find(',');
    if (comma == std::string::npos)
      throw InvalidArgument("stiefel spec needs 'stiefel:n,m'");
    return stiefel(to_int(args.substr(0, comma)), to_int(args.substr(comma + 1)));
  }
  throw InvalidArgument("unknown manifold '" + kind + "'");
}

}  // namespace cvi
