#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "core.hpp"

namespace ldplab {

/// Coefficient F: R^n -> R^{n x d} with declared bound |F| <= bound and
/// Lipschitz constant lip (Frobenius norm).
///
/// The declared constants are checked at construction by sampling pairs in a
/// ball; a violation throws. Unbounded fields are refused unless explicitly
/// allowed (they are then usable by the solvers but carry bound = inf).
struct FieldValidationOptions {
  int pairs = 10000;
  double radius = 100.0;
  std::uint64_t seed = 0x5eed;
  bool allow_unbounded = false;
};

class VectorField {
 public:
  using EvalFn = std::function<void(const Eigen::Ref<const Vector>&, Eigen::Ref<Matrix>)>;

  using ValidationOptions = FieldValidationOptions;

  VectorField(std::size_t n, std::size_t d, EvalFn eval, double bound, double lip, std::string name = "custom",
              const ValidationOptions& opt = {})
      : n_(n), d_(d), eval_(std::move(eval)), bound_(bound), lip_(lip), name_(std::move(name)) {
    if (n == 0 || d == 0) throw DimensionError("VectorField: dims must be positive");
    if (!(lip >= 0.0) || !std::isfinite(lip)) throw DomainError("VectorField: Lipschitz constant must be finite");
    if (!(bound >= 0.0)) throw DomainError("VectorField: bound must be nonnegative");
    if (is_infinite(bound) && !opt.allow_unbounded)
      throw DomainError("VectorField '" + name_ + "': unbounded coefficients are rejected");
    validate(opt);
  }

  std::size_t state_dim() const noexcept { return n_; }
  std::size_t noise_dim() const noexcept { return d_; }
  double bound() const noexcept { return bound_; }
  double lipschitz() const noexcept { return lip_; }
  const std::string& name() const noexcept { return name_; }

  void eval(const Eigen::Ref<const Vector>& y, Eigen::Ref<Matrix> out) const { eval_(y, out); }

  Matrix operator()(const Vector& y) const {
    Matrix out(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(d_));
    eval_(y, out);
    return out;
  }

 private:
  void validate(const ValidationOptions& opt) const {
    Rng rng(opt.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    const auto n = static_cast<Eigen::Index>(n_);
    auto draw = [&] {
      Vector v(n);
      for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
      const double r = opt.radius * std::pow(unif(rng), 1.0 / static_cast<double>(n));
      return Vector(v * (r / std::max(v.norm(), 1e-300)));
    };
    Matrix f1(n, static_cast<Eigen::Index>(d_)), f2(n, static_cast<Eigen::Index>(d_));
    const double slack = 1e-9;
    for (int k = 0; k < opt.pairs; ++k) {
      const Vector y1 = draw();
      // half the pairs are close together so the Lipschitz check bites
      const Vector y2 = k % 2 == 0 ? draw() : Vector(y1 + 1e-3 * draw() / opt.radius);
      eval_(y1, f1);
      eval_(y2, f2);
      if (!f1.allFinite()) throw DomainError("VectorField '" + name_ + "': non-finite value");
      if (f1.norm() > bound_ * (1.0 + slack) + slack)
        throw DomainError("VectorField '" + name_ + "': declared bound violated");
      const double dy = (y1 - y2).norm();
      if ((f1 - f2).norm() > lip_ * dy * (1.0 + slack) + slack * dy + 1e-14)
        throw DomainError("VectorField '" + name_ + "': declared Lipschitz constant violated");
    }
  }

  std::size_t n_, d_;
  EvalFn eval_;
  double bound_, lip_;
  std::string name_;
};

namespace fields {

/// F(y) = A for all y.
inline VectorField constant(const Matrix& A) {
  return VectorField(
      static_cast<std::size_t>(A.rows()), static_cast<std::size_t>(A.cols()),
      [A](const Eigen::Ref<const Vector>&, Eigen::Ref<Matrix> out) { out = A; }, A.norm(), 0.0, "constant");
}

inline double max_row_norm(const Matrix& A) { return A.rowwise().norm().maxCoeff(); }

/// F_ij(y) = A_ij * clamp(y_i, lo, hi). With n = d = 1 and A = 1 this is the
/// clamped identity; it coincides with the linear field on [lo, hi].
inline VectorField clamp_linear(const Matrix& A, double lo, double hi) {
  if (!(lo < hi)) throw DomainError("clamp_linear: need lo < hi");
  const double m = std::max(std::abs(lo), std::abs(hi));
  return VectorField(
      static_cast<std::size_t>(A.rows()), static_cast<std::size_t>(A.cols()),
      [A, lo, hi](const Eigen::Ref<const Vector>& y, Eigen::Ref<Matrix> out) {
        for (Eigen::Index i = 0; i < A.rows(); ++i) out.row(i) = std::clamp(y[i], lo, hi) * A.row(i);
      },
      m * A.norm(), max_row_norm(A), "clamp_linear");
}

/// F_ij(y) = A_ij * (offset + tanh(scale * y_i)).
inline VectorField tanh_scaled(const Matrix& A, double scale, double offset) {
  return VectorField(
      static_cast<std::size_t>(A.rows()), static_cast<std::size_t>(A.cols()),
      [A, scale, offset](const Eigen::Ref<const Vector>& y, Eigen::Ref<Matrix> out) {
        for (Eigen::Index i = 0; i < A.rows(); ++i) out.row(i) = (offset + std::tanh(scale * y[i])) * A.row(i);
      },
      (std::abs(offset) + 1.0) * A.norm(), std::abs(scale) * max_row_norm(A), "tanh_scaled");
}

/// F_ij(y) = A_ij * y_i. Unbounded; only constructible with allow_unbounded.
inline VectorField linear(const Matrix& A, bool allow_unbounded) {
  VectorField::ValidationOptions opt;
  opt.allow_unbounded = allow_unbounded;
  return VectorField(
      static_cast<std::size_t>(A.rows()), static_cast<std::size_t>(A.cols()),
      [A](const Eigen::Ref<const Vector>& y, Eigen::Ref<Matrix> out) {
        for (Eigen::Index i = 0; i < A.rows(); ++i) out.row(i) = y[i] * A.row(i);
      },
      kInfinity, max_row_norm(A), "linear", opt);
}

/// Horizontal concatenation [F_1 | F_2 | ...] of fields sharing the state dim.
inline VectorField hstack(const std::vector<VectorField>& parts) {
  if (parts.empty()) throw DimensionError("hstack: no fields");
  const std::size_t n = parts.front().state_dim();
  std::size_t d = 0;
  double b2 = 0.0, l2 = 0.0;
  for (const auto& f : parts) {
    if (f.state_dim() != n) throw DimensionError("hstack: state dims differ");
    d += f.noise_dim();
    b2 += f.bound() * f.bound();
    l2 += f.lipschitz() * f.lipschitz();
  }
  VectorField::ValidationOptions opt;
  opt.allow_unbounded = true;
  opt.pairs = 200;
  return VectorField(
      n, d,
      [parts](const Eigen::Ref<const Vector>& y, Eigen::Ref<Matrix> out) {
        Eigen::Index c = 0;
        for (const auto& f : parts) {
          const auto w = static_cast<Eigen::Index>(f.noise_dim());
          f.eval(y, out.middleCols(c, w));
          c += w;
        }
      },
      std::sqrt(b2), std::sqrt(l2), "hstack", opt);
}

}  // namespace fields
}  // namespace ldplab
