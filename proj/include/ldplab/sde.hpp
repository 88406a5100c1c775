#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "core.hpp"
#include "paths.hpp"
#include "vector_field.hpp"

namespace ldplab {

/// Y = U + F(Y_-) . X on a common horizon; `step` bounds the spacing of the
/// solver grid between breakpoints.
struct SdeProblem {
  const VectorField& F;
  const CadlagPath& control;
  const CadlagPath& noise;
  double step;
};

namespace detail {

inline void check_problem(const VectorField& F, const CadlagPath& u, const CadlagPath& x, double step) {
  if (!(step > 0.0)) throw DomainError("solver step must be positive");
  if (u.dim() != F.state_dim()) throw DimensionError("control dim does not match the state dim of F");
  if (x.dim() != F.noise_dim()) throw DimensionError("noise dim does not match the noise dim of F");
  if (u.horizon() != x.horizon()) throw DimensionError("control and noise horizons differ");
}

/// Merged breakpoints, each gap split into equal pieces no longer than step.
inline std::vector<double> solver_grid(std::initializer_list<const CadlagPath*> paths, double step) {
  std::vector<const CadlagPath*> v(paths);
  const auto merged = merge_times(std::span<const CadlagPath* const>(v));
  std::vector<double> grid;
  grid.reserve(merged.size());
  grid.push_back(merged.front());
  for (std::size_t k = 1; k < merged.size(); ++k) {
    const double a = merged[k - 1], b = merged[k];
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / step - 1e-9)));
    for (std::size_t m = 1; m < pieces; ++m)
      grid.push_back(a + (b - a) * static_cast<double>(m) / static_cast<double>(pieces));
    grid.push_back(b);
  }
  return grid;
}

/// Right values and left limits of `p` on a grid containing its breakpoints;
/// walks the grid once.
inline void sample_on_grid(const CadlagPath& p, const std::vector<double>& grid, std::vector<double>& right,
                           std::vector<double>& left) {
  const std::size_t d = p.dim();
  right.resize(grid.size() * d);
  left.resize(grid.size() * d);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    while (seg + 1 < p.segments() && p.time(seg + 1) <= t) ++seg;
    double* r = right.data() + k * d;
    double* l = left.data() + k * d;
    if (t == p.time(seg)) {
      std::copy_n(p.value_span(seg).data(), d, r);
      std::copy_n(p.left_span(seg).data(), d, l);
    } else if (t == p.horizon()) {
      std::copy_n(p.value_span(p.size() - 1).data(), d, r);
      std::copy_n(p.left_span(p.size() - 1).data(), d, l);
    } else {
      const double* v0 = p.value_span(seg).data();
      if (p.mode(seg) == SegmentMode::constant) {
        std::copy_n(v0, d, r);
      } else {
        const double* v1 = p.left_span(seg + 1).data();
        const double w = (t - p.time(seg)) / (p.time(seg + 1) - p.time(seg));
        for (std::size_t i = 0; i < d; ++i) r[i] = v0[i] + w * (v1[i] - v0[i]);
      }
      std::copy_n(r, d, l);
    }
  }
}

}  // namespace detail

/// Left-point Euler scheme for Y = U + F(Y_-) . X.
///
/// On the refined merged grid s_k:
///   Y(s_{k+1}-) = Y(s_k) + (U(s_{k+1}-) - U(s_k)) + F(Y(s_k)) (X(s_{k+1}-) - X(s_k))
///   Y(s_{k+1})  = Y(s_{k+1}-) + dU + F(Y(s_{k+1}-)) dX        (jumps at s_{k+1})
/// The output interpolates linearly between grid points.
inline CadlagPath solve_sde(const VectorField& F, const CadlagPath& u, const CadlagPath& x, double step) {
  detail::check_problem(F, u, x, step);
  const auto grid = detail::solver_grid({&u, &x}, step);
  const std::size_t n = F.state_dim(), d = F.noise_dim(), M = grid.size();
  std::vector<double> ur, ul, xr, xl;
  detail::sample_on_grid(u, grid, ur, ul);
  detail::sample_on_grid(x, grid, xr, xl);

  std::vector<double> yv(M * n), yl(M * n);
  const auto ni = static_cast<Eigen::Index>(n), di = static_cast<Eigen::Index>(d);
  Matrix Fy(ni, di);
  Vector y = Eigen::Map<const Vector>(ur.data(), ni);
  Vector dx(di);
  std::copy_n(y.data(), n, yv.data());
  std::copy_n(y.data(), n, yl.data());
  for (std::size_t k = 0; k + 1 < M; ++k) {
    F.eval(y, Fy);
    for (std::size_t i = 0; i < d; ++i) dx[i] = xl[(k + 1) * d + i] - xr[k * d + i];
    for (std::size_t i = 0; i < n; ++i) y[i] += ul[(k + 1) * n + i] - ur[k * n + i];
    y.noalias() += Fy * dx;
    std::copy_n(y.data(), n, yl.data() + (k + 1) * n);
    bool jump = false;
    for (std::size_t i = 0; i < d && !jump; ++i) jump = xr[(k + 1) * d + i] != xl[(k + 1) * d + i];
    for (std::size_t i = 0; i < n; ++i) y[i] += ur[(k + 1) * n + i] - ul[(k + 1) * n + i];
    if (jump) {
      F.eval(Eigen::Map<const Vector>(yl.data() + (k + 1) * n, ni), Fy);
      for (std::size_t i = 0; i < d; ++i) dx[i] = xr[(k + 1) * d + i] - xl[(k + 1) * d + i];
      y.noalias() += Fy * dx;
    }
    std::copy_n(y.data(), n, yv.data() + (k + 1) * n);
  }
  return CadlagPath(n, grid, std::move(yv), std::move(yl), std::vector<SegmentMode>(M - 1, SegmentMode::linear));
}

inline CadlagPath solve_sde(const SdeProblem& p) { return solve_sde(p.F, p.control, p.noise, p.step); }

/// Deterministic skeleton y = u + F(y) . x for finite-variation x.
///
/// Between jumps the equation is the ODE y' = u' + F(y) x', integrated with
/// the classical fourth-order Runge-Kutta method on the refined grid (u' and x'
/// are constant on each grid cell). At a jump y <- y_- + du + F(y_-) dx.
inline CadlagPath solve_skeleton(const VectorField& F, const CadlagPath& u, const CadlagPath& x, double step) {
  detail::check_problem(F, u, x, step);
  const auto grid = detail::solver_grid({&u, &x}, step);
  const std::size_t n = F.state_dim(), d = F.noise_dim(), M = grid.size();
  std::vector<double> ur, ul, xr, xl;
  detail::sample_on_grid(u, grid, ur, ul);
  detail::sample_on_grid(x, grid, xr, xl);

  const auto ni = static_cast<Eigen::Index>(n), di = static_cast<Eigen::Index>(d);
  std::vector<double> yv(M * n), yl(M * n);
  Vector y = Eigen::Map<const Vector>(ur.data(), ni);
  std::copy_n(y.data(), n, yv.data());
  std::copy_n(y.data(), n, yl.data());
  Vector du(ni), dx(di), k1(ni), k2(ni), k3(ni), k4(ni), tmp(ni);
  Matrix Fy(ni, di);
  auto rhs = [&](const Vector& state, Vector& out) {
    F.eval(state, Fy);
    out = du;
    out.noalias() += Fy * dx;
  };
  for (std::size_t k = 0; k + 1 < M; ++k) {
    const double h = grid[k + 1] - grid[k];
    for (std::size_t i = 0; i < n; ++i) du[i] = (ul[(k + 1) * n + i] - ur[k * n + i]) / h;
    for (std::size_t i = 0; i < d; ++i) dx[i] = (xl[(k + 1) * d + i] - xr[k * d + i]) / h;
    if (dx.isZero(0.0)) {
      y += h * du;
    } else {
      rhs(y, k1);
      tmp = y + 0.5 * h * k1;
      rhs(tmp, k2);
      tmp = y + 0.5 * h * k2;
      rhs(tmp, k3);
      tmp = y + h * k3;
      rhs(tmp, k4);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    std::copy_n(y.data(), n, yl.data() + (k + 1) * n);
    bool jump = false;
    for (std::size_t i = 0; i < d; ++i) {
      dx[i] = xr[(k + 1) * d + i] - xl[(k + 1) * d + i];
      jump = jump || dx[i] != 0.0;
    }
    if (jump) {
      F.eval(y, Fy);
      y.noalias() += Fy * dx;
    }
    for (std::size_t i = 0; i < n; ++i) y[i] += ur[(k + 1) * n + i] - ul[(k + 1) * n + i];
    std::copy_n(y.data(), n, yv.data() + (k + 1) * n);
  }
  return CadlagPath(n, grid, std::move(yv), std::move(yl), std::vector<SegmentMode>(M - 1, SegmentMode::linear));
}

/// Components of the Itô-type noise: finite-variation drift B, continuous
/// martingale part Xc, and the small- and large-jump parts.
struct NoiseParts {
  CadlagPath drift;
  CadlagPath continuous;
  CadlagPath small_jumps;
  CadlagPath large_jumps;
};

/// Y = U + F1(Y_-) . B + F2(Y_-) . Xc + F3(Y_-) . (small + large), solved as
/// the driven equation with stacked noise (B, Xc, small + large) and
/// F = [F1 | F2 | F3].
inline CadlagPath solve_ito(const VectorField& F1, const VectorField& F2, const VectorField& F3, const CadlagPath& u,
                            const NoiseParts& parts, double step) {
  const double T = parts.drift.horizon();
  const std::size_t d = parts.drift.dim();
  for (const auto* p : {&parts.continuous, &parts.small_jumps, &parts.large_jumps})
    if (p->horizon() != T || p->dim() != d) throw DimensionError("solve_ito: noise parts differ in horizon or dim");
  const CadlagPath jumps = add(parts.small_jumps, parts.large_jumps);
  const CadlagPath* stacked[] = {&parts.drift, &parts.continuous, &jumps};
  const CadlagPath noise = stack(std::span<const CadlagPath* const>(stacked));
  const VectorField F = fields::hstack({F1, F2, F3});
  return solve_sde(F, u, noise, step);
}

/// sup_t |y(t) - u(t) - (F(y) . x)(t)| over the grid (right values and left
/// limits), with y taken as given.
///
/// The integral against the continuous part of x is the Stieltjes integral
/// of F(y(s)) x'(s), evaluated by three-point Gauss-Legendre on each grid cell;
/// jumps contribute F(y(s-)) dx(s).
inline double residual(const VectorField& F, const CadlagPath& u, const CadlagPath& x, const CadlagPath& y, double step) {
  detail::check_problem(F, u, x, step);
  if (y.dim() != F.state_dim() || y.horizon() != u.horizon()) throw DimensionError("residual: y has wrong dim or horizon");
  const auto grid = detail::solver_grid({&u, &x, &y}, step);
  const std::size_t n = F.state_dim(), d = F.noise_dim(), M = grid.size();
  std::vector<double> ur, ul, xr, xl, yr, yl;
  detail::sample_on_grid(u, grid, ur, ul);
  detail::sample_on_grid(x, grid, xr, xl);
  detail::sample_on_grid(y, grid, yr, yl);

  const auto ni = static_cast<Eigen::Index>(n), di = static_cast<Eigen::Index>(d);
  static constexpr std::array<double, 3> nodes{-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> weights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  Vector integral = Vector::Zero(ni), dx(di), ys(ni);
  Matrix Fy(ni, di);
  auto gap = [&](const std::vector<double>& yy, const std::vector<double>& uu, std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = yy[k * n + i] - uu[k * n + i] - integral[i];
      s += r * r;
    }
    return std::sqrt(s);
  };
  double worst = gap(yr, ur, 0);
  for (std::size_t k = 0; k + 1 < M; ++k) {
    const double h = grid[k + 1] - grid[k];
    for (std::size_t i = 0; i < d; ++i) dx[i] = (xl[(k + 1) * d + i] - xr[k * d + i]) / h;
    if (!dx.isZero(0.0)) {
      for (std::size_t q = 0; q < 3; ++q) {
        const double w = 0.5 * (1.0 + nodes[q]);
        for (std::size_t i = 0; i < n; ++i) ys[i] = yr[k * n + i] + w * (yl[(k + 1) * n + i] - yr[k * n + i]);
        F.eval(ys, Fy);
        integral.noalias() += (0.5 * h * weights[q]) * (Fy * dx);
      }
    }
    worst = std::max(worst, gap(yl, ul, k + 1));
    bool jump = false;
    for (std::size_t i = 0; i < d; ++i) {
      dx[i] = xr[(k + 1) * d + i] - xl[(k + 1) * d + i];
      jump = jump || dx[i] != 0.0;
    }
    if (jump) {
      F.eval(Eigen::Map<const Vector>(yl.data() + (k + 1) * n, ni), Fy);
      integral.noalias() += Fy * dx;
    }
    worst = std::max(worst, gap(yr, ur, k + 1));
  }
  return worst;
}

}  // namespace ldplab
