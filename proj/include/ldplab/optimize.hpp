#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "core.hpp"

namespace ldplab::opt {

using Objective = std::function<double(const Vector&)>;

struct Result {
  Vector x;
  double value = kInfinity;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  int max_iterations = 4000;
  double initial_step = 0.25;
  double ftol = 1e-12;
  double xtol = 1e-9;
  int restarts = 2;  // re-inflate the simplex around the best point
};

/// Derivative-free downhill simplex with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2). Accepts +inf
/// objective values as infeasible points.
inline Result nelder_mead(const Objective& f, const Vector& x0, const NelderMeadOptions& o = {}) {
  const Eigen::Index n = x0.size();
  Result best{x0, f(x0), 0, 1, false};
  Vector start = x0;
  for (int round = 0; round <= o.restarts; ++round) {
    std::vector<Vector> pts(static_cast<std::size_t>(n + 1), start);
    std::vector<double> val(static_cast<std::size_t>(n + 1));
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = o.initial_step * std::max(1.0, std::abs(start[i])) / static_cast<double>(round + 1);
      pts[static_cast<std::size_t>(i + 1)][i] += h;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      val[i] = f(pts[i]);
      ++best.evaluations;
    }
    std::vector<std::size_t> idx(pts.size());
    int it = 0;
    for (; it < o.max_iterations; ++it) {
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
      const std::size_t lo = idx.front(), hi = idx.back(), nh = idx[idx.size() - 2];
      double xspread = 0.0;
      for (const auto& p : pts) xspread = std::max(xspread, (p - pts[lo]).cwiseAbs().maxCoeff());
      if (std::isfinite(val[hi]) &&
          std::abs(val[hi] - val[lo]) <= o.ftol * (std::abs(val[lo]) + 1e-30) + 1e-300 && xspread <= o.xtol)
        break;
      if (xspread <= 1e-15) break;
      Vector centroid = Vector::Zero(n);
      for (std::size_t i : idx)
        if (i != hi) centroid += pts[i];
      centroid /= static_cast<double>(n);
      const Vector xr = centroid + (centroid - pts[hi]);
      const double fr = f(xr);
      ++best.evaluations;
      if (fr < val[lo]) {
        const Vector xe = centroid + 2.0 * (centroid - pts[hi]);
        const double fe = f(xe);
        ++best.evaluations;
        if (fe < fr) {
          pts[hi] = xe;
          val[hi] = fe;
        } else {
          pts[hi] = xr;
          val[hi] = fr;
        }
        continue;
      }
      if (fr < val[nh]) {
        pts[hi] = xr;
        val[hi] = fr;
        continue;
      }
      const bool outside = fr < val[hi];
      const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid)) : Vector(centroid + 0.5 * (pts[hi] - centroid));
      const double fc = f(xc);
      ++best.evaluations;
      if (fc < (outside ? fr : val[hi])) {
        pts[hi] = xc;
        val[hi] = fc;
        continue;
      }
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i == lo) continue;
        pts[i] = pts[lo] + 0.5 * (pts[i] - pts[lo]);
        val[i] = f(pts[i]);
        ++best.evaluations;
      }
    }
    best.iterations += it;
    const auto lo = static_cast<std::size_t>(std::min_element(val.begin(), val.end()) - val.begin());
    if (val[lo] <= best.value) {
      best.value = val[lo];
      best.x = pts[lo];
    }
    best.converged = it < o.max_iterations;
    start = best.x;
  }
  return best;
}

struct BfgsOptions {
  int max_iterations = 500;
  double gradient_tol = 1e-8;
  double fd_step = 1e-6;
  double ftol = 1e-14;
};

/// Central finite-difference gradient; falls back to one-sided differences
/// where a side evaluates to +inf.
inline Vector fd_gradient(const Objective& f, const Vector& x, double fx, double h, int& evals) {
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double hi = h * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + hi;
    const double fp = f(xp);
    xp[i] = x[i] - hi;
    const double fm = f(xp);
    xp[i] = x[i];
    evals += 2;
    if (std::isfinite(fp) && std::isfinite(fm)) g[i] = (fp - fm) / (2.0 * hi);
    else if (std::isfinite(fp)) g[i] = (fp - fx) / hi;
    else if (std::isfinite(fm)) g[i] = (fx - fm) / hi;
    else g[i] = 0.0;
  }
  return g;
}

/// Quasi-Newton descent (BFGS inverse-Hessian update) with finite-difference
/// gradients and Armijo backtracking. +inf values are rejected by the line
/// search, so the iterate never leaves the finite region it started in.
inline Result bfgs(const Objective& f, const Vector& x0, const BfgsOptions& o = {}) {
  const Eigen::Index n = x0.size();
  Result r{x0, f(x0), 0, 1, false};
  if (!std::isfinite(r.value)) return r;
  Matrix Hinv = Matrix::Identity(n, n);
  Vector g = fd_gradient(f, r.x, r.value, o.fd_step, r.evaluations);
  for (int it = 0; it < o.max_iterations; ++it) {
    r.iterations = it + 1;
    if (g.norm() <= o.gradient_tol * std::max(1.0, std::abs(r.value))) {
      r.converged = true;
      break;
    }
    Vector p = -Hinv * g;
    if (p.dot(g) >= 0.0) {
      Hinv.setIdentity();
      p = -g;
    }
    double step = 1.0, fn = kInfinity;
    Vector xn;
    const double slope = p.dot(g);
    for (int ls = 0; ls < 60; ++ls) {
      xn = r.x + step * p;
      fn = f(xn);
      ++r.evaluations;
      if (std::isfinite(fn) && fn <= r.value + 1e-4 * step * slope) break;
      step *= 0.5;
    }
    if (!(std::isfinite(fn) && fn <= r.value + 1e-4 * step * slope)) {
      if (Hinv.isIdentity()) {
        r.converged = true;  // no descent at FD resolution
        break;
      }
      Hinv.setIdentity();
      continue;
    }
    const Vector gn = fd_gradient(f, xn, fn, o.fd_step, r.evaluations);
    const Vector s = xn - r.x, y = gn - g;
    const double sy = s.dot(y);
    const double df = r.value - fn;
    r.x = xn;
    r.value = fn;
    g = gn;
    if (sy > 1e-16 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Matrix I = Matrix::Identity(n, n);
      Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    if (df <= o.ftol * std::max(1.0, std::abs(fn)) && s.norm() <= 1e-12 * std::max(1.0, r.x.norm())) {
      r.converged = true;
      break;
    }
  }
  return r;
}

}  // namespace ldplab::opt
