#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "levy.hpp"
#include "optimize.hpp"
#include "paths.hpp"
#include "sde.hpp"
#include "vector_field.hpp"

namespace ldplab {

/// Control rate function I' for a noise family X^eps on [0, T].
///
/// brownian: X^eps = scale * sqrt(eps) * Sigma^{1/2} W; action
///           1/2 int |x'|^2 in the (scale^2 Sigma)^{-1} metric.
/// levy:     integral of Lambda*(x') for the triplet's cumulant.
/// product:  independent components on consecutive coordinate blocks.
/// Every kind is +inf on paths with jumps or with x(0) != 0.
class RateModel {
 public:
  enum class Kind { brownian, levy, product };

  static RateModel brownian(const Matrix& sigma, double scale, double horizon) {
    if (sigma.rows() != sigma.cols() || sigma.rows() == 0) throw DimensionError("brownian rate: Sigma must be square");
    if (!(scale > 0.0)) throw DomainError("brownian rate: scale must be positive");
    RateModel m(Kind::brownian, static_cast<std::size_t>(sigma.rows()), horizon);
    m.cov_ = scale * scale * sigma;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.cov_);
    if (es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, m.cov_.norm()))
      throw DomainError("brownian rate: Sigma must be nonnegative definite");
    const double cut = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    Vector inv = es.eigenvalues().unaryExpr([cut](double v) { return v > cut ? 1.0 / v : 0.0; });
    m.precision_ = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    m.range_projector_ = es.eigenvectors() *
                         es.eigenvalues().unaryExpr([cut](double v) { return v > cut ? 1.0 : 0.0; }).asDiagonal() *
                         es.eigenvectors().transpose();
    return m;
  }

  static RateModel levy(const LevyTriplet& triplet, double horizon) {
    triplet.validate();
    RateModel m(Kind::levy, triplet.dim, horizon);
    m.triplet_ = std::make_shared<LevyTriplet>(triplet);
    return m;
  }

  static RateModel product(std::vector<RateModel> parts) {
    if (parts.empty()) throw DimensionError("product rate: no components");
    std::size_t d = 0;
    for (const auto& p : parts) {
      if (p.horizon() != parts.front().horizon()) throw DimensionError("product rate: horizons differ");
      d += p.dim();
    }
    RateModel m(Kind::product, d, parts.front().horizon());
    m.parts_ = std::move(parts);
    return m;
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  double horizon() const noexcept { return T_; }
  const std::vector<RateModel>& parts() const noexcept { return parts_; }

  /// duration * L(slope), where L is the running cost of a straight segment.
  double segment_rate(const Vector& slope, double duration) const {
    switch (kind_) {
      case Kind::brownian: {
        if ((slope - range_projector_ * slope).norm() > 1e-10 * std::max(1.0, slope.norm())) return kInfinity;
        return 0.5 * duration * slope.dot(precision_ * slope);
      }
      case Kind::levy: {
        const double v = legendre(*triplet_, slope).value;
        return is_infinite(v) ? kInfinity : duration * v;
      }
      case Kind::product: {
        double s = 0.0;
        Eigen::Index off = 0;
        for (const auto& p : parts_) {
          const auto w = static_cast<Eigen::Index>(p.dim());
          s += p.segment_rate(slope.segment(off, w), duration);
          off += w;
        }
        return s;
      }
    }
    return kInfinity;
  }

  /// Slope of the zero-cost path (the law of large numbers limit).
  Vector zero_cost_slope() const {
    switch (kind_) {
      case Kind::brownian: return Vector::Zero(static_cast<Eigen::Index>(dim_));
      case Kind::levy: return noise_mean(*triplet_);
      case Kind::product: {
        Vector v(static_cast<Eigen::Index>(dim_));
        Eigen::Index off = 0;
        for (const auto& p : parts_) {
          v.segment(off, static_cast<Eigen::Index>(p.dim())) = p.zero_cost_slope();
          off += static_cast<Eigen::Index>(p.dim());
        }
        return v;
      }
    }
    return {};
  }

 private:
  RateModel(Kind k, std::size_t dim, double horizon) : kind_(k), dim_(dim), T_(horizon) {
    if (!(horizon > 0.0)) throw DomainError("rate model: horizon must be positive");
  }

  Kind kind_;
  std::size_t dim_;
  double T_;
  Matrix cov_, precision_, range_projector_;
  std::shared_ptr<const LevyTriplet> triplet_;
  std::vector<RateModel> parts_;
};

/// I'(x). Returns +inf outside the absolutely continuous class.
inline double eval_control_rate(const RateModel& model, const CadlagPath& x) {
  if (x.dim() != model.dim()) throw DimensionError("eval_control_rate: path dim does not match model");
  if (x.horizon() != model.horizon()) throw DimensionError("eval_control_rate: horizon does not match model");
  if (x.value(0).norm() != 0.0) return kInfinity;
  for (std::size_t k = 1; k < x.size(); ++k)
    if (x.has_jump(k)) return kInfinity;
  double total = 0.0;
  for (std::size_t k = 0; k < x.segments(); ++k) {
    const double h = x.time(k + 1) - x.time(k);
    const Vector slope = x.mode(k) == SegmentMode::constant ? Vector::Zero(static_cast<Eigen::Index>(x.dim()))
                                                             : Vector(x.displacement(k) / h);
    const double r = model.segment_rate(slope, h);
    if (is_infinite(r)) return kInfinity;
    total += r;
  }
  return total;
}

inline constexpr double kMembershipTol = 1e-4;

/// I(x, u, y) with u the deterministic control: I'(x) when y solves the
/// skeleton equation y = u + F(y) . x to within `tol` (sup norm), else +inf.
inline double eval_composite_rate(const RateModel& model, const VectorField& F, const CadlagPath& x,
                                  const CadlagPath& u, const CadlagPath& y, double tol = kMembershipTol,
                                  std::optional<double> step = std::nullopt) {
  if (!(tol > 0.0)) throw DomainError("eval_composite_rate: tol must be positive");
  const double h = step.value_or(1e-3 * x.horizon());
  if (residual(F, u, x, y, h) > tol) return kInfinity;
  return eval_control_rate(model, x);
}

// ---------------------------------------------------------------------------
// Events

struct EndpointEvent {
  enum class Type { terminal_ge, terminal_eq, sup_ge };
  Type type = Type::terminal_ge;
  std::size_t coordinate = 0;
  double level = 0.0;
  double tol = 1e-3;

  /// Distance of the path from the event; zero when it holds exactly.
  double violation(const CadlagPath& y) const {
    if (coordinate >= y.dim()) throw DimensionError("event coordinate out of range");
    switch (type) {
      case Type::terminal_ge: return std::max(0.0, level - y.value(y.size() - 1)[static_cast<Eigen::Index>(coordinate)]);
      case Type::terminal_eq: return std::abs(y.value(y.size() - 1)[static_cast<Eigen::Index>(coordinate)] - level);
      case Type::sup_ge: {
        double m = -kInfinity;
        for (std::size_t k = 0; k < y.size(); ++k) {
          m = std::max(m, y.value_span(k)[coordinate]);
          m = std::max(m, y.left_span(k)[coordinate]);
        }
        return std::max(0.0, level - m);
      }
    }
    return kInfinity;
  }

  bool feasible(const CadlagPath& y) const { return violation(y) <= tol; }

  /// Sampling predicate: the event with a relative slack of 1e-9 so that
  /// lattice-valued terminal values (sums of equal jumps) are not lost to
  /// rounding.
  bool holds(const CadlagPath& y) const {
    const double slack = 1e-9 * std::max(1.0, std::abs(level));
    if (type == Type::terminal_eq) return violation(y) <= tol;
    return violation(y) <= slack;
  }
};

inline const char* to_string(EndpointEvent::Type t) {
  switch (t) {
    case EndpointEvent::Type::terminal_ge: return "terminal_ge";
    case EndpointEvent::Type::terminal_eq: return "terminal_eq";
    case EndpointEvent::Type::sup_ge: return "sup_ge";
  }
  return "?";
}

inline EndpointEvent::Type event_type_from_string(const std::string& s) {
  if (s == "terminal_ge") return EndpointEvent::Type::terminal_ge;
  if (s == "terminal_eq") return EndpointEvent::Type::terminal_eq;
  if (s == "sup_ge") return EndpointEvent::Type::sup_ge;
  throw std::invalid_argument("unknown event type '" + s + "'");
}

// ---------------------------------------------------------------------------
// Endpoint minimisation

/// Piecewise-linear controls from 0 with m equal segments; the decision
/// variables are the m segment increments.
struct ControlGrid {
  std::size_t m = 16;

  CadlagPath path(const Vector& increments, std::size_t dim, double horizon) const {
    PathBuilder b(Vector::Zero(static_cast<Eigen::Index>(dim)));
    b.reserve(m + 1);
    Vector x = Vector::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < m; ++k) {
      x += increments.segment(static_cast<Eigen::Index>(k * dim), static_cast<Eigen::Index>(dim));
      const double t = k + 1 == m ? horizon : horizon * static_cast<double>(k + 1) / static_cast<double>(m);
      b.linear_to(t, x);
    }
    return b.build();
  }
};

struct OptimizerConfig {
  double penalty_start = 10.0;
  double penalty_growth = 10.0;
  int stages = 5;
  int starts = 8;
  std::uint64_t seed = 1;
  std::size_t simplex_max_segments = 8;
  std::optional<double> skeleton_step;  // default T / 256
  double start_spread = 0.5;            // relative size of random start perturbations
};

struct TraceEntry {
  int start = 0;
  int stage = 0;
  double penalty = 0.0;
  double objective = 0.0;
  double rate = 0.0;
  double violation = 0.0;
  int evaluations = 0;
};

struct EndpointResult {
  CadlagPath x_star;
  CadlagPath y_star;
  double rate = 0.0;
  bool feasible = false;
  std::vector<TraceEntry> trace;
};

class OptimizationError : public std::runtime_error {
 public:
  OptimizationError(const std::string& what, std::vector<TraceEntry> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<TraceEntry>& trace() const noexcept { return trace_; }

 private:
  std::vector<TraceEntry> trace_;
};

/// Grid-restricted upper bound on inf { I'(x) : y = u + F(y) . x satisfies
/// the event }.
///
/// Quadratic penalty on the event violation with continuation (weight grows
/// by `penalty_growth` per stage); the inner solver is Nelder-Mead for small
/// grids and finite-difference BFGS otherwise; multi-start from the zero-cost
/// control plus seeded perturbations. Returns the best feasible iterate.
inline EndpointResult minimize_endpoint(const RateModel& model, const VectorField& F, const CadlagPath& u,
                                        const EndpointEvent& event, const ControlGrid& grid,
                                        const OptimizerConfig& cfg = {}) {
  if (grid.m == 0) throw DomainError("minimize_endpoint: need at least one control segment");
  if (model.dim() != F.noise_dim()) throw DimensionError("minimize_endpoint: model dim does not match F");
  if (u.dim() != F.state_dim()) throw DimensionError("minimize_endpoint: control u has wrong dim");
  if (event.coordinate >= F.state_dim()) throw DimensionError("minimize_endpoint: event coordinate out of range");
  const double T = model.horizon();
  if (u.horizon() != T) throw DimensionError("minimize_endpoint: horizons differ");
  const std::size_t d = model.dim();
  const double step = cfg.skeleton_step.value_or(T / 256.0);
  const double dt = T / static_cast<double>(grid.m);
  const auto nvar = static_cast<Eigen::Index>(grid.m * d);

  struct Eval {
    double rate, violation;
  };
  auto evaluate = [&](const Vector& z) -> Eval {
    const CadlagPath x = grid.path(z, d, T);
    const double r = eval_control_rate(model, x);
    if (is_infinite(r)) return {kInfinity, kInfinity};
    const CadlagPath y = solve_skeleton(F, u, x, step);
    return {r, event.violation(y)};
  };

  Vector zero_cost(nvar);
  const Vector mean = model.zero_cost_slope() * dt;
  for (std::size_t k = 0; k < grid.m; ++k) zero_cost.segment(static_cast<Eigen::Index>(k * d), static_cast<Eigen::Index>(d)) = mean;

  auto finish = [&](const Vector& z, double rate, std::vector<TraceEntry> trace) {
    CadlagPath x = grid.path(z, d, T);
    CadlagPath y = solve_skeleton(F, u, x, step);
    return EndpointResult{std::move(x), std::move(y), rate, true, std::move(trace)};
  };

  std::vector<TraceEntry> trace;
  {
    const Eval e = evaluate(zero_cost);
    if (e.violation <= event.tol) return finish(zero_cost, e.rate, trace);
  }

  Rng rng(cfg.seed);
  std::normal_distribution<double> normal;
  const double spread = cfg.start_spread * std::max({std::abs(event.level), mean.norm(), dt});

  std::optional<Vector> best_z;
  double best_rate = kInfinity;
  for (int s = 0; s < cfg.starts; ++s) {
    Vector z = zero_cost;
    if (s > 0) {
      Vector pert(nvar);
      for (Eigen::Index i = 0; i < nvar; ++i) pert[i] = normal(rng) * spread / std::sqrt(static_cast<double>(grid.m));
      z = zero_cost + pert;
      if (is_infinite(evaluate(z).rate)) z = zero_cost + pert.cwiseAbs();
      if (is_infinite(evaluate(z).rate)) continue;
    }
    double mu = cfg.penalty_start;
    for (int stage = 0; stage < cfg.stages; ++stage, mu *= cfg.penalty_growth) {
      auto objective = [&](const Vector& v) {
        const Eval e = evaluate(v);
        return is_infinite(e.rate) ? kInfinity : e.rate + mu * e.violation * e.violation;
      };
      opt::Result r = grid.m <= cfg.simplex_max_segments ? opt::nelder_mead(objective, z) : opt::bfgs(objective, z);
      z = r.x;
      const Eval e = evaluate(z);
      trace.push_back({s, stage, mu, r.value, e.rate, e.violation, r.evaluations});
    }
    const Eval e = evaluate(z);
    if (e.violation <= event.tol && e.rate < best_rate) {
      best_rate = e.rate;
      best_z = z;
    }
  }
  if (!best_z) throw OptimizationError("minimize_endpoint: no feasible control found", std::move(trace));
  return finish(*best_z, best_rate, std::move(trace));
}

}  // namespace ldplab
