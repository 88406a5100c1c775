#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "core.hpp"
#include "paths.hpp"

namespace ldplab {

struct JumpAtom {
  Vector size;
  double intensity = 0.0;
};

/// Finite-activity Lévy measure nu = sum_i lambda_i delta_{x_i}.
struct JumpMeasure {
  std::vector<JumpAtom> atoms;

  double total_mass() const {
    double m = 0.0;
    for (const auto& a : atoms) m += a.intensity;
    return m;
  }
  bool empty() const { return atoms.empty(); }
  double max_size() const {
    double m = 0.0;
    for (const auto& a : atoms) m = std::max(m, a.size.norm());
    return m;
  }
};

/// Law of the unscaled noise X = b t + Sigma^{1/2} W + L, with L compound
/// Poisson. When `compensated` is set, atoms with |x| <= 1 are compensated
/// (the small-jump convention of the scaled family); otherwise L is the raw
/// compound Poisson sum.
struct LevyTriplet {
  std::size_t dim = 1;
  Vector drift;
  Matrix diffusion;
  JumpMeasure jumps;
  bool compensated = false;
  // Optional eps -> b^eps; `drift` is used when unset and is always the
  // eps -> 0 limit that enters the cumulant.
  std::function<Vector(double)> drift_rule;

  static LevyTriplet make(std::size_t dim) {
    LevyTriplet t;
    t.dim = dim;
    t.drift = Vector::Zero(static_cast<Eigen::Index>(dim));
    t.diffusion = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    return t;
  }

  Vector drift_at(double eps) const { return drift_rule ? drift_rule(eps) : drift; }

  bool is_compensated(const JumpAtom& a) const { return compensated && a.size.norm() <= 1.0; }

  void validate() const {
    const auto d = static_cast<Eigen::Index>(dim);
    if (dim == 0) throw DimensionError("LevyTriplet: dim must be positive");
    if (drift.size() != d) throw DimensionError("LevyTriplet: drift has wrong dim");
    if (diffusion.rows() != d || diffusion.cols() != d) throw DimensionError("LevyTriplet: diffusion must be dim x dim");
    if (!diffusion.isApprox(diffusion.transpose(), 1e-12) && diffusion.norm() > 0)
      throw DomainError("LevyTriplet: diffusion must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(diffusion);
    if (es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, diffusion.norm()))
      throw DomainError("LevyTriplet: diffusion must be nonnegative definite");
    for (const auto& a : jumps.atoms) {
      if (a.size.size() != d) throw DimensionError("LevyTriplet: atom has wrong dim");
      if (a.size.norm() == 0.0) throw DomainError("LevyTriplet: atom at 0 is not allowed");
      if (!(a.intensity > 0.0) || !std::isfinite(a.intensity))
        throw DomainError("LevyTriplet: atom intensity must be positive and finite");
    }
    for (double eps : {1.0, 0.5, 0.1, 0.01, 0.001})
      if (!drift_at(eps).allFinite()) throw DomainError("LevyTriplet: drift rule is not finite");
  }
};

inline Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

inline double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

namespace detail {

inline void check_eps(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("eps must lie in (0, 1]");
}

// Drift of the scaled noise per unit time: b^eps minus the compensator of the
// compensated atoms ((lambda/eps) * (eps x) = lambda x).
inline Vector effective_drift(const LevyTriplet& tr, double eps) {
  Vector b = tr.drift_at(eps);
  for (const auto& a : tr.jumps.atoms)
    if (tr.is_compensated(a)) b -= a.intensity * a.size;
  return b;
}

}  // namespace detail

/// Reusable sampler for X^eps = b^eps t + sqrt(eps) Sigma^{1/2} W + eps L_{t/eps}.
///
/// Jumps are exact: exponential inter-arrival times with rate total_mass/eps
/// and sizes eps * x_i drawn proportionally to lambda_i. The Brownian part is
/// exact at the uniform grid and linear in between; jump times are inserted as
/// breakpoints.
class LevySampler {
 public:
  LevySampler(const LevyTriplet& triplet, double eps, double horizon, double grid_step)
      : tr_(triplet), eps_(eps), T_(horizon) {
    tr_.validate();
    detail::check_eps(eps);
    if (!(horizon > 0.0)) throw DomainError("simulate: horizon must be positive");
    if (!(grid_step > 0.0)) throw DomainError("simulate: grid_step must be positive");
    if (grid_step > horizon) throw DomainError("simulate: grid_step must not exceed the horizon");
    steps_ = static_cast<std::size_t>(std::ceil(horizon / grid_step - 1e-9));
    drift_ = detail::effective_drift(tr_, eps);
    vol_ = std::sqrt(eps) * psd_sqrt(tr_.diffusion);
    has_diffusion_ = vol_.norm() > 0.0;
    rate_ = tr_.jumps.total_mass() / eps;
    if (!tr_.jumps.empty()) {
      std::vector<double> w;
      for (const auto& a : tr_.jumps.atoms) w.push_back(a.intensity);
      pick_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
    }
  }

  CadlagPath operator()(std::uint64_t seed) const {
    Rng jump_rng(derive_seed(seed, 1));
    Rng gauss_rng(derive_seed(seed, 2));
    return sample(jump_rng, gauss_rng);
  }

  CadlagPath sample(Rng& jump_rng, Rng& gauss_rng) const {
    const std::size_t d = tr_.dim;
    const auto di = static_cast<Eigen::Index>(d);

    jump_times_.clear();
    jump_atoms_.clear();
    if (rate_ > 0.0) {
      std::exponential_distribution<double> wait(rate_);
      auto pick = pick_;
      for (double t = wait(jump_rng); t < T_; t += wait(jump_rng)) {
        jump_times_.push_back(t);
        jump_atoms_.push_back(pick(jump_rng));
      }
    }

    // continuous part on the uniform grid
    grid_.resize((steps_ + 1) * d);
    std::fill(grid_.begin(), grid_.begin() + static_cast<std::ptrdiff_t>(d), 0.0);
    const double h = T_ / static_cast<double>(steps_);
    const double sh = std::sqrt(h);
    std::normal_distribution<double> normal;
    z_.resize(di);
    for (std::size_t k = 1; k <= steps_; ++k) {
      Eigen::Map<Vector> prev(grid_.data() + (k - 1) * d, di), cur(grid_.data() + k * d, di);
      cur = prev + drift_ * h;
      if (has_diffusion_) {
        for (Eigen::Index i = 0; i < di; ++i) z_[i] = normal(gauss_rng) * sh;
        cur.noalias() += vol_ * z_;
      }
    }

    PathBuilder b(Vector::Zero(di));
    b.reserve(steps_ + 1 + jump_times_.size());
    row_.resize(di);
    acc_ = Vector::Zero(di);
    std::size_t j = 0;
    for (std::size_t k = 1; k <= steps_; ++k) {
      const double tk = k == steps_ ? T_ : h * static_cast<double>(k);
      const double tprev = h * static_cast<double>(k - 1);
      for (; j < jump_times_.size() && jump_times_[j] < tk; ++j) {
        const double tj = jump_times_[j];
        if (tj <= 0.0) continue;
        if (tj > b.last_time()) {
          const double w = (tj - tprev) / h;
          for (std::size_t i = 0; i < d; ++i)
            row_[i] = grid_[(k - 1) * d + i] + w * (grid_[k * d + i] - grid_[(k - 1) * d + i]) + acc_[i];
          b.linear_to(tj, row_.data());
        }
        const Vector dx = eps_ * tr_.jumps.atoms[jump_atoms_[j]].size;
        b.jump_by(dx);
        acc_ += dx;
      }
      for (std::size_t i = 0; i < d; ++i) row_[i] = grid_[k * d + i] + acc_[i];
      b.linear_to(tk, row_.data());
      // a jump landing exactly on a grid time
      for (; j < jump_times_.size() && jump_times_[j] == tk && tk < T_; ++j) {
        const Vector dx = eps_ * tr_.jumps.atoms[jump_atoms_[j]].size;
        b.jump_by(dx);
        acc_ += dx;
      }
    }
    return b.build();
  }

  const LevyTriplet& triplet() const noexcept { return tr_; }
  double eps() const noexcept { return eps_; }
  double horizon() const noexcept { return T_; }

 private:
  LevyTriplet tr_;
  double eps_;
  double T_;
  std::size_t steps_ = 1;
  Vector drift_;
  Matrix vol_;
  bool has_diffusion_ = false;
  double rate_ = 0.0;
  std::discrete_distribution<std::size_t> pick_;

  // scratch; a sampler instance is not shared between threads
  mutable std::vector<double> jump_times_;
  mutable std::vector<std::size_t> jump_atoms_;
  mutable std::vector<double> grid_;
  mutable Vector z_, row_, acc_;
};

/// One exact-in-law sample path of X^eps on [0, T]. Deterministic in `seed`.
inline CadlagPath simulate(const LevyTriplet& triplet, double eps, double T, double grid_step, std::uint64_t seed) {
  return LevySampler(triplet, eps, T, grid_step)(seed);
}

/// Characteristics of X^eps for the truncation h_b, as deterministic functions
/// of time: B_t = t * drift_slope, C_t / eps = t * Sigma, and the scaled
/// Lévy system with atoms (eps x_i, lambda_i / eps).
struct CharTriplet {
  double eps = 1.0;
  double trunc_b = 1.0;
  Vector drift_slope;
  Matrix diffusion;
  std::vector<JumpAtom> nu_eps;

  Vector B(double t) const { return t * drift_slope; }
  Matrix C_over_eps(double t) const { return t * diffusion; }
  double nu_total_mass() const {
    double m = 0.0;
    for (const auto& a : nu_eps) m += a.intensity;
    return m;
  }
};

inline CharTriplet characteristics(const LevyTriplet& tr, double eps, double trunc_b) {
  tr.validate();
  detail::check_eps(eps);
  if (!(trunc_b > 0.0)) throw DomainError("characteristics: truncation level must be positive");
  CharTriplet c;
  c.eps = eps;
  c.trunc_b = trunc_b;
  c.diffusion = tr.diffusion;
  c.drift_slope = tr.drift_at(eps);
  for (const auto& a : tr.jumps.atoms) {
    JumpAtom scaled{eps * a.size, a.intensity / eps};
    // (lambda/eps) * h_b(eps x) summed over the scaled atoms, minus the
    // compensator already present in the process drift
    if (scaled.size.norm() <= trunc_b) c.drift_slope += scaled.intensity * scaled.size;
    if (tr.is_compensated(a)) c.drift_slope -= scaled.intensity * scaled.size;
    c.nu_eps.push_back(std::move(scaled));
  }
  return c;
}

struct ThreeFamilies {
  double drift_variation = 0.0;    // V(B^eps(h_b))_t
  double diffusion_over_eps = 0.0; // |C^eps_t| / eps, operator norm
  double exp_jump_integral = 0.0;  // eps * int exp(|x|/(eps r) v 1) nu^eps(dx, [0,t])
};

/// The three real-valued statistics whose exponential tightness the LDP
/// transfer requires. For this family they are deterministic.
inline ThreeFamilies three_families(const LevyTriplet& tr, double eps, double t, double trunc_b, double r) {
  if (!(r > 0.0)) throw DomainError("three_families: r must be positive");
  if (!(t >= 0.0)) throw DomainError("three_families: t must be nonnegative");
  const CharTriplet c = characteristics(tr, eps, trunc_b);
  ThreeFamilies f;
  f.drift_variation = t * c.drift_slope.norm();
  f.diffusion_over_eps = t * operator_norm(c.diffusion);
  double s = 0.0;
  for (const auto& a : c.nu_eps) s += a.intensity * std::exp(std::max(a.size.norm() / (eps * r), 1.0));
  f.exp_jump_integral = eps * s * t;
  return f;
}

/// Xi(X^eps)_t: variation of the special-semimartingale drift, rescaled
/// quadratic variation of the continuous martingale part, and the rescaled
/// exponential jump integral with Lipschitz constant `lip_C`.
///
/// For atomic nu the jump term equals t * sum_i lambda_i e^{2C|x_i|} |x_i|^2,
/// independent of eps; it is evaluated here from the scaled atoms directly.
inline double xi_process(const LevyTriplet& tr, double eps, double t, double lip_C) {
  tr.validate();
  detail::check_eps(eps);
  if (!(lip_C > 0.0)) throw DomainError("xi_process: lip_C must be positive");
  // canonical decomposition of the special semimartingale: compensator of
  // every uncompensated atom enters the drift
  Vector slope = detail::effective_drift(tr, eps);
  for (const auto& a : tr.jumps.atoms) slope += a.intensity * a.size;
  const double drift_term = t * slope.norm();
  const double qv_term = operator_norm(eps * t * tr.diffusion) / eps;
  double jump_term = 0.0;
  for (const auto& a : tr.jumps.atoms) {
    const double x = (eps * a.size).norm();
    jump_term += (a.intensity / eps) * std::exp(2.0 * lip_C * x / eps) * x * x;
  }
  return drift_term + qv_term + t * jump_term / eps;
}

// ---------------------------------------------------------------------------
// Cumulant and Legendre transform

/// Lambda(theta) = log E exp<theta, X_1> for the unscaled noise.
inline double cumulant(const LevyTriplet& tr, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != tr.dim) throw DimensionError("cumulant: wrong dim");
  double v = theta.dot(tr.drift) + 0.5 * theta.dot(tr.diffusion * theta);
  for (const auto& a : tr.jumps.atoms) {
    const double s = theta.dot(a.size);
    v += a.intensity * (std::expm1(s) - (tr.is_compensated(a) ? s : 0.0));
  }
  return v;
}

inline Vector cumulant_gradient(const LevyTriplet& tr, const Vector& theta) {
  Vector g = tr.drift + tr.diffusion * theta;
  for (const auto& a : tr.jumps.atoms) {
    const double s = theta.dot(a.size);
    g += a.intensity * (std::exp(s) - (tr.is_compensated(a) ? 1.0 : 0.0)) * a.size;
  }
  return g;
}

inline Matrix cumulant_hessian(const LevyTriplet& tr, const Vector& theta) {
  Matrix h = tr.diffusion;
  for (const auto& a : tr.jumps.atoms) h += a.intensity * std::exp(theta.dot(a.size)) * a.size * a.size.transpose();
  return h;
}

/// Mean of X_1, i.e. Lambda'(0); the zero-cost slope of the control rate.
inline Vector noise_mean(const LevyTriplet& tr) {
  return cumulant_gradient(tr, Vector::Zero(static_cast<Eigen::Index>(tr.dim)));
}

struct LegendreResult {
  double value = 0.0;  // +inf when the supremum diverges
  Vector argmax;       // last iterate
  int iterations = 0;
};

struct LegendreOptions {
  int max_iterations = 500;
  double gradient_tol = 1e-12;
  double divergence_level = 1e12;
  double runaway_norm = 1e8;
};

/// Lambda*(z) = sup_theta <theta, z> - Lambda(theta), by damped Newton ascent
/// on the concave objective with Levenberg regularisation for flat
/// directions. Divergence (objective past `divergence_level`) reports +inf.
inline LegendreResult legendre(const LevyTriplet& tr, const Vector& z, const LegendreOptions& opt = {}) {
  const auto d = static_cast<Eigen::Index>(tr.dim);
  if (z.size() != d) throw DimensionError("legendre: wrong dim");
  auto objective = [&](const Vector& th) { return th.dot(z) - cumulant(tr, th); };

  Vector theta = Vector::Zero(d);
  double g = objective(theta);
  double tau = 1e-10;
  const double scale = 1.0 + z.norm();
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Vector grad = z - cumulant_gradient(tr, theta);
    if (grad.norm() <= opt.gradient_tol * scale) return {std::max(g, 0.0), theta, it};
    const Matrix H = cumulant_hessian(tr, theta);
    bool accepted = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      const double reg = tau * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
      Matrix A = H;
      A.diagonal().array() += reg;
      const Vector step = A.ldlt().solve(grad);
      if (!step.allFinite()) {
        tau *= 10.0;
        continue;
      }
      Vector cand = theta + step;
      double gc = objective(cand);
      if (std::isfinite(gc) && gc >= g) {
        // flat directions: keep doubling while the objective still rises
        for (int k = 0; k < 60; ++k) {
          const Vector further = theta + 2.0 * (cand - theta);
          const double gf = objective(further);
          if (!(std::isfinite(gf) && gf > gc)) break;
          cand = further;
          gc = gf;
        }
        // accept; relax regularisation for the next step
        const bool stalled = gc - g <= 1e-16 * std::max(1.0, std::abs(g));
        theta = cand;
        g = gc;
        tau = std::max(tau * 0.1, 1e-14);
        accepted = true;
        if (g > opt.divergence_level) return {kInfinity, theta, it + 1};
        // runaway iterate with the gradient bounded away from zero
        if (theta.norm() > opt.runaway_norm && (z - cumulant_gradient(tr, theta)).norm() > 1e-8 * scale)
          return {kInfinity, theta, it + 1};
        if (stalled && (z - cumulant_gradient(tr, theta)).norm() <= 1e-8 * scale) return {std::max(g, 0.0), theta, it + 1};
      } else if (!std::isfinite(gc) && gc > 0) {
        return {kInfinity, cand, it + 1};
      } else {
        tau *= 10.0;
      }
    }
    if (!accepted) {
      // no ascent direction left at machine precision
      if (grad.norm() <= 1e-8 * scale) return {std::max(g, 0.0), theta, it};
      throw ConvergenceError("legendre: line search failed", theta, it);
    }
  }
  throw ConvergenceError("legendre: no convergence within iteration limit", theta, opt.max_iterations);
}

inline double legendre_value(const LevyTriplet& tr, const Vector& z) { return legendre(tr, z).value; }

inline double legendre_value(const LevyTriplet& tr, double z) {
  Vector v(1);
  v[0] = z;
  return legendre(tr, v).value;
}

}  // namespace ldplab
