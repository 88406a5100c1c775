#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "core.hpp"
#include "levy.hpp"
#include "paths.hpp"
#include "ratefn.hpp"
#include "sde.hpp"
#include "stats.hpp"
#include "vector_field.hpp"

namespace ldplab {

// ---------------------------------------------------------------------------
// Seed-block sharding

/// Sampling plan. Samples are split into fixed-size blocks; block b draws from
/// streams derived from (seed, stream, b), so results do not depend on how
/// many workers process the blocks.
struct Sharding {
  std::size_t block_size = 4096;
  int workers = 1;
};

/// Runs fn(block_index, first_sample, count) for every block and returns the
/// per-block results in block order.
template <class Fn>
auto run_blocks(std::size_t n, const Sharding& sh, Fn fn) {
  using R = decltype(fn(std::size_t{}, std::size_t{}, std::size_t{}));
  const std::size_t bs = std::max<std::size_t>(sh.block_size, 1);
  const std::size_t blocks = (n + bs - 1) / bs;
  std::vector<R> out(blocks);
  auto work = [&](std::size_t w, std::size_t stride) {
    for (std::size_t b = w; b < blocks; b += stride) out[b] = fn(b, b * bs, std::min(bs, n - b * bs));
  };
  const auto workers = static_cast<std::size_t>(std::max(sh.workers, 1));
  if (workers == 1 || blocks <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, blocks); ++w) pool.emplace_back(work, w, std::min(workers, blocks));
    for (auto& t : pool) t.join();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Events on sampled processes

struct EventSpec {
  enum class Target { noise, control, solution, joint };
  EndpointEvent event;
  Target target = Target::solution;

  bool holds(const CadlagPath& x, const CadlagPath& u, const CadlagPath& y) const {
    switch (target) {
      case Target::noise: return event.holds(x);
      case Target::control: return event.holds(u);
      case Target::solution: return event.holds(y);
      case Target::joint: {
        const CadlagPath* ps[] = {&x, &u, &y};
        return event.holds(stack(std::span<const CadlagPath* const>(ps)));
      }
    }
    return false;
  }
};

inline const char* to_string(EventSpec::Target t) {
  switch (t) {
    case EventSpec::Target::noise: return "noise";
    case EventSpec::Target::control: return "control";
    case EventSpec::Target::solution: return "solution";
    case EventSpec::Target::joint: return "joint";
  }
  return "?";
}

inline EventSpec::Target event_target_from_string(const std::string& s) {
  if (s == "noise" || s == "X") return EventSpec::Target::noise;
  if (s == "control" || s == "U") return EventSpec::Target::control;
  if (s == "solution" || s == "Y") return EventSpec::Target::solution;
  if (s == "joint") return EventSpec::Target::joint;
  throw std::invalid_argument("unknown event target '" + s + "'");
}

// ---------------------------------------------------------------------------
// Rate curves

struct RateEntry {
  double eps = 0.0;
  std::size_t samples = 0;  // 0 for closed-form entries
  std::size_t hits = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::optional<double> eps_log_p;  // absent when p_hat == 0
};

struct RateCurve {
  std::vector<RateEntry> entries;
  std::optional<double> fitted_limit;
  std::string method;
};

/// Intercept at eps = 0 of a weighted line through (eps, eps log p). Weights
/// are inverse squared widths of eps log(CI); closed-form entries (zero
/// width) get unit weight. Needs at least three usable points.
inline std::optional<double> fit_limit(const std::vector<RateEntry>& entries) {
  std::vector<double> x, y, w;
  for (const auto& e : entries) {
    if (!e.eps_log_p) continue;
    double width = 0.0;
    if (e.samples > 0) {
      if (!(e.ci_low > 0.0)) continue;
      width = e.eps * (std::log(e.ci_high) - std::log(e.ci_low));
    }
    x.push_back(e.eps);
    y.push_back(*e.eps_log_p);
    w.push_back(width > 0.0 ? 1.0 / (width * width) : 1.0);
  }
  if (x.size() < 3) return std::nullopt;
  const auto f = stats::weighted_line_fit(x, y, w);
  if (!f) return std::nullopt;
  return f->intercept;
}

struct SamplingConfig {
  double horizon = 1.0;
  double grid_step = 0.01;
  std::optional<double> solver_step;  // defaults to grid_step
  Sharding sharding;
};

namespace detail {

inline void check_eps_list(const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw DomainError("eps list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0 && eps_list[i] <= 1.0)) throw DomainError("eps values must lie in (0, 1]");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw DomainError("eps list must be strictly decreasing");
  }
}

inline RateEntry make_entry(double eps, std::size_t hits, std::size_t n) {
  RateEntry e;
  e.eps = eps;
  e.samples = n;
  e.hits = hits;
  e.p_hat = static_cast<double>(hits) / static_cast<double>(n);
  const auto ci = stats::clopper_pearson(hits, n);
  e.ci_low = ci.low;
  e.ci_high = ci.high;
  if (hits > 0) e.eps_log_p = eps * std::log(e.p_hat);
  return e;
}

}  // namespace detail

/// Monte Carlo estimate of eps log P(event) for Y^eps = u + F(Y_-) . X^eps.
inline RateCurve rate_curve(const LevyTriplet& triplet, const VectorField& F, const CadlagPath& u,
                            const EventSpec& event, const std::vector<double>& eps_list, std::size_t N,
                            std::uint64_t seed, const SamplingConfig& cfg = {}) {
  if (N < 1000) throw DomainError("rate_curve: need at least 1000 samples per eps");
  detail::check_eps_list(eps_list);
  if (u.horizon() != cfg.horizon) throw DimensionError("rate_curve: control horizon differs from sampling horizon");
  const double step = cfg.solver_step.value_or(cfg.grid_step);
  RateCurve curve;
  curve.method = "monte_carlo";
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const double eps = eps_list[e];
    const auto counts = run_blocks(N, cfg.sharding, [&](std::size_t b, std::size_t, std::size_t count) {
      LevySampler sampler(triplet, eps, cfg.horizon, cfg.grid_step);
      Rng jr(derive_seed(seed, 2 * e, 2 * b)), gr(derive_seed(seed, 2 * e, 2 * b + 1));
      std::size_t hits = 0;
      for (std::size_t i = 0; i < count; ++i) {
        const CadlagPath x = sampler.sample(jr, gr);
        const CadlagPath y = solve_sde(F, u, x, step);
        if (event.holds(x, u, y)) ++hits;
      }
      return hits;
    });
    std::size_t hits = 0;
    for (auto c : counts) hits += c;
    curve.entries.push_back(detail::make_entry(eps, hits, N));
  }
  bool any = false;
  for (const auto& en : curve.entries) any = any || en.hits > 0;
  if (!any) throw DomainError("rate_curve: event never observed; use larger eps or more samples");
  curve.fitted_limit = fit_limit(curve.entries);
  return curve;
}

/// Closed-form baselines: Y(T) = sigma sqrt(eps) W_T, or Y(T) = eps * jump *
/// Poisson(rate T / eps); event Y(T) >= level.
struct TailFamily {
  enum class Kind { gaussian, poisson };
  Kind kind = Kind::gaussian;
  double sigma = 1.0;  // gaussian
  double rate = 1.0;   // poisson
  double jump = 1.0;   // poisson
  double horizon = 1.0;

  double tail(double level, double eps) const {
    if (kind == Kind::gaussian) return stats::normal_tail(level / (sigma * std::sqrt(eps * horizon)));
    const auto k = static_cast<long>(std::ceil(level / (eps * jump) - 1e-9));
    return stats::poisson_tail(k, rate * horizon / eps);
  }

  /// The eps -> 0 limit of eps log p for level above the mean.
  double limit(double level) const {
    if (kind == Kind::gaussian) return level <= 0 ? 0.0 : -level * level / (2.0 * sigma * sigma * horizon);
    const double z = level / (jump * horizon);
    if (z <= rate) return 0.0;
    return -horizon * (z * std::log(z / rate) - z + rate);
  }
};

inline RateCurve exact_tail_curve(const TailFamily& family, double level, const std::vector<double>& eps_list) {
  detail::check_eps_list(eps_list);
  RateCurve curve;
  curve.method = family.kind == TailFamily::Kind::gaussian ? "exact_gaussian" : "exact_poisson";
  for (double eps : eps_list) {
    RateEntry e;
    e.eps = eps;
    e.p_hat = e.ci_low = e.ci_high = family.tail(level, eps);
    if (e.p_hat > 0.0) e.eps_log_p = eps * std::log(e.p_hat);
    curve.entries.push_back(e);
  }
  curve.fitted_limit = fit_limit(curve.entries);
  return curve;
}

// ---------------------------------------------------------------------------
// Tightness probes

struct ProbeStatistic {
  enum class Kind { sup_norm, skorokhod_modulus, max_jump, count_large_jumps, quadratic_variation };
  Kind kind = Kind::sup_norm;
  double rho = 0.1;  // skorokhod_modulus
  double r = 1.0;    // count_large_jumps

  double operator()(const CadlagPath& p) const {
    const double T = p.horizon();
    switch (kind) {
      case Kind::sup_norm: return sup_norm(p, T);
      case Kind::skorokhod_modulus: return skorokhod_modulus(p, T, rho).value;
      case Kind::max_jump: return jump_stats(p, T, 1.0).max_jump;
      case Kind::count_large_jumps: return static_cast<double>(jump_stats(p, T, r).count_large);
      case Kind::quadratic_variation: return quadratic_variation(p, T);
    }
    return 0.0;
  }
};

inline const char* to_string(ProbeStatistic::Kind k) {
  switch (k) {
    case ProbeStatistic::Kind::sup_norm: return "sup_norm";
    case ProbeStatistic::Kind::skorokhod_modulus: return "skorokhod_modulus";
    case ProbeStatistic::Kind::max_jump: return "max_jump";
    case ProbeStatistic::Kind::count_large_jumps: return "count_large_jumps";
    case ProbeStatistic::Kind::quadratic_variation: return "quadratic_variation";
  }
  return "?";
}

inline ProbeStatistic::Kind probe_statistic_from_string(const std::string& s) {
  for (auto k : {ProbeStatistic::Kind::sup_norm, ProbeStatistic::Kind::skorokhod_modulus, ProbeStatistic::Kind::max_jump,
                 ProbeStatistic::Kind::count_large_jumps, ProbeStatistic::Kind::quadratic_variation})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown probe statistic '" + s + "'");
}

struct ProbeRow {
  double eps = 0.0;
  double a = 0.0;
  std::size_t samples = 0;
  std::size_t hits = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::optional<double> eps_log_p;
  double stat_mean = 0.0;
  double stat_sd = 0.0;
};

/// Empirical exceedance P(stat >= a) of a path statistic of the simulated
/// noise (or of the solution when `on_solution` is set). Reports finite-sample
/// numbers only.
inline std::vector<ProbeRow> tightness_probe(const ProbeStatistic& stat, const LevyTriplet& triplet,
                                             const VectorField& F, const CadlagPath& u,
                                             const std::vector<double>& eps_list, const std::vector<double>& a_list,
                                             std::size_t N, std::uint64_t seed, bool on_solution,
                                             const SamplingConfig& cfg = {}) {
  if (N == 0) throw DomainError("tightness_probe: need samples");
  detail::check_eps_list(eps_list);
  const double step = cfg.solver_step.value_or(cfg.grid_step);
  std::vector<ProbeRow> rows;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const double eps = eps_list[e];
    const auto parts = run_blocks(N, cfg.sharding, [&](std::size_t b, std::size_t, std::size_t count) {
      LevySampler sampler(triplet, eps, cfg.horizon, cfg.grid_step);
      Rng jr(derive_seed(seed, 2 * e, 2 * b)), gr(derive_seed(seed, 2 * e, 2 * b + 1));
      std::vector<double> values;
      values.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        const CadlagPath x = sampler.sample(jr, gr);
        values.push_back(on_solution ? stat(solve_sde(F, u, x, step)) : stat(x));
      }
      return values;
    });
    std::vector<double> all;
    for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    double mean = 0.0, sq = 0.0;
    for (double v : all) mean += v;
    mean /= static_cast<double>(N);
    for (double v : all) sq += (v - mean) * (v - mean);
    const double sd = N > 1 ? std::sqrt(sq / static_cast<double>(N - 1)) : 0.0;
    for (double a : a_list) {
      std::size_t hits = 0;
      for (double v : all) hits += v >= a ? 1 : 0;
      const RateEntry en = detail::make_entry(eps, hits, N);
      rows.push_back({eps, a, N, hits, en.p_hat, en.ci_low, en.ci_high, en.eps_log_p, mean, sd});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Concentration bound for purely discontinuous martingales

/// sup_{0 < |x| <= 1/2} (x - log(1 + x)) / x^2, by golden-section search on
/// [-1/2, 1/2] after a coarse scan.
inline double concentration_constant() {
  auto g = [](double x) { return std::abs(x) < 1e-8 ? 0.5 - x / 3.0 : (x - std::log1p(x)) / (x * x); };
  double best_x = -0.5, best = g(-0.5);
  for (int i = 0; i <= 1000; ++i) {
    const double x = -0.5 + i * 1e-3;
    if (g(x) > best) {
      best = g(x);
      best_x = x;
    }
  }
  double lo = std::max(-0.5, best_x - 1e-3), hi = std::min(0.5, best_x + 1e-3);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 0; i < 200; ++i) {
    const double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
    if (g(m1) >= g(m2)) hi = m2;
    else lo = m1;
  }
  return std::max({best, g(lo), g(hi), g(-0.5)});
}

struct BoundRow {
  double a = 0.0;
  double b = 0.0;
  std::size_t samples = 0;
  std::size_t hits = 0;
  double empirical = 0.0;
  double sigma = 0.0;
  double theta = 0.0;
  double bound = 0.0;
  bool ok = true;  // empirical <= bound + 3 sigma
};

/// Checks P(sup_{s<=t} |M_s| >= a, sum |dM|^2 < b) <= 2 exp(-theta a + C theta^2 b),
/// theta = min(1/(2A), a/(2Cb)), for the compensated one-dimensional compound
/// Poisson martingale with atoms (eps x_i, lambda_i / eps).
inline std::vector<BoundRow> pure_disc_bound_check(const JumpMeasure& jumps, double eps, double t,
                                                   const std::vector<double>& a_list,
                                                   const std::vector<double>& b_list, std::size_t N,
                                                   std::uint64_t seed, const Sharding& sh = {}) {
  if (jumps.empty()) throw DomainError("pure_disc_bound_check: need at least one atom");
  for (const auto& at : jumps.atoms)
    if (at.size.size() != 1) throw DimensionError("pure_disc_bound_check: martingale must be one-dimensional");
  if (!(t > 0.0)) throw DomainError("pure_disc_bound_check: t must be positive");
  LevyTriplet tr = LevyTriplet::make(1);
  tr.jumps = jumps;
  for (const auto& at : jumps.atoms) tr.drift -= at.intensity * at.size;  // full compensation
  const double A = eps * jumps.max_size();
  const double C = concentration_constant();

  struct Sample {
    double sup;
    double qv;
  };
  const auto parts = run_blocks(N, sh, [&](std::size_t b, std::size_t, std::size_t count) {
    LevySampler sampler(tr, eps, t, t);
    Rng jr(derive_seed(seed, 7, 2 * b)), gr(derive_seed(seed, 7, 2 * b + 1));
    std::vector<Sample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const CadlagPath m = sampler.sample(jr, gr);
      double qv = 0.0;
      for (std::size_t k = 1; k < m.size(); ++k) {
        const double j = m.value_span(k)[0] - m.left_span(k)[0];
        qv += j * j;
      }
      out.push_back({sup_norm(m, t), qv});
    }
    return out;
  });
  std::vector<BoundRow> rows;
  for (double a : a_list) {
    for (double b : b_list) {
      if (!(a > 0.0 && b > 0.0)) throw DomainError("pure_disc_bound_check: a and b must be positive");
      std::size_t hits = 0;
      for (const auto& p : parts)
        for (const auto& s : p) hits += (s.sup >= a && s.qv < b) ? 1 : 0;
      BoundRow r;
      r.a = a;
      r.b = b;
      r.samples = N;
      r.hits = hits;
      r.empirical = static_cast<double>(hits) / static_cast<double>(N);
      r.sigma = stats::binomial_sigma(r.empirical, N);
      r.theta = std::min(1.0 / (2.0 * A), a / (2.0 * C * b));
      r.bound = 2.0 * std::exp(-r.theta * a + C * r.theta * r.theta * b);
      r.ok = r.empirical <= r.bound + 3.0 * r.sigma;
      rows.push_back(r);
    }
  }
  return rows;
}

inline const std::vector<double>& default_bound_a_grid() {
  static const std::vector<double> v{0.5, 1.0, 1.5};
  return v;
}
inline const std::vector<double>& default_bound_b_grid() {
  static const std::vector<double> v{0.05, 0.15, 0.5};
  return v;
}

// ---------------------------------------------------------------------------
// Stopping-time gaps

struct SlominskiRow {
  double eps = 0.0;
  double p = 0.0;
  double min_gap = 0.0;  // smallest T(eps, p, N) across samples
  double q01 = 0.0;
  double q05 = 0.0;
  double median = 0.0;
  double max_oscillation = 0.0;     // largest sup_i w(X, [T_i, T_{i+1}) cap [0, N])
  double median_oscillation = 0.0;
};

/// Minimal gap between consecutive crossing times with thresholds 1/p, and
/// the oscillation between them. A path with no crossing before N reports N.
struct GapSample {
  double min_gap;
  double max_oscillation;
};

inline GapSample crossing_gaps(const CadlagPath& path, double threshold, double N) {
  const double a[] = {threshold};
  const auto st = stopping_times(path, a, N);
  double gap = kInfinity, osc = 0.0;
  const std::size_t crossings = st.times.size() - (st.truncated ? 2 : 1);
  for (std::size_t i = 0; i + 1 < st.times.size(); ++i) {
    if (i < crossings) gap = std::min(gap, st.times[i + 1] - st.times[i]);
    osc = std::max(osc, oscillation(path, st.times[i], st.times[i + 1]));
  }
  return {is_infinite(gap) ? N : gap, osc};
}

inline std::vector<SlominskiRow> slominski_probe(const LevyTriplet& triplet, const std::vector<double>& eps_list,
                                                 const std::vector<double>& p_list, std::size_t N, double horizon,
                                                 std::uint64_t seed, double grid_step = 0.01,
                                                 const Sharding& sh = {}) {
  detail::check_eps_list(eps_list);
  std::vector<SlominskiRow> rows;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const double eps = eps_list[e];
    const auto paths = run_blocks(N, sh, [&](std::size_t b, std::size_t, std::size_t count) {
      LevySampler sampler(triplet, eps, horizon, grid_step);
      Rng jr(derive_seed(seed, 2 * e, 2 * b)), gr(derive_seed(seed, 2 * e, 2 * b + 1));
      std::vector<CadlagPath> out;
      out.reserve(count);
      for (std::size_t i = 0; i < count; ++i) out.push_back(sampler.sample(jr, gr));
      return out;
    });
    for (double p : p_list) {
      if (!(p > 0.0)) throw DomainError("slominski_probe: p must be positive");
      std::vector<double> gaps, oscs;
      for (const auto& blk : paths)
        for (const auto& x : blk) {
          const auto g = crossing_gaps(x, 1.0 / p, horizon);
          gaps.push_back(g.min_gap);
          oscs.push_back(g.max_oscillation);
        }
      SlominskiRow r;
      r.eps = eps;
      r.p = p;
      r.min_gap = *std::min_element(gaps.begin(), gaps.end());
      r.q01 = stats::quantile(gaps, 0.01);
      r.q05 = stats::quantile(gaps, 0.05);
      r.median = stats::quantile(gaps, 0.5);
      r.max_oscillation = *std::max_element(oscs.begin(), oscs.end());
      r.median_oscillation = stats::quantile(oscs, 0.5);
      rows.push_back(r);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Stochastic-integral blow-up for a fixed catalog of bounded integrands

enum class Integrand { plus_one, minus_one, sign_flip, feedback };

inline const char* to_string(Integrand h) {
  switch (h) {
    case Integrand::plus_one: return "plus_one";
    case Integrand::minus_one: return "minus_one";
    case Integrand::sign_flip: return "sign_flip";
    case Integrand::feedback: return "feedback";
  }
  return "?";
}

/// sup_t |(H . X^0)_t| for the first noise coordinate, with H evaluated at
/// the left end of each breakpoint interval (predictable). sign_flip switches
/// from +1 to -1 at T/2; feedback uses the sign of the running integral.
inline double integral_sup(const CadlagPath& x, Integrand h) {
  const double T = x.horizon();
  double integral = 0.0, sup = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    double H = 1.0;
    switch (h) {
      case Integrand::plus_one: H = 1.0; break;
      case Integrand::minus_one: H = -1.0; break;
      case Integrand::sign_flip: H = x.time(k) < 0.5 * T ? 1.0 : -1.0; break;
      case Integrand::feedback: H = integral >= 0.0 ? 1.0 : -1.0; break;
    }
    integral += H * (x.left_span(k + 1)[0] - x.value_span(k)[0]);
    sup = std::max(sup, std::abs(integral));
    if (h == Integrand::feedback) H = integral >= 0.0 ? 1.0 : -1.0;
    integral += H * (x.value_span(k + 1)[0] - x.left_span(k + 1)[0]);
    sup = std::max(sup, std::abs(integral));
  }
  return sup;
}

struct UetRow {
  double eps = 0.0;
  Integrand integrand = Integrand::plus_one;
  double a = 0.0;
  std::size_t hits = 0;
  double p_hat = 0.0;
  std::optional<double> eps_log_p;
};

inline std::vector<UetRow> uet_probe(const LevyTriplet& triplet, const std::vector<double>& eps_list,
                                     const std::vector<double>& a_list, std::size_t N, std::uint64_t seed,
                                     const SamplingConfig& cfg = {}) {
  detail::check_eps_list(eps_list);
  static constexpr Integrand catalog[] = {Integrand::plus_one, Integrand::minus_one, Integrand::sign_flip,
                                          Integrand::feedback};
  std::vector<UetRow> rows;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const double eps = eps_list[e];
    const auto parts = run_blocks(N, cfg.sharding, [&](std::size_t b, std::size_t, std::size_t count) {
      LevySampler sampler(triplet, eps, cfg.horizon, cfg.grid_step);
      Rng jr(derive_seed(seed, 2 * e, 2 * b)), gr(derive_seed(seed, 2 * e, 2 * b + 1));
      std::vector<std::array<double, 4>> out;
      out.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        const CadlagPath x = sampler.sample(jr, gr);
        out.push_back({integral_sup(x, catalog[0]), integral_sup(x, catalog[1]), integral_sup(x, catalog[2]),
                       integral_sup(x, catalog[3])});
      }
      return out;
    });
    for (std::size_t h = 0; h < 4; ++h) {
      for (double a : a_list) {
        std::size_t hits = 0;
        for (const auto& p : parts)
          for (const auto& s : p) hits += s[h] >= a ? 1 : 0;
        UetRow r{eps, catalog[h], a, hits, static_cast<double>(hits) / static_cast<double>(N), std::nullopt};
        if (hits > 0) r.eps_log_p = eps * std::log(r.p_hat);
        rows.push_back(r);
      }
    }
  }
  return rows;
}

}  // namespace ldplab
