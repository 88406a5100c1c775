#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"

namespace ldplab {

enum class SegmentMode : std::uint8_t { constant, linear };

using ConstVectorMap = Eigen::Map<const Vector>;

/// A càdlàg function on [0, T] with finitely many breakpoints.
///
/// Breakpoint k carries the right value x(t_k) and the left limit x(t_k-);
/// a jump happens at t_k exactly when the two differ. Segment k spans
/// [t_k, t_{k+1}) and is either held at values[k] or interpolated linearly
/// from values[k] to left_values[k+1]. Storage is flat (row k occupies
/// [k*dim, (k+1)*dim)) and immutable after construction.
class CadlagPath {
 public:
  CadlagPath(std::size_t dim, std::vector<double> times, std::vector<double> values,
             std::vector<double> left_values, std::vector<SegmentMode> modes)
      : dim_(dim),
        times_(std::move(times)),
        values_(std::move(values)),
        left_(std::move(left_values)),
        modes_(std::move(modes)) {
    validate();
  }

  static CadlagPath constant(const Vector& v, double horizon) {
    std::vector<double> vals(2 * v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) vals[i] = vals[v.size() + i] = v[i];
    return CadlagPath(v.size(), {0.0, horizon}, vals, vals, {SegmentMode::constant});
  }

  static CadlagPath zero(std::size_t dim, double horizon) {
    return constant(Vector::Zero(static_cast<Eigen::Index>(dim)), horizon);
  }

  // Straight line from `start` at 0 to `end` at `horizon`.
  static CadlagPath line(const Vector& start, const Vector& end, double horizon) {
    const auto d = static_cast<std::size_t>(start.size());
    if (static_cast<std::size_t>(end.size()) != d) throw DimensionError("line: endpoint dims differ");
    std::vector<double> vals(2 * d);
    for (std::size_t i = 0; i < d; ++i) {
      vals[i] = start[i];
      vals[d + i] = end[i];
    }
    return CadlagPath(d, {0.0, horizon}, vals, vals, {SegmentMode::linear});
  }

  std::size_t dim() const noexcept { return dim_; }
  double horizon() const noexcept { return times_.back(); }
  std::size_t size() const noexcept { return times_.size(); }
  std::size_t segments() const noexcept { return modes_.size(); }

  const std::vector<double>& times() const noexcept { return times_; }
  double time(std::size_t k) const { return times_[k]; }
  SegmentMode mode(std::size_t k) const { return modes_[k]; }
  const std::vector<SegmentMode>& modes() const noexcept { return modes_; }
  const std::vector<double>& raw_values() const noexcept { return values_; }
  const std::vector<double>& raw_left_values() const noexcept { return left_; }

  std::span<const double> value_span(std::size_t k) const { return {values_.data() + k * dim_, dim_}; }
  std::span<const double> left_span(std::size_t k) const { return {left_.data() + k * dim_, dim_}; }

  ConstVectorMap value(std::size_t k) const {
    return ConstVectorMap(values_.data() + k * dim_, static_cast<Eigen::Index>(dim_));
  }
  ConstVectorMap left_value(std::size_t k) const {
    return ConstVectorMap(left_.data() + k * dim_, static_cast<Eigen::Index>(dim_));
  }
  Vector jump(std::size_t k) const { return value(k) - left_value(k); }
  bool has_jump(std::size_t k) const {
    for (std::size_t i = 0; i < dim_; ++i)
      if (values_[k * dim_ + i] != left_[k * dim_ + i]) return true;
    return false;
  }

  // Displacement across segment k, excluding the jump at its right end.
  Vector displacement(std::size_t k) const { return left_value(k + 1) - value(k); }

  // Index k of the segment [t_k, t_{k+1}) containing t; the final breakpoint
  // maps to the last segment.
  std::size_t segment_index(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - times_.begin());
    k = k == 0 ? 0 : k - 1;
    return std::min(k, segments() - 1);
  }

  /// Right-continuous value x(t).
  void eval(double t, std::span<double> out) const {
    check_time(t);
    if (t == horizon()) {
      copy_row(values_, size() - 1, out);
      return;
    }
    interpolate(segment_index(t), t, out);
  }

  /// Left limit x(t-); x(0-) := x(0).
  void eval_left(double t, std::span<double> out) const {
    check_time(t);
    if (t == 0.0) {
      copy_row(values_, 0, out);
      return;
    }
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    const auto j = static_cast<std::size_t>(it - times_.begin());
    if (j < size() && times_[j] == t) {
      copy_row(left_, j, out);
      return;
    }
    interpolate(j - 1, t, out);
  }

  Vector operator()(double t) const {
    Vector out(static_cast<Eigen::Index>(dim_));
    eval(t, {out.data(), dim_});
    return out;
  }
  Vector left_limit(double t) const {
    Vector out(static_cast<Eigen::Index>(dim_));
    eval_left(t, {out.data(), dim_});
    return out;
  }

 private:
  static void copy_row(const std::vector<double>& src, std::size_t k, std::span<double> out) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(k * out.size()), out.size(), out.begin());
  }

  void interpolate(std::size_t k, double t, std::span<double> out) const {
    const double* v0 = values_.data() + k * dim_;
    if (modes_[k] == SegmentMode::constant || t == times_[k]) {
      std::copy_n(v0, dim_, out.begin());
      return;
    }
    const double* v1 = left_.data() + (k + 1) * dim_;
    const double w = (t - times_[k]) / (times_[k + 1] - times_[k]);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = v0[i] + w * (v1[i] - v0[i]);
  }

  void check_time(double t) const {
    if (!(t >= 0.0 && t <= horizon()))
      throw DomainError("time " + std::to_string(t) + " outside [0, " + std::to_string(horizon()) + "]");
  }

  void validate() const {
    if (dim_ == 0) throw DimensionError("CadlagPath: dim must be positive");
    const std::size_t n = times_.size();
    if (n < 2) throw DomainError("CadlagPath: need at least two breakpoints");
    if (values_.size() != n * dim_ || left_.size() != n * dim_)
      throw DimensionError("CadlagPath: value arrays do not match breakpoints x dim");
    if (modes_.size() != n - 1) throw DimensionError("CadlagPath: need one mode per segment");
    if (times_.front() != 0.0) throw DomainError("CadlagPath: first breakpoint must be 0");
    for (std::size_t k = 1; k < n; ++k)
      if (!(times_[k] > times_[k - 1])) throw DomainError("CadlagPath: breakpoints must increase strictly");
    for (double v : values_)
      if (!std::isfinite(v)) throw DomainError("CadlagPath: non-finite value");
    for (double v : left_)
      if (!std::isfinite(v)) throw DomainError("CadlagPath: non-finite left value");
    for (std::size_t i = 0; i < dim_; ++i)
      if (left_[i] != values_[i]) throw DomainError("CadlagPath: jump at time 0 is not allowed");
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (modes_[k] != SegmentMode::constant) continue;
      for (std::size_t i = 0; i < dim_; ++i) {
        const double a = values_[k * dim_ + i];
        const double b = left_[(k + 1) * dim_ + i];
        if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
          throw DomainError("CadlagPath: constant segment must end at its starting value");
      }
    }
  }

  std::size_t dim_;
  std::vector<double> times_;
  std::vector<double> values_;
  std::vector<double> left_;
  std::vector<SegmentMode> modes_;
};

/// Incremental construction of a CadlagPath, segment by segment.
class PathBuilder {
 public:
  explicit PathBuilder(const Vector& start) : dim_(static_cast<std::size_t>(start.size())) {
    times_.push_back(0.0);
    push_row(values_, start.data());
    push_row(left_, start.data());
  }

  PathBuilder& linear_to(double t, const Vector& x) {
    check(t, x);
    times_.push_back(t);
    push_row(values_, x.data());
    push_row(left_, x.data());
    modes_.push_back(SegmentMode::linear);
    return *this;
  }

  // Linear segment with a raw pointer to dim() values; hot path for samplers.
  PathBuilder& linear_to(double t, const double* x) {
    times_.push_back(t);
    push_row(values_, x);
    push_row(left_, x);
    modes_.push_back(SegmentMode::linear);
    return *this;
  }

  PathBuilder& hold_to(double t) {
    const std::size_t k = times_.size() - 1;
    times_.push_back(t);
    values_.insert(values_.end(), values_.begin() + static_cast<std::ptrdiff_t>(k * dim_),
                   values_.begin() + static_cast<std::ptrdiff_t>((k + 1) * dim_));
    left_.insert(left_.end(), values_.end() - static_cast<std::ptrdiff_t>(dim_), values_.end());
    modes_.push_back(SegmentMode::constant);
    return *this;
  }

  // Adds dx to the right value at the most recent breakpoint.
  PathBuilder& jump_by(const Vector& dx) { return jump_by(dx.data()); }
  PathBuilder& jump_by(const double* dx) {
    if (times_.size() == 1) throw DomainError("PathBuilder: jump at time 0 is not allowed");
    double* v = values_.data() + (times_.size() - 1) * dim_;
    for (std::size_t i = 0; i < dim_; ++i) v[i] += dx[i];
    return *this;
  }

  std::size_t dim() const noexcept { return dim_; }
  double last_time() const noexcept { return times_.back(); }
  ConstVectorMap last_value() const {
    return ConstVectorMap(values_.data() + (times_.size() - 1) * dim_, static_cast<Eigen::Index>(dim_));
  }

  void reserve(std::size_t breakpoints) {
    times_.reserve(breakpoints);
    values_.reserve(breakpoints * dim_);
    left_.reserve(breakpoints * dim_);
    modes_.reserve(breakpoints);
  }

  /// Hands the accumulated data to a path; the builder is left empty.
  CadlagPath build() {
    return CadlagPath(dim_, std::move(times_), std::move(values_), std::move(left_), std::move(modes_));
  }

 private:
  void check(double t, const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != dim_) throw DimensionError("PathBuilder: wrong vector dim");
    if (!(t > times_.back())) throw DomainError("PathBuilder: times must increase strictly");
  }
  void push_row(std::vector<double>& dst, const double* x) { dst.insert(dst.end(), x, x + dim_); }

  std::size_t dim_;
  std::vector<double> times_;
  std::vector<double> values_;
  std::vector<double> left_;
  std::vector<SegmentMode> modes_;
};

// ---------------------------------------------------------------------------
// Path statistics

namespace detail {

inline double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline void check_upto(const CadlagPath& p, double t) {
  if (!(t >= 0.0 && t <= p.horizon())) throw DomainError("time outside [0, T]");
}

}  // namespace detail

/// sup_{s <= t} |x(s)|, including left limits at jumps.
inline double sup_norm(const CadlagPath& path, double t) {
  detail::check_upto(path, t);
  double best = 0.0;
  for (std::size_t k = 0; k < path.size() && path.time(k) <= t; ++k) {
    best = std::max(best, detail::norm(path.left_span(k)));
    best = std::max(best, detail::norm(path.value_span(k)));
  }
  // The norm is convex, so on the partial segment ending at t the extremes
  // are its endpoints.
  best = std::max(best, path(t).norm());
  best = std::max(best, path.left_limit(t).norm());
  return best;
}

struct JumpStats {
  double max_jump = 0.0;
  std::size_t count_large = 0;
  double sum_large = 0.0;
};

/// Largest jump up to t, plus count and absolute sum of jumps larger than r.
inline JumpStats jump_stats(const CadlagPath& path, double t, double r) {
  detail::check_upto(path, t);
  if (!(r > 0.0)) throw DomainError("jump_stats: r must be positive");
  JumpStats s;
  for (std::size_t k = 1; k < path.size() && path.time(k) <= t; ++k) {
    const double j = detail::distance(path.value_span(k), path.left_span(k));
    s.max_jump = std::max(s.max_jump, j);
    if (j > r) {
      ++s.count_large;
      s.sum_large += j;
    }
  }
  return s;
}

/// Total variation on [0, t]. Always finite for this path class.
inline double variation(const CadlagPath& path, double t) {
  detail::check_upto(path, t);
  double v = 0.0;
  for (std::size_t k = 0; k + 1 < path.size() && path.time(k) < t; ++k) {
    if (path.mode(k) == SegmentMode::linear) {
      const double full = detail::distance(path.left_span(k + 1), path.value_span(k));
      const double t1 = path.time(k + 1);
      v += t >= t1 ? full : full * (t - path.time(k)) / (t1 - path.time(k));
    }
    if (path.time(k + 1) <= t) v += detail::distance(path.value_span(k + 1), path.left_span(k + 1));
  }
  return v;
}

/// Pathwise quadratic variation on [0, t]: squared segment displacements plus
/// squared jumps. This is the sampled-grid Itô sum for piecewise-linear paths.
inline double quadratic_variation(const CadlagPath& path, double t) {
  detail::check_upto(path, t);
  double q = 0.0;
  for (std::size_t k = 0; k + 1 < path.size() && path.time(k) < t; ++k) {
    if (path.mode(k) == SegmentMode::linear) {
      const double full = detail::distance(path.left_span(k + 1), path.value_span(k));
      const double t1 = path.time(k + 1);
      const double frac = t >= t1 ? 1.0 : (t - path.time(k)) / (t1 - path.time(k));
      q += full * full * frac * frac;
    }
    if (path.time(k + 1) <= t) {
      const double j = detail::distance(path.value_span(k + 1), path.left_span(k + 1));
      q += j * j;
    }
  }
  return q;
}

/// Oscillation w(x, [a, b)) = sup_{s,u in [a,b)} |x(s) - x(u)|. The sup over a
/// union of segments is attained at segment endpoints, so this is the diameter
/// of x(a), every left/right value strictly inside (a, b), and x(b-).
inline double oscillation(const CadlagPath& path, double a, double b) {
  detail::check_upto(path, a);
  detail::check_upto(path, b);
  if (!(b > a)) return 0.0;
  std::vector<Vector> pts;
  pts.push_back(path(a));
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (path.time(k) <= a) continue;
    if (path.time(k) >= b) break;
    pts.emplace_back(path.left_value(k));
    pts.emplace_back(path.value(k));
  }
  pts.push_back(path.left_limit(b));
  double w = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) w = std::max(w, (pts[i] - pts[j]).norm());
  return w;
}

struct PartitionModulus {
  double T = 0.0;
  double rho = 0.0;
  double value = 0.0;
  std::vector<double> cuts;  // optimal partition found, 0 = t_0 < ... < t_k = T
};

/// Skorokhod modulus w_T(x, rho): the infimum over partitions of [0, T] whose
/// interior intervals are longer than rho (the last one is exempt) of the
/// largest oscillation on a partition interval.
///
/// Cut points are restricted to the breakpoints plus a uniform grid of
/// `grid_points` points on [0, T]; the minimisation over that candidate set is
/// exact (dynamic programming over the last cut).
inline PartitionModulus skorokhod_modulus(const CadlagPath& path, double T, double rho,
                                          std::size_t grid_points = 256) {
  if (!(T > 0.0 && T <= path.horizon())) throw DomainError("skorokhod_modulus: T outside (0, horizon]");
  if (!(rho > 0.0 && rho < T)) throw DomainError("skorokhod_modulus: need 0 < rho < T");
  if (grid_points < 2) throw DomainError("skorokhod_modulus: grid needs at least two points");

  std::vector<double> cand;
  cand.reserve(grid_points + path.size());
  for (std::size_t i = 0; i < grid_points; ++i)
    cand.push_back(T * static_cast<double>(i) / static_cast<double>(grid_points - 1));
  for (double t : path.times())
    if (t < T) cand.push_back(t);
  std::sort(cand.begin(), cand.end());
  std::vector<double> uniq;
  for (double t : cand)
    if (uniq.empty() || t - uniq.back() > 1e-12 * T) uniq.push_back(t);
  uniq.back() = T;
  const std::size_t K = uniq.size();
  const std::size_t d = path.dim();

  // Right values and left limits at every candidate, flat.
  std::vector<double> right(K * d), left(K * d);
  for (std::size_t j = 0; j < K; ++j) {
    path.eval(uniq[j], {right.data() + j * d, d});
    path.eval_left(uniq[j], {left.data() + j * d, d});
  }
  auto row = [d](const std::vector<double>& v, std::size_t j) { return std::span<const double>(v.data() + j * d, d); };

  // Every breakpoint is a candidate, so on [c_i, c_j) the extreme points are
  // x(c_i), x(c_m-) and x(c_m) for i < m < j, and x(c_j-).
  std::vector<double> osc(K * K, 0.0);
  std::vector<std::span<const double>> pts;
  if (d == 1) {
    for (std::size_t i = 0; i + 1 < K; ++i) {
      double lo = right[i], hi = right[i];
      for (std::size_t j = i + 1; j < K; ++j) {
        if (j - 1 > i) {
          lo = std::min(lo, right[j - 1]);
          hi = std::max(hi, right[j - 1]);
        }
        lo = std::min(lo, left[j]);
        hi = std::max(hi, left[j]);
        osc[i * K + j] = hi - lo;
      }
    }
  }
  for (std::size_t i = 0; d > 1 && i + 1 < K; ++i) {
    pts.clear();
    pts.push_back(row(right, i));
    double diam = 0.0;
    auto add = [&](std::span<const double> p) {
      for (const auto& q : pts) diam = std::max(diam, detail::distance(p, q));
      pts.push_back(p);
    };
    for (std::size_t j = i + 1; j < K; ++j) {
      // at continuity points the right value repeats the left limit added before
      if (j - 1 > i && !std::equal(right.begin() + (j - 1) * d, right.begin() + j * d, left.begin() + (j - 1) * d))
        add(row(right, j - 1));
      add(row(left, j));
      osc[i * K + j] = diam;
    }
  }

  std::vector<double> best(K, kInfinity);
  std::vector<std::size_t> prev(K, 0);
  best[0] = 0.0;
  for (std::size_t j = 1; j + 1 < K; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (!(uniq[j] - uniq[i] > rho) || is_infinite(best[i])) continue;
      const double v = std::max(best[i], osc[i * K + j]);
      if (v < best[j]) {
        best[j] = v;
        prev[j] = i;
      }
    }
  }
  double value = kInfinity;
  std::size_t last = 0;
  for (std::size_t i = 0; i + 1 < K; ++i) {
    if (is_infinite(best[i])) continue;
    const double v = std::max(best[i], osc[i * K + K - 1]);
    if (v < value) {
      value = v;
      last = i;
    }
  }

  PartitionModulus out{T, rho, value, {}};
  out.cuts.push_back(T);
  for (std::size_t j = last; j != 0; j = prev[j]) out.cuts.push_back(uniq[j]);
  out.cuts.push_back(0.0);
  std::reverse(out.cuts.begin(), out.cuts.end());
  return out;
}

struct StoppingSequence {
  std::vector<double> times;  // T_0 = 0, T_1, ..., ending at N
  bool truncated = false;     // final entry is N rather than a crossing
};

/// Threshold crossing times: T_0 = 0 and T_{i+1} is the first t > T_i with
/// |x(t) - x(T_i)| >= a_i or |x(t-) - x(T_i)| >= a_i, stopped at N.
/// If `thresholds` is shorter than needed, its last entry is reused.
inline StoppingSequence stopping_times(const CadlagPath& path, std::span<const double> thresholds, double N) {
  if (thresholds.empty()) throw DomainError("stopping_times: need at least one threshold");
  for (double a : thresholds)
    if (!(a > 0.0)) throw DomainError("stopping_times: thresholds must be positive");
  if (!(N > 0.0 && N <= path.horizon())) throw DomainError("stopping_times: N outside (0, horizon]");

  const std::size_t d = path.dim();
  StoppingSequence out;
  out.times.push_back(0.0);
  Vector anchor = path(0.0);
  Vector start(static_cast<Eigen::Index>(d));

  double tau = 0.0;
  std::size_t i = 0;
  while (tau < N) {
    const double a = thresholds[std::min(i, thresholds.size() - 1)];
    double hit = kInfinity;
    for (std::size_t k = path.segment_index(tau); k + 1 < path.size() && hit == kInfinity; ++k) {
      const double t0 = std::max(tau, path.time(k));
      const double t1 = path.time(k + 1);
      if (t0 > tau) {
        // right value at breakpoint t_k (after any jump)
        if ((path.value(k) - anchor).norm() >= a) {
          hit = t0;
          break;
        }
      }
      path.eval(t0, {start.data(), d});
      if (path.mode(k) == SegmentMode::constant) continue;
      const Vector vel = path.displacement(k) / (t1 - path.time(k));
      const double vv = vel.squaredNorm();
      if (vv == 0.0) continue;
      const Vector d0 = start - anchor;
      const double bcoef = d0.dot(vel);
      const double disc = bcoef * bcoef - vv * (d0.squaredNorm() - a * a);
      if (disc < 0.0) continue;
      const double s = (-bcoef + std::sqrt(disc)) / vv;
      if (s > 0.0 && t0 + s <= t1) hit = t0 + s;
      else if ((path.left_value(k + 1) - anchor).norm() >= a) hit = t1;
    }
    if (!(hit <= N)) break;
    out.times.push_back(hit);
    tau = hit;
    anchor = path(hit);
    ++i;
  }
  if (out.times.back() < N) {
    out.times.push_back(N);
    out.truncated = true;
  }
  return out;
}

/// Split x into the sum of its jumps larger than b and the remainder.
struct TruncationSplit {
  CadlagPath large_jumps;
  CadlagPath remainder;
};

inline TruncationSplit truncation_split(const CadlagPath& path, double b) {
  if (!(b > 0.0)) throw DomainError("truncation_split: b must be positive");
  const std::size_t d = path.dim();
  const std::size_t n = path.size();
  std::vector<double> lv(n * d, 0.0), ll(n * d, 0.0);
  std::vector<double> rv(path.raw_values()), rl(path.raw_left_values());
  std::vector<double> acc(d, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    // left limit at t_k carries the accumulated large jumps before t_k
    for (std::size_t i = 0; i < d; ++i) ll[k * d + i] = acc[i];
    if (k > 0 && detail::distance(path.value_span(k), path.left_span(k)) > b)
      for (std::size_t i = 0; i < d; ++i) acc[i] += path.value_span(k)[i] - path.left_span(k)[i];
    for (std::size_t i = 0; i < d; ++i) {
      lv[k * d + i] = acc[i];
      rv[k * d + i] -= acc[i];
      rl[k * d + i] -= ll[k * d + i];
    }
  }
  std::vector<SegmentMode> const_modes(n - 1, SegmentMode::constant);
  return {CadlagPath(d, path.times(), std::move(lv), std::move(ll), std::move(const_modes)),
          CadlagPath(d, path.times(), std::move(rv), std::move(rl), path.modes())};
}

// ---------------------------------------------------------------------------
// Path algebra on merged breakpoint grids

/// Sorted union of breakpoint sets.
inline std::vector<double> merge_times(std::span<const CadlagPath* const> paths) {
  std::vector<double> all;
  for (const auto* p : paths) all.insert(all.end(), p->times().begin(), p->times().end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

/// The same function re-expressed on a superset of its breakpoints. Segment
/// modes are kept where the original segment was constant.
inline CadlagPath resample(const CadlagPath& path, const std::vector<double>& times) {
  if (times.empty() || times.front() != 0.0 || times.back() != path.horizon())
    throw DimensionError("resample: grid must span [0, horizon]");
  const std::size_t d = path.dim();
  const std::size_t n = times.size();
  std::vector<double> v(n * d), l(n * d);
  std::vector<SegmentMode> modes(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    path.eval(times[k], {v.data() + k * d, d});
    path.eval_left(times[k], {l.data() + k * d, d});
    if (k + 1 < n) modes[k] = path.mode(path.segment_index(times[k]));
  }
  return CadlagPath(d, times, std::move(v), std::move(l), std::move(modes));
}

/// Coordinates of several paths stacked into one path of summed dimension.
inline CadlagPath stack(std::span<const CadlagPath* const> paths) {
  if (paths.empty()) throw DimensionError("stack: no paths");
  const double T = paths.front()->horizon();
  std::size_t d = 0;
  for (const auto* p : paths) {
    if (p->horizon() != T) throw DimensionError("stack: horizons differ");
    d += p->dim();
  }
  const auto times = merge_times(paths);
  const std::size_t n = times.size();
  std::vector<double> v(n * d), l(n * d);
  std::vector<SegmentMode> modes(n - 1, SegmentMode::constant);
  std::size_t off = 0;
  for (const auto* p : paths) {
    const std::size_t pd = p->dim();
    for (std::size_t k = 0; k < n; ++k) {
      p->eval(times[k], {v.data() + k * d + off, pd});
      p->eval_left(times[k], {l.data() + k * d + off, pd});
      if (k + 1 < n && p->mode(p->segment_index(times[k])) == SegmentMode::linear) modes[k] = SegmentMode::linear;
    }
    off += pd;
  }
  return CadlagPath(d, times, std::move(v), std::move(l), std::move(modes));
}

inline CadlagPath stack(const std::vector<CadlagPath>& paths) {
  std::vector<const CadlagPath*> ptrs;
  for (const auto& p : paths) ptrs.push_back(&p);
  return stack(std::span<const CadlagPath* const>(ptrs));
}

/// Pointwise linear combination sum_i w_i x_i of equal-dimension paths.
inline CadlagPath combine(std::span<const CadlagPath* const> paths, std::span<const double> weights) {
  if (paths.empty() || paths.size() != weights.size()) throw DimensionError("combine: size mismatch");
  const std::size_t d = paths.front()->dim();
  const double T = paths.front()->horizon();
  for (const auto* p : paths)
    if (p->dim() != d || p->horizon() != T) throw DimensionError("combine: dims or horizons differ");
  const auto times = merge_times(paths);
  const std::size_t n = times.size();
  std::vector<double> v(n * d, 0.0), l(n * d, 0.0), buf(d);
  std::vector<SegmentMode> modes(n - 1, SegmentMode::constant);
  for (std::size_t j = 0; j < paths.size(); ++j) {
    const auto* p = paths[j];
    for (std::size_t k = 0; k < n; ++k) {
      p->eval(times[k], buf);
      for (std::size_t i = 0; i < d; ++i) v[k * d + i] += weights[j] * buf[i];
      p->eval_left(times[k], buf);
      for (std::size_t i = 0; i < d; ++i) l[k * d + i] += weights[j] * buf[i];
      if (k + 1 < n && p->mode(p->segment_index(times[k])) == SegmentMode::linear) modes[k] = SegmentMode::linear;
    }
  }
  return CadlagPath(d, times, std::move(v), std::move(l), std::move(modes));
}

inline CadlagPath add(const CadlagPath& a, const CadlagPath& b) {
  const CadlagPath* ps[] = {&a, &b};
  const double w[] = {1.0, 1.0};
  return combine(ps, w);
}

inline CadlagPath subtract(const CadlagPath& a, const CadlagPath& b) {
  const CadlagPath* ps[] = {&a, &b};
  const double w[] = {1.0, -1.0};
  return combine(ps, w);
}

/// Single coordinate of a path as a one-dimensional path.
inline CadlagPath coordinate(const CadlagPath& path, std::size_t c) {
  if (c >= path.dim()) throw DimensionError("coordinate: index out of range");
  const std::size_t n = path.size();
  std::vector<double> v(n), l(n);
  for (std::size_t k = 0; k < n; ++k) {
    v[k] = path.value_span(k)[c];
    l[k] = path.left_span(k)[c];
  }
  return CadlagPath(1, path.times(), std::move(v), std::move(l), path.modes());
}

}  // namespace ldplab
