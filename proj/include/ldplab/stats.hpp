#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "core.hpp"

namespace ldplab::stats {

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Exact (Clopper-Pearson) two-sided binomial interval at level 1 - alpha.
inline Interval clopper_pearson(std::size_t hits, std::size_t n, double alpha = 0.05) {
  if (n == 0) throw DomainError("clopper_pearson: no trials");
  if (hits > n) throw DomainError("clopper_pearson: hits exceed trials");
  const double k = static_cast<double>(hits), nn = static_cast<double>(n);
  Interval ci;
  ci.low = hits == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<>(k, nn - k + 1.0), alpha / 2);
  ci.high = hits == n ? 1.0 : boost::math::quantile(boost::math::beta_distribution<>(k + 1.0, nn - k), 1.0 - alpha / 2);
  return ci;
}

/// P(Z >= z) for standard normal Z.
inline double normal_tail(double z) {
  return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<>(), z));
}

inline double normal_cdf(double z) { return boost::math::cdf(boost::math::normal_distribution<>(), z); }

/// P(N >= k) for N ~ Poisson(mean).
inline double poisson_tail(long k, double mean) {
  if (k <= 0) return 1.0;
  return boost::math::gamma_p(static_cast<double>(k), mean);
}

inline double binomial_sigma(double p, std::size_t n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n)); }

/// Weighted least squares fit y = intercept + slope * x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
};

inline std::optional<LineFit> weighted_line_fit(const std::vector<double>& x, const std::vector<double>& y,
                                                const std::vector<double>& w) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    sxx += w[i] * x[i] * x[i];
    sxy += w[i] * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  if (!(sw > 0.0) || std::abs(det) <= 1e-300) return std::nullopt;
  LineFit f;
  f.slope = (sw * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / sw;
  return f;
}

/// Empirical quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace ldplab::stats
