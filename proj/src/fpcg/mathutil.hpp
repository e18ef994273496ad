#ifndef FPCG_MATHUTIL_HPP
#define FPCG_MATHUTIL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "common.hpp"

namespace fpcg {

inline double mean(std::span<const double> v) {
  if (v.empty()) fail(ErrorCode::invalid_argument, "mean of empty sequence");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// population standard deviation (divide by n)
inline double stddev_pop(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

inline double median(std::vector<double> v) {
  if (v.empty()) fail(ErrorCode::invalid_argument, "median of empty sequence");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// linear-interpolation quantile on the sorted data, position p*(n-1)
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) fail(ErrorCode::invalid_argument, "quantile of empty sequence");
  if (sorted.size() == 1) return sorted[0];
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, p);
}

inline double rms(std::span<const double> v) {
  if (v.empty()) fail(ErrorCode::invalid_argument, "rms of empty sequence");
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

inline double mean_power(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// centered moving average, window length w samples (w >= 1), edges shrink
inline std::vector<double> moving_average(std::span<const double> x, std::size_t w) {
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  if (n == 0 || w == 0) return out;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  const std::ptrdiff_t half_lo = static_cast<std::ptrdiff_t>((w - 1) / 2);
  const std::ptrdiff_t half_hi = static_cast<std::ptrdiff_t>(w / 2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::ptrdiff_t a = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(i) - half_lo);
    const std::ptrdiff_t b =
        std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, static_cast<std::ptrdiff_t>(i) + half_hi);
    out[i] = (prefix[b + 1] - prefix[a]) / static_cast<double>(b - a + 1);
  }
  return out;
}

} // namespace fpcg

#endif
