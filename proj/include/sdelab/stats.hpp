// Sample statistics: running moments, KS distances, Wilson intervals,
// least-squares slopes, and the projected energy distance used by the
// two-ensemble comparison.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace sdelab {

struct RunningMoments {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / double(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
  double stderr_mean() const { return n > 1 ? std::sqrt(variance() / double(n)) : 0.0; }
};

// One-sample KS statistic against a CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = double(sample.size());
  double d = 0.0;
  for (size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(double(i + 1) / n - f));
    d = std::max(d, std::abs(f - double(i) / n));
  }
  return d;
}

// Two-sample KS statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = 0.0;
  const double na = double(a.size()), nb = double(b.size());
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(double(i) / na - double(j) / nb));
  }
  return d;
}

// Sub-CDF KS on [0, t_max] for censored first-passage samples: values > t_max
// (or infinities) count as "not yet hit" mass on both sides.
inline double ks_censored(std::vector<double> a, std::vector<double> b, double t_max) {
  const double na = double(a.size()), nb = double(b.size());
  std::erase_if(a, [&](double x) { return !(x <= t_max); });
  std::erase_if(b, [&](double x) { return !(x <= t_max); });
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = std::abs(double(a.size()) / na - double(b.size()) / nb);
  while (i < a.size() || j < b.size()) {
    const double xa = i < a.size() ? a[i] : t_max + 1.0;
    const double xb = j < b.size() ? b[j] : t_max + 1.0;
    if (xa <= xb)
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(double(i) / na - double(j) / nb));
  }
  return d;
}

struct WilsonInterval {
  double center = 0.0;
  double halfwidth = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for a binomial proportion (z = 1.96 by default).
inline WilsonInterval wilson_interval(long successes, long trials, double z = 1.96) {
  WilsonInterval w;
  if (trials <= 0) return w;
  const double n = double(trials);
  const double p = double(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  w.center = (p + z2 / (2.0 * n)) / denom;
  w.halfwidth = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  w.lo = std::max(0.0, w.center - w.halfwidth);
  w.hi = std::min(1.0, w.center + w.halfwidth);
  return w;
}

// Least-squares slope of y against x through the origin.
inline double ls_slope_through_origin(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("ls_slope: size mismatch");
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  return sxy / sxx;
}

// Exact 1-d energy distance 2 E|a-b| - E|a-a'| - E|b-b'| via sorted prefix sums.
namespace detail {
inline double mean_abs_within(const std::vector<double>& s) {
  // s must be sorted;  (1/n^2) sum_{i,j} |s_i - s_j|
  const size_t n = s.size();
  if (n < 2) return 0.0;
  double acc = 0.0, prefix = 0.0;
  for (size_t i = 0; i < n; ++i) {
    acc += double(i) * s[i] - prefix;
    prefix += s[i];
  }
  return 2.0 * acc / (double(n) * double(n));
}

}  // namespace detail

inline double energy_distance_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("energy_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // suffix-sum free variant of mean_abs_between
  const size_t n = a.size(), m = b.size();
  double cross = 0.0;
  {
    size_t j = 0;
    double prefix = 0.0;
    const double total_b = std::accumulate(b.begin(), b.end(), 0.0);
    for (const double x : a) {
      while (j < b.size() && b[j] <= x) prefix += b[j++];
      cross += x * double(j) - prefix + (total_b - prefix) - x * double(m - j);
    }
    cross /= double(n) * double(m);
  }
  return 2.0 * cross - detail::mean_abs_within(a) - detail::mean_abs_within(b);
}

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty");
  const double idx = q * double(sorted.size() - 1);
  const size_t lo = size_t(std::floor(idx));
  const size_t hi = std::min(sorted.size() - 1, lo + 1);
  const double w = idx - double(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

}  // namespace sdelab
