// Deterministic quadrature building blocks: Gauss-Hermite rules, adaptive
// Simpson, and a scrambled Halton sequence for quasi-Monte Carlo ball averages.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "sdelab/errors.hpp"
#include "sdelab/special.hpp"

namespace sdelab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Nodes/weights for \int f(x) e^{-x^2} dx (physicists' weight).
inline QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw QuadratureBudgetExceeded("gauss_hermite: need n >= 1");
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  double z = 0.0, pp = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(double(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * rule.nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * rule.nodes[1];
    else
      z = 2.0 * z - rule.nodes[i - 2];
    for (int it = 0; it < 64; ++it) {
      double p1 = 0.7511255444649425;  // pi^{-1/4}
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(double(j) / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * double(n)) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15) break;
    }
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = 2.0 / (pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  if (depth <= 0) return left + right;
  if (std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-10, int max_depth = 40) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = detail::simpson(f, a, b, fa, fm, fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Scrambled Halton sequence. The per-dimension digit permutation is a fixed
// multiplicative scramble derived from the seed, so streams are reproducible.
class Halton {
 public:
  Halton(int dim, uint64_t seed) : dim_(dim) {
    static constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                      41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};
    if (dim < 1 || dim > int(sizeof(kPrimes) / sizeof(int)))
      throw QuadratureBudgetExceeded("Halton: unsupported dimension");
    uint64_t s = seed * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull;
    for (int i = 0; i < dim; ++i) {
      bases_.push_back(kPrimes[i]);
      s = s * 6364136223846793005ull + 1442695040888963407ull;
      // multiplier coprime with the base
      uint64_t mult = 1 + (s >> 33) % uint64_t(kPrimes[i] - 1);
      mults_.push_back(uint32_t(mult));
    }
  }

  // Fills out[0..dim) with the point of index n (n >= 0); leaps index 0.
  void point(uint64_t n, double* out) const {
    for (int i = 0; i < dim_; ++i) {
      const uint64_t b = bases_[i];
      const uint64_t mult = mults_[i];
      double inv = 1.0 / double(b);
      double f = inv;
      double x = 0.0;
      uint64_t k = n + 1;  // skip the origin
      while (k > 0) {
        const uint64_t digit = (k % b) * mult % b;
        x += double(digit) * f;
        k /= b;
        f *= inv;
      }
      out[i] = x;
    }
  }

  int dim() const { return dim_; }

 private:
  int dim_;
  std::vector<uint64_t> bases_;
  std::vector<uint32_t> mults_;
};

// Maps a (d+1)-dimensional low-discrepancy point to a uniform point of the
// ball B_r(center) in R^d: Gaussian direction + beta-distributed radius.
inline void unit_to_ball(const double* u, int d, const double* center, double r, double* out) {
  double norm2 = 0.0;
  for (int i = 0; i < d; ++i) {
    out[i] = normal_quantile(u[i]);
    norm2 += out[i] * out[i];
  }
  const double norm = std::sqrt(norm2);
  const double radius = r * std::pow(u[d], 1.0 / double(d));
  const double scale = norm > 0.0 ? radius / norm : 0.0;
  for (int i = 0; i < d; ++i) out[i] = center[i] + out[i] * scale;
}

}  // namespace sdelab
