// Scalar special functions used by the samplers, oracles and estimators.
#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "sdelab/errors.hpp"

namespace sdelab {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Wichura's AS241 rational approximation, |error| < 1e-15 over (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must be in (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545703 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double v;
  if (r <= 5.0) {
    r -= 1.6;
    v = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
             1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
          4.6303378461565452959) * r + 1.42343711074968357734) /
        (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
             0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
          2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    v = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
             0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
          5.4637849111641143699) * r + 6.6579046435011037772) /
        (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
             7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
          0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -v : v;
}

// Regularized lower incomplete gamma P(a, x); series for x < a+1, else 1 - CF.
inline double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_p: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Lentz continued fraction for Q(a, x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

inline double gamma_q(double a, double x) { return 1.0 - gamma_p(a, x); }

// CDF of Gamma(shape, scale).
inline double gamma_cdf(double x, double shape, double scale = 1.0) {
  if (x <= 0.0) return 0.0;
  return gamma_p(shape, x / scale);
}

// Quantile of Gamma(shape, scale) by bisection on the CDF.
inline double gamma_quantile(double p, double shape, double scale = 1.0) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("gamma_quantile: p in (0,1)");
  double lo = 0.0, hi = std::max(1.0, shape * scale);
  while (gamma_cdf(hi, shape, scale) < p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (gamma_cdf(mid, shape, scale) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Chi-square CDF with real dof.
inline double chi_square_cdf(double x, double dof) { return gamma_cdf(x, 0.5 * dof, 2.0); }

// Noncentral chi-square CDF as a Poisson mixture of central chi-squares.
// Terms are walked outward from the Poisson mode so large ncp stays accurate.
inline double noncentral_chi_square_cdf(double x, double dof, double ncp) {
  if (x <= 0.0) return 0.0;
  if (ncp < 1e-14) return chi_square_cdf(x, dof);
  const double lambda = 0.5 * ncp;
  const auto log_pois = [&](long k) { return -lambda + k * std::log(lambda) - std::lgamma(double(k) + 1.0); };
  const long k0 = std::max<long>(0, long(std::floor(lambda)));
  double sum = 0.0;
  for (long k = k0; k >= 0; --k) {
    const double t = std::exp(log_pois(k)) * chi_square_cdf(x, dof + 2.0 * double(k));
    sum += t;
    if (t < 1e-18 * (sum + 1e-300) && k < k0 - 2) break;
  }
  for (long k = k0 + 1; k < k0 + 20000; ++k) {
    const double t = std::exp(log_pois(k)) * chi_square_cdf(x, dof + 2.0 * double(k));
    sum += t;
    if (t < 1e-18 * sum) break;
  }
  return std::min(1.0, sum);
}

// Volume of the unit ball in R^d.
inline double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

// Surface measure of the unit sphere S^{d-1}.
inline double unit_sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

}  // namespace sdelab
