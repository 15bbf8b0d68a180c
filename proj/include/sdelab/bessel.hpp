// Squared Bessel machinery: the dispersion dimension mu, the sticky threshold
// in kappa, the regime classifier, exact transition and hitting-time samplers,
// and the Euler reference path.
#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "sdelab/errors.hpp"
#include "sdelab/rng.hpp"
#include "sdelab/special.hpp"

namespace sdelab {

struct BesselParams {
  double mu = 0.0;  // process dimension
  double x0 = 0.0;  // start value R_0 >= 0
};

enum class RegimeLabel { no_collision, non_sticky, sticky };

inline const char* regime_name(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::no_collision: return "no_collision";
    case RegimeLabel::non_sticky: return "non_sticky";
    case RegimeLabel::sticky: return "sticky";
  }
  return "?";
}

// mu = (N-1) (d - sqrt(kappa) (d-2)/4). Sign decisions elsewhere must route
// through this exact expression so classifier paths agree bit-for-bit.
inline double bessel_dimension(int N, int d, double kappa) {
  if (N < 2 || d < 3 || kappa < 0.0)
    throw ConfigInvalid("bessel_dimension: need N >= 2, d >= 3, kappa >= 0");
  return double(N - 1) * (double(d) - std::sqrt(kappa) * (double(d - 2) / 4.0));
}

// Smallest double kappa with mu(kappa) <= 0. Equals 16 (d/(d-2))^2 exactly when
// that value is representable (d = 3, 4); otherwise it is within 2 ulps. The
// ulp adjustment makes "kappa >= sticky_threshold(d)" and "mu <= 0" literally
// the same predicate for every double kappa.
inline double sticky_threshold(int d) {
  if (d < 3) throw ConfigInvalid("sticky_threshold: d >= 3 required");
  const auto sticky = [d](double kappa) { return bessel_dimension(2, d, kappa) <= 0.0; };
  const double t = 4.0 * double(d) / double(d - 2);
  double x = t * t;
  for (int i = 0; i < 64 && sticky(x); ++i)
    x = std::nextafter(x, 0.0);
  for (int i = 0; i < 64 && !sticky(x); ++i)
    x = std::nextafter(x, std::numeric_limits<double>::infinity());
  return x;
}

struct Regime {
  RegimeLabel label = RegimeLabel::no_collision;
  double mu = 0.0;
  double kappa_sticky = 0.0;          // sticky iff kappa >= this
  double kappa_bprime_lo = 0.0;       // reported (b') interval, lower endpoint
  double kappa_bprime_hi = 0.0;       // = sticky threshold
  double kappa_no_collision_hi = 0.0; // mu >= 2 iff kappa <= this (approx.)
};

// sticky iff mu <= 0, no_collision iff mu >= 2 (boundary inclusive),
// non-sticky in between. Also carries the interval quoted for cross-reporting;
// its lower endpoint deliberately differs from the mu < 2 criterion.
inline Regime classify_regime(int N, int d, double kappa) {
  Regime r;
  r.mu = bessel_dimension(N, d, kappa);
  r.kappa_sticky = sticky_threshold(d);
  const double t = 4.0 * double(d) / double(d - 2);
  r.kappa_bprime_hi = t * t;
  r.kappa_bprime_lo = t * t * (1.0 - 2.0 / (double(d) * double(N - 1)));
  {
    // kappa with mu = 2: sqrt(kappa) = (d - 2/(N-1)) * 4/(d-2)
    const double s = (double(d) - 2.0 / double(N - 1)) * 4.0 / double(d - 2);
    r.kappa_no_collision_hi = s * s;
  }
  if (r.mu <= 0.0)
    r.label = RegimeLabel::sticky;
  else if (r.mu >= 2.0)
    r.label = RegimeLabel::no_collision;
  else
    r.label = RegimeLabel::non_sticky;
  return r;
}

// Exact BESQ(mu) transition draw: R_t = t Y with Y noncentral chi-square,
// sampled as a Poisson(x0/2t) mixture of Gamma(mu/2 + K, 2).
template <typename Rng>
double sample_besq_transition(const BesselParams& p, double t, Rng& rng) {
  if (!(p.mu > 0.0))
    throw UnsupportedDimension("sample_besq_transition: mu <= 0, use besq_euler_path");
  if (!(t > 0.0) || p.x0 < 0.0) throw ConfigInvalid("sample_besq_transition: t > 0, x0 >= 0");
  const uint64_t k = p.x0 > 0.0 ? rng.poisson(p.x0 / (2.0 * t)) : 0;
  return t * rng.gamma(0.5 * p.mu + double(k), 2.0);
}

inline double besq_transition_cdf(const BesselParams& p, double t, double x) {
  if (!(p.mu > 0.0)) throw UnsupportedDimension("besq_transition_cdf: mu <= 0 unsupported");
  if (x <= 0.0) return 0.0;
  return noncentral_chi_square_cdf(x / t, p.mu, p.x0 / t);
}

// First hitting time of zero for 0 < mu < 2: T0 = x0 / (2 G), G ~ Gamma(1-mu/2).
template <typename Rng>
double sample_hitting_time(const BesselParams& p, Rng& rng) {
  if (!(p.mu > 0.0 && p.mu < 2.0))
    throw UnsupportedDimension("sample_hitting_time: requires 0 < mu < 2");
  if (!(p.x0 > 0.0)) throw ConfigInvalid("sample_hitting_time: x0 > 0 required");
  return p.x0 / (2.0 * rng.gamma(1.0 - 0.5 * p.mu, 1.0));
}

inline double hitting_time_cdf(const BesselParams& p, double t) {
  if (!(p.mu < 2.0)) throw UnsupportedDimension("hitting_time_cdf: requires mu < 2");
  if (!(p.x0 > 0.0)) throw ConfigInvalid("hitting_time_cdf: x0 > 0 required");
  if (t <= 0.0) return 0.0;
  // P(T0 <= t) = P(G >= x0/(2t)); also valid for mu <= 0 (absorbed dimension).
  return gamma_q(1.0 - 0.5 * p.mu, p.x0 / (2.0 * t));
}

struct EulerPathResult {
  double terminal = 0.0;
  bool hit_zero = false;
  double first_zero_time = std::numeric_limits<double>::infinity();
  bool absorbed = false;
};

// Euler-Maruyama on dR = 2 sqrt(R+) dW + mu dt; clamped at zero; when mu <= 0
// the zero state is absorbing.
template <typename Rng>
EulerPathResult besq_euler_path(const BesselParams& p, double h, double T, Rng& rng) {
  if (!(h > 0.0) || !(T >= h)) throw ConfigInvalid("besq_euler_path: need h > 0, T >= h");
  EulerPathResult res;
  double r = p.x0;
  const long steps = std::lround(T / h);
  const double sq = std::sqrt(h);
  for (long k = 0; k < steps; ++k) {
    r += 2.0 * std::sqrt(std::max(r, 0.0)) * sq * rng.normal() + p.mu * h;
    if (r <= 0.0) {
      if (!res.hit_zero) {
        res.hit_zero = true;
        res.first_zero_time = double(k + 1) * h;
      }
      r = 0.0;
      if (p.mu <= 0.0) {
        res.absorbed = true;
        break;
      }
    }
  }
  res.terminal = r;
  return res;
}

}  // namespace sdelab
