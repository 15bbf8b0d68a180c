// Radial profile of the mollified inverse-square kernel K(u) = u/|u|^2.
//
// Convolving K with a radial kernel w gives a field of the form m(r) u/|u|,
// where m is computed by the spherical-mean reduction
//   m(r) = omega_{d-1} int_0^inf w(s) s^{d-1} M_d(r, s) ds,
//   M_d(r, s) = average over unit directions w of  (r - s w_1)/|r e_1 - s w|^2.
// For d = 3 the inner average is closed-form. The profile is tabulated once
// per (kernel, eps, d); lookups are a linear interpolation, cheap enough for
// the innermost simulation loop.
#pragma once

#include <cmath>
#include <vector>

#include "sdelab/fields.hpp"
#include "sdelab/quadrature.hpp"

namespace sdelab {

namespace detail {

// Spherical mean M_d(r, s); series branch guards the r ~ 0 cancellation.
inline double pair_sphere_mean(double r, double s, int d) {
  const double lo = std::min(r, s), hi = std::max(r, s);
  if (hi <= 0.0) return 0.0;
  const double rho = lo / hi;
  if (d == 3) {
    if (rho < 0.05) {
      // series in rho, see header comment
      const double rho2 = rho * rho;
      if (r <= s) return r / (3.0 * s * s) * (1.0 + 0.2 * rho2 * (1.0 + (3.0 / 7.0) * rho2));
      return (1.0 / r) * (1.0 - rho2 / 3.0 - rho2 * rho2 / 15.0);
    }
    if (std::abs(r - s) <= 1e-13 * hi) return 0.5 / r;  // (r^2-s^2) log|r-s| -> 0
    const double lg = std::log((r + s) / std::abs(r - s));
    return (0.5 / r) * (1.0 + ((r * r - s * s) / (2.0 * r * s)) * lg);
  }
  // general d: 1-d average with Gegenbauer weight (1-t^2)^{(d-3)/2}
  const double p = 0.5 * double(d - 3);
  const double norm = adaptive_simpson([p](double t) { return std::pow(1.0 - t * t, p); },
                                       -1.0, 1.0, 1e-12);
  const double val = adaptive_simpson(
      [&](double t) {
        const double q = r * r - 2.0 * r * s * t + s * s;
        if (q < 1e-280) return 0.0;
        return std::pow(1.0 - t * t, p) * (r - s * t) / q;
      },
      -1.0, 1.0, 1e-12);
  return val / norm;
}

}  // namespace detail

class MollifiedPairKernel {
 public:
  MollifiedPairKernel() = default;

  MollifiedPairKernel(MollifierKind kind, double eps, int d) : eps_(eps), d_(d), kind_(kind) {
    if (!(eps > 0.0)) throw ConfigInvalid("pair kernel: eps > 0 required");
    if (d < 3) throw ConfigInvalid("pair kernel: d >= 3 required");
    if (kind == MollifierKind::stream_truncation)
      throw ConfigInvalid("pair kernel: stream_truncation is not a convolution family");
    scale_ = kind == MollifierKind::heat ? std::sqrt(4.0 * eps) : eps;
    const double smax = kind == MollifierKind::heat ? 10.0 * std::sqrt(2.0 * eps) : eps;

    // radial weight w(s) * surface measure
    const double area = unit_sphere_area(d);
    auto weight = [&](double s) -> double {
      if (kind == MollifierKind::heat)
        return area * std::pow(4.0 * std::numbers::pi * eps, -0.5 * d) *
               std::exp(-s * s / (4.0 * eps)) * std::pow(s, d - 1);
      return area * std::pow(eps, -d) * detail::bump_profile(s / eps, d) * std::pow(s, d - 1);
    };

    r_lin_ = 8.0 * scale_;
    r_max_ = 1000.0 * scale_;
    lin_.resize(size_t(kNLin) + 1);
    geo_.resize(size_t(kNGeo) + 1);
    geo_ratio_ = std::log(r_max_ / r_lin_) / double(kNGeo);

    auto profile_at = [&](double r) -> double {
      if (r <= 0.0) return 0.0;
      auto f = [&](double s) { return weight(s) * detail::pair_sphere_mean(r, s, d_); };
      const double cut = std::min(r, smax);
      double v = adaptive_simpson(f, 0.0, cut, 1e-11, 36);
      if (cut < smax) v += adaptive_simpson(f, cut, smax, 1e-11, 36);
      return v;
    };

    for (int i = 0; i <= kNLin; ++i) {
      const double r = r_lin_ * double(i) / double(kNLin);
      lin_[size_t(i)] = profile_at(r);
    }
    for (int i = 0; i <= kNGeo; ++i) {
      const double r = r_lin_ * std::exp(geo_ratio_ * double(i));
      geo_[size_t(i)] = profile_at(r);
    }

    // linear slope of the profile at the origin, analytic per family
    if (kind == MollifierKind::heat) {
      g0_ = 1.0 / (2.0 * double(d) * eps);
    } else {
      const double j = unit_sphere_area(d) *
                       adaptive_simpson(
                           [d](double r) {
                             return std::pow(r, d - 3) * detail::bump_profile(r, d);
                           },
                           0.0, 1.0, 1e-12);
      g0_ = double(d - 2) / double(d) * j / (eps * eps);
    }

    glin_.resize(lin_.size());
    ggeo_.resize(geo_.size());
    for (size_t i = 0; i < lin_.size(); ++i) {
      const double r = r_lin_ * double(i) / double(kNLin);
      glin_[i] = i == 0 ? g0_ : lin_[i] / r;
    }
    for (size_t i = 0; i < geo_.size(); ++i) {
      const double r = r_lin_ * std::exp(geo_ratio_ * double(i));
      ggeo_[i] = geo_[i] / r;
    }
  }

  // |mollified K|(r); tail beyond the table is the unmollified 1/r.
  double magnitude(double r) const {
    if (r <= 0.0) return 0.0;
    if (r >= r_max_) return 1.0 / r;
    if (r < r_lin_) {
      const double t = r / r_lin_ * double(kNLin);
      const int i = int(t);
      const double w = t - double(i);
      return (1.0 - w) * lin_[size_t(i)] + w * lin_[size_t(i) + 1];
    }
    const double t = std::log(r / r_lin_) / geo_ratio_;
    const int i = std::min(kNGeo - 1, int(t));
    const double w = t - double(i);
    return (1.0 - w) * geo_[size_t(i)] + w * geo_[size_t(i) + 1];
  }

  // Coefficient g with mollified K(u) = g(|u|) u; finite at the origin.
  // Tabulated directly so the simulator's inner loop is one interpolation.
  double radial_coefficient(double r) const {
    if (r >= r_max_) return 1.0 / (r * r);
    if (r < r_lin_) {
      const double t = r / r_lin_ * double(kNLin);
      const int i = int(t);
      const double w = t - double(i);
      return (1.0 - w) * glin_[size_t(i)] + w * glin_[size_t(i) + 1];
    }
    const double t = std::log(r / r_lin_) / geo_ratio_;
    const int i = std::min(kNGeo - 1, int(t));
    const double w = t - double(i);
    return (1.0 - w) * ggeo_[size_t(i)] + w * ggeo_[size_t(i) + 1];
  }

  double g0() const { return g0_; }
  double scale() const { return scale_; }
  double eps() const { return eps_; }
  int dim() const { return d_; }
  MollifierKind kind() const { return kind_; }

 private:
  static constexpr int kNLin = 1600;
  static constexpr int kNGeo = 1200;
  double eps_ = 0.0;
  int d_ = 0;
  MollifierKind kind_ = MollifierKind::heat;
  double scale_ = 0.0;
  double g0_ = 0.0;
  double r_lin_ = 0.0;
  double r_max_ = 0.0;
  double geo_ratio_ = 0.0;
  std::vector<double> lin_;
  std::vector<double> geo_;
  std::vector<double> glin_;
  std::vector<double> ggeo_;
};

}  // namespace sdelab
