// Numerical estimators for drift-size functionals: Morrey and
// Chang-Wilson-Wolff ball maxima, form-bound arithmetic, the critical Lp
// exponent, and a Rayleigh-quotient lower estimator for form-bounds.
#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "sdelab/errors.hpp"
#include "sdelab/fields.hpp"
#include "sdelab/quadrature.hpp"
#include "sdelab/special.hpp"
#include "sdelab/threads.hpp"

namespace sdelab {

// Discretization of "sup over all balls": a finite set of centers and a dyadic
// ladder of radii; every ball average is a fixed-seed quasi-Monte Carlo sum.
struct BallGrid {
  std::vector<Vec> centers;
  double r_min = 0.25;
  int levels = 9;          // radii r_min * 2^k, k = 0..levels-1
  long mc_nodes = 100000;  // >= 1e3
  uint64_t seed = 7;
  // Radial importance tilt: sample |y - center| with density ~ z^{d-1-tilt}
  // and weight z^{tilt} back. Centered inverse-square integrands lose their
  // radial singularity this way; tilt must stay below the dimension.
  double radial_tilt = 2.0;

  void validate(int dim) const {
    if (centers.empty()) throw ConfigInvalid("ball grid: need at least one center");
    for (const auto& c : centers)
      if (int(c.size()) != dim) throw ConfigInvalid("ball grid: center dimension mismatch");
    if (!(r_min > 0.0) || levels < 1) throw ConfigInvalid("ball grid: bad radii");
    if (mc_nodes < 1000) throw ConfigInvalid("ball grid: mc_nodes >= 1000 required");
    if (!(radial_tilt >= 0.0) || radial_tilt >= double(dim) - 0.5)
      throw ConfigInvalid("ball grid: radial tilt must lie in [0, dim - 0.5)");
  }
};

struct BallMaxResult {
  double value = 0.0;
  double rejection_fraction = 0.0;  // singular sample points that were resampled
  Vec argmax_center;
  double argmax_radius = 0.0;
};

namespace detail {

// Max over the grid of per-ball averages of `integrand(|b|(y), r)`, then
// `finish(avg, r)`. Per-ball point streams are seeded by the ball index alone,
// so the reported value is independent of evaluation order.
template <typename Integrand, typename Finish>
BallMaxResult ball_grid_max(const VectorField& field, const BallGrid& grid,
                            Integrand&& integrand, Finish&& finish) {
  grid.validate(field.ambient_dim);
  const int dim = field.ambient_dim;
  const double tilt = grid.radial_tilt;
  const double dm = double(dim);
  const long n_balls = long(grid.centers.size()) * grid.levels;
  std::vector<double> values(size_t(n_balls), 0.0);
  std::vector<long> rejected(size_t(n_balls), 0), totals(size_t(n_balls), 0);
  std::atomic<bool> budget_blown{false};

  // one ball per work item; per-ball streams are keyed by (center, level) so
  // refining the grid keeps old balls bit-identical and the max can only grow
  parallel_for(n_balls, default_worker_count(), [&](long ball) {
    const size_t ci = size_t(ball) / size_t(grid.levels);
    const int k = int(size_t(ball) % size_t(grid.levels));
    const auto& center = grid.centers[ci];
    const double r = grid.r_min * std::pow(2.0, k);
    Halton seq(dim + 1, grid.seed * 1315423911ull + ci * 100003ull + uint64_t(k));
    Vec point(size_t(dim), 0.0), val(size_t(dim), 0.0);
    std::vector<double> u(size_t(dim) + 1, 0.0);
    double acc = 0.0;
    long used = 0;
    uint64_t n = 0;
    while (used < grid.mc_nodes) {
      seq.point(n++, u.data());
      // direction from the Gaussian map, tilted radius fraction z in (0,1]
      double dn2 = 0.0;
      for (int c = 0; c < dim; ++c) {
        point[size_t(c)] = normal_quantile(u[size_t(c)]);
        dn2 += point[size_t(c)] * point[size_t(c)];
      }
      const double z = std::pow(u[size_t(dim)], 1.0 / (dm - tilt));
      const double scl = dn2 > 0.0 ? r * z / std::sqrt(dn2) : 0.0;
      for (int c = 0; c < dim; ++c) point[size_t(c)] = center[size_t(c)] + point[size_t(c)] * scl;
      ++totals[size_t(ball)];
      if (field.is_singular(point)) {
        ++rejected[size_t(ball)];
        if (n > 16 * uint64_t(grid.mc_nodes)) {
          budget_blown = true;
          return;
        }
        continue;
      }
      field.eval(point, val);
      const double weight = dm / (dm - tilt) * std::pow(z, tilt);
      acc += weight * integrand(std::sqrt(norm2(val)), r);
      ++used;
    }
    values[size_t(ball)] = finish(acc / double(used), r);
  });
  if (budget_blown) throw QuadratureBudgetExceeded("ball average: too many singular rejections");

  BallMaxResult res;
  long rej = 0, total = 0;
  for (long ball = 0; ball < n_balls; ++ball) {
    rej += rejected[size_t(ball)];
    total += totals[size_t(ball)];
    if (values[size_t(ball)] > res.value) {
      res.value = values[size_t(ball)];
      res.argmax_center = grid.centers[size_t(ball) / size_t(grid.levels)];
      res.argmax_radius = grid.r_min * std::pow(2.0, int(size_t(ball) % size_t(grid.levels)));
    }
  }
  res.rejection_fraction = total > 0 ? double(rej) / double(total) : 0.0;
  return res;
}

}  // namespace detail

// r * (average of |b|^p over B_r(x))^{1/p}, maximized over the grid.
// A lower estimate of the Morrey-p seminorm.
inline BallMaxResult morrey_functional(const VectorField& field, double p, const BallGrid& grid) {
  if (!(p >= 1.0)) throw ConfigInvalid("morrey_functional: p >= 1 required");
  return detail::ball_grid_max(
      field, grid, [p](double b, double) { return std::pow(b, p); },
      [p](double avg, double r) { return r * std::pow(avg, 1.0 / p); });
}

// Ball average of |b|^2 r^2 (1 + (log+ |b|^2 r^2)^{1+alpha}), maximized.
inline BallMaxResult cww_functional(const VectorField& field, double alpha,
                                    const BallGrid& grid) {
  if (!(alpha > 0.0)) throw ConfigInvalid("cww_functional: alpha > 0 required");
  return detail::ball_grid_max(
      field, grid,
      [alpha](double b, double r) {
        const double s = b * b * r * r;
        const double lg = s > 1.0 ? std::log(s) : 0.0;
        return s * (1.0 + std::pow(lg, 1.0 + alpha));
      },
      [](double avg, double) { return avg; });
}

// Form-bound of the N-particle kernel built from a kernel with form-bound kappa.
inline double formbound_from_kappa(int N, double kappa) {
  if (N < 2) throw ConfigInvalid("formbound_from_kappa: N >= 2 required");
  const double f = double(N - 1) / double(N);
  return f * f * kappa;
}

// Form-bound delta from the weak-L^d quasinorm.
inline double weakLd_formbound(double norm_d_inf, int d) {
  if (d < 3) throw ConfigInvalid("weakLd_formbound: d >= 3 required");
  if (norm_d_inf < 0.0) throw ConfigInvalid("weakLd_formbound: norm >= 0 required");
  return norm_d_inf * std::pow(unit_ball_volume(d), -1.0 / double(d)) * 2.0 / double(d - 2);
}

// Smallest exponent with a positive dispersion term: p* = 2/(2 - sqrt(delta)).
inline double critical_p(double delta) {
  if (!(delta >= 0.0)) throw ConfigInvalid("critical_p: delta >= 0 required");
  if (delta >= 4.0)
    throw DeltaAtOrAboveCritical("critical_p: delta >= 4 leaves no finite exponent");
  return 2.0 / (2.0 - std::sqrt(delta));
}

struct RayleighOptions {
  double s_min = 0.02, s_max = 1.2;   // exponent shift of the radial profile
  double logR_min = 0.0, logR_max = 5.0;  // window radius, log scale
  int sweeps = 3;
  int directions = 64;   // sphere sample for anisotropic fields
  long max_evals = 400000;
};

namespace detail {

// Golden-section maximizer (unimodal assumption, few sweeps are enough here).
template <typename F>
double golden_max(F&& f, double lo, double hi, int iters = 24) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

struct RayleighResult {
  double delta_hat = 0.0;
  double best_s = 0.0;
  double best_R = 0.0;
};

// Lower estimate of the sharp form-bound via radial trial functions
// phi(x) = |x|^{-(d-2)/2 + s} exp(-(|x|/R)^2 / 2): maximizes
// <|b|^2 phi^2> / <|grad phi|^2> over (s, R) by nested golden section.
inline RayleighResult rayleigh_formbound(const VectorField& field,
                                         const RayleighOptions& opt = {}) {
  const int d = field.ambient_dim;
  if (d < 3) throw ConfigInvalid("rayleigh_formbound: ambient dimension >= 3 required");

  // fixed direction set for the sphere average of |b|^2
  std::vector<Vec> dirs;
  {
    Halton seq(d, 12345);
    std::vector<double> u(size_t(d), 0.0);
    while (int(dirs.size()) < opt.directions) {
      seq.point(dirs.size() + 1, u.data());
      Vec v(size_t(d), 0.0);
      double n2 = 0.0;
      for (int k = 0; k < d; ++k) {
        v[size_t(k)] = normal_quantile(u[size_t(k)]);
        n2 += v[size_t(k)] * v[size_t(k)];
      }
      if (n2 < 1e-12) continue;
      for (auto& c : v) c /= std::sqrt(n2);
      dirs.push_back(std::move(v));
    }
  }

  // sphere-averaged |b|^2 tabulated once on a log-radius grid
  const double u_lo = opt.logR_min - 16.0, u_hi = opt.logR_max + 3.0;
  const int u_n = 600;
  std::vector<double> b2_table(size_t(u_n) + 1, 0.0);
  {
    long evals = 0;
    Vec point(size_t(d), 0.0), val(size_t(d), 0.0);
    for (int i = 0; i <= u_n; ++i) {
      const double r = std::exp(u_lo + (u_hi - u_lo) * double(i) / double(u_n));
      double acc = 0.0;
      long used = 0;
      for (const auto& dir : dirs) {
        for (int k = 0; k < d; ++k) point[size_t(k)] = r * dir[size_t(k)];
        if (field.is_singular(point)) continue;
        if (++evals > opt.max_evals)
          throw QuadratureBudgetExceeded("rayleigh_formbound: evaluation budget exhausted");
        field.eval(point, val);
        acc += norm2(val);
        ++used;
      }
      b2_table[size_t(i)] = used > 0 ? acc / double(used) : 0.0;
    }
  }
  auto mean_b2 = [&](double r) {
    const double u = std::log(std::max(r, 1e-300));
    const double t = (u - u_lo) / (u_hi - u_lo) * double(u_n);
    if (t <= 0.0) return b2_table.front() * std::exp(-2.0 * (u - u_lo));  // inverse-square tail
    if (t >= double(u_n)) return b2_table.back();
    const int i = int(t);
    const double w = t - double(i);
    return (1.0 - w) * b2_table[size_t(i)] + w * b2_table[size_t(i) + 1];
  };

  const double alpha = -0.5 * double(d - 2);
  auto quotient = [&](double s, double R) {
    // radial integrals in u = log r; r^{d-1} phi^2 dr = r^{2(alpha+s)+d} w du.
    // The integrand mass sits at exponentially small radii as s -> 0, so the
    // window scales like 1/s; below the tabulated range |b|^2 continues with
    // its inverse-square asymptote.
    const double lo = std::log(R) - std::max(16.0, 6.0 / std::max(s, 0.01));
    const double hi = std::log(R) + 3.0;
    auto phi2 = [&](double r) {
      return std::pow(r, 2.0 * (alpha + s) + double(d)) * std::exp(-(r / R) * (r / R));
    };
    const double num = adaptive_simpson(
        [&](double u) {
          const double r = std::exp(u);
          return phi2(r) * mean_b2(r);
        },
        lo, hi, 1e-10, 30);
    const double den = adaptive_simpson(
        [&](double u) {
          const double r = std::exp(u);
          const double dphi_over_phi = (alpha + s) / r - r / (R * R);
          return phi2(r) * dphi_over_phi * dphi_over_phi;
        },
        lo, hi, 1e-10, 30);
    return den > 0.0 ? num / den : 0.0;
  };

  RayleighResult res;
  double s_best = 0.5 * (opt.s_min + opt.s_max);
  double logR_best = 0.5 * (opt.logR_min + opt.logR_max);
  for (int sweep = 0; sweep < opt.sweeps; ++sweep) {
    s_best = detail::golden_max([&](double s) { return quotient(s, std::exp(logR_best)); },
                                opt.s_min, opt.s_max, 16);
    logR_best = detail::golden_max([&](double lR) { return quotient(s_best, std::exp(lR)); },
                                   opt.logR_min, opt.logR_max, 16);
  }
  res.best_s = s_best;
  res.best_R = std::exp(logR_best);
  res.delta_hat = quotient(s_best, res.best_R);
  return res;
}

}  // namespace sdelab
