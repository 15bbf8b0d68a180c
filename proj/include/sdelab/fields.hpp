// Drift field catalog: the inverse-square attracting kernels, the rotational
// BMO^{-1} example, stream matrices, and the two regularization families
// (Gaussian heat kernel and compact bump), plus clip-and-smooth for streams.
#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdelab/errors.hpp"
#include "sdelab/quadrature.hpp"
#include "sdelab/special.hpp"

namespace sdelab {

using Vec = std::vector<double>;

inline double norm2(std::span<const double> x) {
  double s = 0.0;
  for (const double v : x) s += v * v;
  return s;
}

constexpr double kSingularTol = 1e-12;  // below this a point counts as singular

enum class FieldKind { hardy, particle_kernel, rotational, constant, custom };

struct FormBound {
  double delta = 0.0;
  double c_delta = 0.0;
};

// An evaluable drift on R^n. Immutable after construction; eval() is pure.
class VectorField {
 public:
  int ambient_dim = 0;
  FieldKind kind = FieldKind::custom;
  // kind-specific parameters
  double delta = 0.0;   // hardy strength
  double kappa = 0.0;   // particle attraction strength
  int d = 0;            // single-particle dimension (particle_kernel)
  int N = 0;            // particle count (particle_kernel)
  std::vector<double> e;       // N*N modulation table, |e_ij| <= 1
  Vec constant_value;          // constant kind
  std::function<void(std::span<const double>, std::span<double>)> custom_eval;
  std::function<bool(std::span<const double>)> custom_singular;
  std::string custom_name;
  std::optional<FormBound> declared_formbound;

  double e_at(int i, int j) const { return e.empty() ? 1.0 : e[size_t(i) * N + j]; }

  bool is_singular(std::span<const double> x) const {
    switch (kind) {
      case FieldKind::hardy:
        return norm2(x) < kSingularTol * kSingularTol;
      case FieldKind::rotational:
        return x[0] * x[0] + x[1] * x[1] < kSingularTol * kSingularTol;
      case FieldKind::particle_kernel: {
        for (int i = 0; i < N; ++i)
          for (int j = i + 1; j < N; ++j) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) {
              const double diff = x[size_t(i) * d + k] - x[size_t(j) * d + k];
              s += diff * diff;
            }
            if (s < kSingularTol * kSingularTol) return true;
          }
        return false;
      }
      case FieldKind::constant:
        return false;
      case FieldKind::custom:
        return custom_singular ? custom_singular(x) : false;
    }
    return false;
  }

  void eval(std::span<const double> x, std::span<double> out) const {
    if (int(x.size()) != ambient_dim || int(out.size()) != ambient_dim)
      throw DimensionMismatch("eval_field: point has dimension " + std::to_string(x.size()) +
                              ", field lives on R^" + std::to_string(ambient_dim));
    if (is_singular(x)) throw SingularPoint("eval_field: point on the singular set");
    switch (kind) {
      case FieldKind::hardy: {
        const double c = std::sqrt(delta) * 0.5 * double(ambient_dim - 2) / norm2(x);
        for (int i = 0; i < ambient_dim; ++i) out[i] = c * x[i];
        return;
      }
      case FieldKind::rotational: {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        std::fill(out.begin(), out.end(), 0.0);
        out[0] = x[1] / r2;
        out[1] = -x[0] / r2;
        return;
      }
      case FieldKind::particle_kernel: {
        const double coeff = std::sqrt(kappa) * 0.5 * double(d - 2) / double(N);
        std::fill(out.begin(), out.end(), 0.0);
        for (int i = 0; i < N; ++i)
          for (int j = 0; j < N; ++j) {
            if (j == i) continue;
            double s = 0.0;
            for (int k = 0; k < d; ++k) {
              const double diff = x[size_t(i) * d + k] - x[size_t(j) * d + k];
              s += diff * diff;
            }
            const double w = coeff * e_at(i, j) / s;
            for (int k = 0; k < d; ++k)
              out[size_t(i) * d + k] += w * (x[size_t(i) * d + k] - x[size_t(j) * d + k]);
          }
        return;
      }
      case FieldKind::constant:
        std::copy(constant_value.begin(), constant_value.end(), out.begin());
        return;
      case FieldKind::custom:
        custom_eval(x, out);
        return;
    }
  }

  Vec eval(std::span<const double> x) const {
    Vec out(ambient_dim, 0.0);
    eval(x, out);
    return out;
  }
};

inline VectorField hardy_field(double delta, int d) {
  if (d < 3) throw ConfigInvalid("hardy_field: d >= 3 required");
  VectorField f;
  f.ambient_dim = d;
  f.kind = FieldKind::hardy;
  f.delta = delta;
  f.declared_formbound = FormBound{delta, 0.0};
  return f;
}

inline VectorField particle_kernel_field(int N, int d, double kappa,
                                         std::vector<double> e = {}) {
  if (N < 2) throw ConfigInvalid("particle_kernel_field: N >= 2 required");
  if (d < 3) throw ConfigInvalid("particle_kernel_field: d >= 3 required");
  if (kappa < 0.0) throw ConfigInvalid("particle_kernel_field: kappa >= 0 required");
  if (!e.empty() && int(e.size()) != N * N)
    throw ConfigInvalid("particle_kernel_field: e table must be N*N");
  for (const double v : e)
    if (!(std::abs(v) <= 1.0)) throw ConfigInvalid("particle_kernel_field: |e_ij| <= 1 required");
  VectorField f;
  f.ambient_dim = N * d;
  f.kind = FieldKind::particle_kernel;
  f.kappa = kappa;
  f.d = d;
  f.N = N;
  f.e = std::move(e);
  const double nm1 = double(N - 1) / double(N);
  f.declared_formbound = FormBound{nm1 * nm1 * kappa, 0.0};
  return f;
}

inline VectorField rotational_field(int d) {
  if (d < 2) throw ConfigInvalid("rotational_field: d >= 2 required");
  VectorField f;
  f.ambient_dim = d;
  f.kind = FieldKind::rotational;
  return f;
}

inline VectorField constant_field(Vec value) {
  VectorField f;
  f.ambient_dim = int(value.size());
  f.kind = FieldKind::constant;
  f.constant_value = std::move(value);
  return f;
}

// Scalar profile |x^1|^{-1} on R^{N*d0} packaged as a one-component field so the
// norm estimators can integrate |b|^p over product balls.
inline VectorField inv_first_block_field(int N, int d0) {
  VectorField f;
  f.ambient_dim = N * d0;
  f.kind = FieldKind::custom;
  f.custom_name = "inv_first_block";
  f.custom_singular = [d0](std::span<const double> x) {
    double s = 0.0;
    for (int k = 0; k < d0; ++k) s += x[k] * x[k];
    return s < kSingularTol * kSingularTol;
  };
  f.custom_eval = [d0](std::span<const double> x, std::span<double> out) {
    double s = 0.0;
    for (int k = 0; k < d0; ++k) s += x[k] * x[k];
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0 / std::sqrt(s);
  };
  return f;
}

// ---------------------------------------------------------------------------
// Mollification

enum class MollifierKind { heat, bump, stream_truncation };

struct MollifierFamily {
  MollifierKind kind = MollifierKind::heat;
  std::vector<double> schedule;  // strictly decreasing toward 0
  int nodes_per_axis = 16;       // tensor quadrature resolution
  long node_budget = 40'000'000; // hard cap on total tensor nodes

  double epsilon(int index) const {
    if (index < 0 || index >= int(schedule.size()))
      throw ConfigInvalid("mollifier index outside schedule");
    return schedule[size_t(index)];
  }
};

inline MollifierFamily make_mollifier(MollifierKind kind, std::vector<double> schedule,
                                      int nodes_per_axis = 16) {
  for (size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i] < schedule[i - 1]))
      throw ConfigInvalid("mollifier schedule must be strictly decreasing");
  for (const double e : schedule)
    if (!(e > 0.0)) throw ConfigInvalid("mollifier schedule entries must be positive");
  MollifierFamily fam;
  fam.kind = kind;
  fam.schedule = std::move(schedule);
  fam.nodes_per_axis = nodes_per_axis;
  return fam;
}

namespace detail {

// Normalization of the compact bump: gamma(z) = c * exp(1/(|z|^2-1)) on |z|<1.
inline double bump_normalization(int d) {
  const double radial = adaptive_simpson(
      [d](double r) {
        return std::pow(r, d - 1) * std::exp(1.0 / (r * r - 1.0));
      },
      0.0, 1.0 - 1e-12, 1e-13);
  return 1.0 / (unit_sphere_area(d) * radial);
}

inline double bump_profile(double r, int d) {
  if (r >= 1.0) return 0.0;
  static thread_local int cached_d = -1;
  static thread_local double cached_c = 0.0;
  if (cached_d != d) {
    cached_c = bump_normalization(d);
    cached_d = d;
  }
  return cached_c * std::exp(1.0 / (r * r - 1.0));
}

// Odometer over tensor-product indices.
inline bool next_index(std::vector<int>& idx, int base) {
  for (size_t k = 0; k < idx.size(); ++k) {
    if (++idx[k] < base) return true;
    idx[k] = 0;
  }
  return false;
}

}  // namespace detail

// Convolution of `field` with the family kernel at scale schedule[index],
// evaluated at x by deterministic tensor quadrature. Nodes that land on the
// singular set are skipped (a measure-zero correction).
inline Vec mollify(const MollifierFamily& family, const VectorField& field, int index,
                   std::span<const double> x) {
  if (int(x.size()) != field.ambient_dim)
    throw DimensionMismatch("mollify: point/field dimension mismatch");
  if (family.kind == MollifierKind::stream_truncation)
    throw ConfigInvalid("mollify: stream_truncation applies to stream matrices, use truncate_stream");
  const double eps = family.epsilon(index);
  const int dim = field.ambient_dim;
  const int n = family.nodes_per_axis;
  double total_nodes = 1.0;
  for (int k = 0; k < dim; ++k) {
    total_nodes *= n;
    if (total_nodes > double(family.node_budget))
      throw QuadratureBudgetExceeded("mollify: " + std::to_string(n) + "^" + std::to_string(dim) +
                                     " tensor nodes exceed the budget");
  }

  Vec acc(dim, 0.0);
  Vec point(dim, 0.0);
  Vec val(dim, 0.0);

  if (family.kind == MollifierKind::heat) {
    // y = sqrt(4 eps) z turns the Gaussian into the Gauss-Hermite weight.
    const QuadratureRule rule = gauss_hermite(n);
    const double scale = std::sqrt(4.0 * eps);
    std::vector<int> idx(dim, 0);
    const double wnorm = std::pow(std::numbers::pi, -0.5 * dim);
    do {
      double w = wnorm;
      for (int k = 0; k < dim; ++k) {
        w *= rule.weights[idx[k]];
        point[k] = x[k] - scale * rule.nodes[idx[k]];
      }
      if (field.is_singular(point)) continue;
      field.eval(point, val);
      for (int k = 0; k < dim; ++k) acc[k] += w * val[k];
    } while (detail::next_index(idx, n));
    return acc;
  }

  // bump: midpoint rule on the support cube, kernel vanishing outside |y| < eps.
  // Discrete weights are renormalized to unit mass so constants are preserved
  // exactly, the discrete analogue of adjusting the bump constant.
  const double cell = 2.0 * eps / double(n);
  const double cell_vol = std::pow(cell, dim);
  std::vector<int> idx(dim, 0);
  double mass = 0.0;
  do {
    double r2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double y = -eps + (double(idx[k]) + 0.5) * cell;
      r2 += y * y;
    }
    if (r2 >= eps * eps) continue;
    mass += detail::bump_profile(std::sqrt(r2) / eps, dim) * cell_vol / std::pow(eps, dim);
  } while (detail::next_index(idx, n));
  if (mass <= 0.0) throw QuadratureBudgetExceeded("mollify: bump grid too coarse");

  idx.assign(dim, 0);
  do {
    double r2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double y = -eps + (double(idx[k]) + 0.5) * cell;
      point[k] = y;
      r2 += y * y;
    }
    if (r2 >= eps * eps) continue;
    const double w = detail::bump_profile(std::sqrt(r2) / eps, dim) * cell_vol /
                     (std::pow(eps, dim) * mass);
    for (int k = 0; k < dim; ++k) point[k] = x[k] - point[k];
    if (field.is_singular(point)) continue;
    field.eval(point, val);
    for (int k = 0; k < dim; ++k) acc[k] += w * val[k];
  } while (detail::next_index(idx, n));
  return acc;
}

// Central-difference divergence estimate of a vector field at x.
inline double numeric_divergence(const VectorField& field, std::span<const double> x,
                                 double h_fd) {
  if (field.is_singular(x))
    throw SingularPoint("numeric_divergence: center point on the singular set");
  const int dim = field.ambient_dim;
  Vec xp(x.begin(), x.end()), xm(x.begin(), x.end());
  Vec vp(dim), vm(dim);
  double div = 0.0;
  for (int i = 0; i < dim; ++i) {
    xp[i] = x[i] + h_fd;
    xm[i] = x[i] - h_fd;
    field.eval(xp, vp);
    field.eval(xm, vm);
    div += (vp[i] - vm[i]) / (2.0 * h_fd);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return div;
}

template <typename F>
double numeric_divergence_of(F&& components, int dim, std::span<const double> x, double h_fd) {
  // components(i, point) -> i-th component value
  Vec xp(x.begin(), x.end()), xm(x.begin(), x.end());
  double div = 0.0;
  for (int i = 0; i < dim; ++i) {
    xp[i] = x[i] + h_fd;
    xm[i] = x[i] - h_fd;
    div += (components(i, std::span<const double>(xp)) -
            components(i, std::span<const double>(xm))) /
           (2.0 * h_fd);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return div;
}

// ---------------------------------------------------------------------------
// Stream matrices (antisymmetric Q with row-divergence drift)

class StreamMatrix {
 public:
  int ambient_dim = 0;
  // entry(i, j, x); builders must supply an antisymmetric function
  std::function<double(int, int, std::span<const double>)> entry;
  std::optional<double> bmo_seminorm_hint;

  double row_divergence_component(int i, std::span<const double> x, double h_fd) const {
    Vec xp(x.begin(), x.end()), xm(x.begin(), x.end());
    double q = 0.0;
    for (int j = 0; j < ambient_dim; ++j) {
      if (j == i) continue;  // Q^{ii} = 0
      xp[j] = x[j] + h_fd;
      xm[j] = x[j] - h_fd;
      q += (entry(i, j, xp) - entry(i, j, xm)) / (2.0 * h_fd);
      xp[j] = x[j];
      xm[j] = x[j];
    }
    return q;
  }

  Vec row_divergence(std::span<const double> x, double h_fd) const {
    Vec q(ambient_dim, 0.0);
    for (int i = 0; i < ambient_dim; ++i) q[i] = row_divergence_component(i, x, h_fd);
    return q;
  }
};

// Q^{12} = strength * log|(x_1, x_2)|, zero elsewhere. Its row-divergence is the
// rotational inverse-distance drift, which is why it is the canonical example.
inline StreamMatrix log_rotor_stream(int d, double strength = 1.0) {
  if (d < 2) throw ConfigInvalid("log_rotor_stream: d >= 2 required");
  StreamMatrix q;
  q.ambient_dim = d;
  q.bmo_seminorm_hint = strength;  // log of a polynomial is BMO with norm ~ strength
  q.entry = [strength](int i, int j, std::span<const double> x) -> double {
    if (i == j) return 0.0;
    const bool fwd = (i == 0 && j == 1);
    const bool bwd = (i == 1 && j == 0);
    if (!fwd && !bwd) return 0.0;
    const double r2 = x[0] * x[0] + x[1] * x[1];
    const double v = 0.5 * strength * std::log(std::max(r2, 1e-300));
    return fwd ? v : -v;
  };
  return q;
}

inline StreamMatrix zero_stream(int d) {
  StreamMatrix q;
  q.ambient_dim = d;
  q.bmo_seminorm_hint = 0.0;
  q.entry = [](int, int, std::span<const double>) { return 0.0; };
  return q;
}

namespace detail {
// clip(v) = (v ^ U) v V = median(V, v, U) with U >= 0 >= V
inline double clip_log(double v, double logx, double inv_eps, double c) {
  const double u = std::min(std::max(-c * logx + inv_eps, 0.0), inv_eps);
  const double w = std::max(std::min(c * logx - inv_eps, 0.0), -inv_eps);
  return std::max(std::min(v, u), w);
}
}  // namespace detail

// Clip the entries between +-(c log|x| -+ 1/eps) capped at +-1/eps, then smooth
// with the Gaussian kernel at scale eps. Output stays antisymmetric and bounded
// by 1/eps. `c` is a free constant (see module notes), default 1.
inline StreamMatrix truncate_stream(const StreamMatrix& q, double eps, double c = 1.0,
                                    int nodes_per_axis = 8) {
  if (!(eps > 0.0)) throw ConfigInvalid("truncate_stream: eps > 0 required");
  StreamMatrix out;
  out.ambient_dim = q.ambient_dim;
  out.bmo_seminorm_hint = q.bmo_seminorm_hint;
  const int dim = q.ambient_dim;
  const double inv_eps = 1.0 / eps;
  const auto base = q.entry;
  out.entry = [base, dim, eps, inv_eps, c, nodes_per_axis](
                  int i, int j, std::span<const double> x) -> double {
    if (i == j) return 0.0;
    const QuadratureRule rule = gauss_hermite(nodes_per_axis);
    const double scale = std::sqrt(4.0 * eps);
    std::vector<int> idx(dim, 0);
    Vec point(dim, 0.0);
    const double wnorm = std::pow(std::numbers::pi, -0.5 * dim);
    double acc = 0.0;
    do {
      double w = wnorm;
      for (int k = 0; k < dim; ++k) {
        w *= rule.weights[idx[k]];
        point[k] = x[k] - scale * rule.nodes[idx[k]];
      }
      const double r2 = norm2(point);
      if (r2 < kSingularTol * kSingularTol) continue;
      const double v = base(i, j, point);
      acc += w * detail::clip_log(v, 0.5 * std::log(r2), inv_eps, c);
    } while (detail::next_index(idx, nodes_per_axis));
    return acc;
  };
  return out;
}

}  // namespace sdelab
