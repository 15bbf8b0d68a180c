// Euler-Maruyama ensemble simulator for the attracting N-particle system with
// mollified pair drift and optional truncated-stream advection, plus the
// collision/stickiness statistics, the kappa scan, the center-of-mass check,
// and the two-mollifier comparison.
//
// Paths are driven by counter-based streams keyed by (seed, path, particle),
// so ensembles are bit-identical for any worker count and permuting particle
// labels together with their stream ids permutes the results exactly.
#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "sdelab/bessel.hpp"
#include "sdelab/fields.hpp"
#include "sdelab/norms.hpp"
#include "sdelab/pair_kernel.hpp"
#include "sdelab/rng.hpp"
#include "sdelab/stats.hpp"
#include "sdelab/threads.hpp"

namespace sdelab {

inline uint64_t mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct StreamPerturbation {
  StreamMatrix q0;         // acts on each particle's own coordinates
  double trunc_eps = 0.5;  // clip-and-smooth scale
  double fd_h = 1e-4;      // finite-difference step for the row divergence
  double clip_c = 1.0;     // constant in the log clip envelopes
};

struct ParticleConfig {
  int N = 2;
  int d = 3;
  double kappa = 0.0;
  std::vector<double> e;  // N*N modulation, empty = all ones

  MollifierKind mollifier_kind = MollifierKind::heat;
  double mollifier_eps = 0.0;  // <= 0 selects the stability rule below

  std::optional<StreamPerturbation> stream;

  Vec x0;          // explicit start; empty = ring placement with dispersion R0
  double R0 = 1.0;

  double T = 1.0;
  double h = 1e-3;
  long paths = 10000;
  uint64_t seed = 12345;

  double eps_coll = -1.0;  // < 0 selects max(10 h, 1e-4)
  double dwell = 0.5;      // window for the stickiness declaration
  int checkpoints = 8;
  bool stop_on_sticky = true;
  bool stop_on_collision = false;  // absorb at first collision (first-passage runs)
  int workers = 0;  // 0 = SDELAB_WORKERS or hardware

  // noise stream id per particle slot; empty = identity. Permuting these along
  // with x0 blocks permutes path outputs bit-for-bit.
  std::vector<uint64_t> particle_stream_ids;

  double pair_coefficient() const {
    return std::sqrt(kappa) * 0.5 * double(d - 2) / double(N);
  }

  // Stability rule: the relative-coordinate core stiffness c_pair * g0(eps)
  // must stay below theta/h for explicit Euler to resolve the mollified well.
  double resolved_mollifier_eps() const {
    if (mollifier_eps > 0.0) return mollifier_eps;
    const double theta = 0.25;
    const double c_pair = 2.0 * pair_coefficient();  // drift scale of u = x_i - x_j
    if (c_pair <= 0.0) return 1e-8;
    if (mollifier_kind == MollifierKind::heat)
      return c_pair * h / (2.0 * double(d) * theta);  // g0 = 1/(2 d eps)
    // bump: g0 = (d-2) J_d / (d eps^2)
    const double j = unit_sphere_area(d) *
                     adaptive_simpson(
                         [this](double r) {
                           return std::pow(r, d - 3) * detail::bump_profile(r, d);
                         },
                         0.0, 1.0, 1e-12);
    return std::sqrt(double(d - 2) * j * c_pair * h / (double(d) * theta));
  }

  double resolved_eps_coll() const {
    return eps_coll > 0.0 ? eps_coll : std::max(10.0 * h, 1e-4);
  }

  Vec resolved_x0() const {
    if (!x0.empty()) {
      if (int(x0.size()) != N * d) throw ConfigInvalid("x0 must have N*d coordinates");
      return x0;
    }
    // particles on a ring in the first two coordinates, scaled to R(x0) = R0
    Vec out(size_t(N) * d, 0.0);
    const double radius = std::sqrt(2.0 * R0 / double(N));
    for (int i = 0; i < N; ++i) {
      const double a = 2.0 * std::numbers::pi * double(i) / double(N);
      out[size_t(i) * d + 0] = radius * std::cos(a);
      out[size_t(i) * d + 1] = radius * std::sin(a);
    }
    return out;
  }

  void validate() const {
    if (N < 2 || d < 3) throw ConfigInvalid("particles: N >= 2 and d >= 3 required");
    if (kappa < 0.0) throw ConfigInvalid("particles: kappa >= 0 required");
    if (!(h > 0.0) || !(T >= h)) throw ConfigInvalid("particles: h > 0 and T >= h required");
    if (paths < 1) throw ConfigInvalid("particles: paths >= 1 required");
    if (!e.empty()) {
      if (int(e.size()) != N * N) throw ConfigInvalid("particles: e table must be N*N");
      for (const double v : e)
        if (!(std::abs(v) <= 1.0)) throw ConfigInvalid("particles: |e_ij| <= 1 required");
    }
    if (!particle_stream_ids.empty() && int(particle_stream_ids.size()) != N)
      throw ConfigInvalid("particles: stream id table must have N entries");
    if (checkpoints < 1) throw ConfigInvalid("particles: checkpoints >= 1 required");
    // initial pair separations must clear the collision tolerance
    const Vec start = resolved_x0();
    const double ec = resolved_eps_coll();
    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) {
          const double diff = start[size_t(i) * d + k] - start[size_t(j) * d + k];
          s += diff * diff;
        }
        if (!(s > ec * ec))
          throw ConfigInvalid("particles: initial pair distances must exceed eps_coll");
      }
  }
};

struct PathRecord {
  long path_id = 0;
  Vec terminal;                  // state at T, or at the sticky stop
  std::vector<double> r_trace;   // R at checkpoint times (frozen after a stop)
  std::vector<double> com_trace; // center of mass at checkpoints, d per entry
  double collision_time = std::numeric_limits<double>::infinity();
  bool collided = false;
  bool sticky = false;
  double sticky_time = std::numeric_limits<double>::infinity();
  bool absorbed = false;  // integration stopped at the sticky declaration
  bool overflow = false;  // non-finite state; excluded from statistics
};

struct Ensemble {
  ParticleConfig config;
  double mollifier_eps = 0.0;
  double eps_coll = 0.0;
  std::vector<double> checkpoint_times;
  std::vector<PathRecord> paths;
  long overflow_count = 0;
};

// R = (1/4N) sum_{i,j} |x_i - x_j|^2, the squared-Bessel reduction coordinate.
inline double reduce_R(std::span<const double> state, int N, int d) {
  if (int(state.size()) != N * d) throw DimensionMismatch("reduce_R: state must be N*d");
  double acc = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) {
        const double diff = state[size_t(i) * d + k] - state[size_t(j) * d + k];
        s += diff * diff;
      }
      acc += s;
    }
  return acc / (2.0 * double(N));
}

inline Ensemble simulate_ensemble(const ParticleConfig& config) {
  config.validate();
  Ensemble ens;
  ens.config = config;
  const int N = config.N, d = config.d;
  const int dim = N * d;
  const double h = config.h;
  const long steps = std::lround(config.T / h);
  const double eps_coll = config.resolved_eps_coll();
  const double eps_moll = config.resolved_mollifier_eps();
  ens.eps_coll = eps_coll;
  ens.mollifier_eps = eps_moll;

  std::shared_ptr<const MollifiedPairKernel> table;
  if (config.kappa > 0.0)
    table = std::make_shared<const MollifiedPairKernel>(config.mollifier_kind, eps_moll, d);

  // truncated stream field, shared across paths
  std::shared_ptr<const StreamMatrix> qtrunc;
  if (config.stream) {
    qtrunc = std::make_shared<const StreamMatrix>(truncate_stream(
        config.stream->q0, config.stream->trunc_eps, config.stream->clip_c));
  }

  const long dwell_steps = std::max<long>(1, std::lround(config.dwell / h));
  std::vector<long> checkpoint_steps;
  for (int c = 1; c <= config.checkpoints; ++c) {
    const double t = config.T * double(c) / double(config.checkpoints);
    checkpoint_steps.push_back(std::lround(t / h));
    ens.checkpoint_times.push_back(t);
  }

  const Vec start = config.resolved_x0();
  const double coeff = config.pair_coefficient();
  const double noise_sd = std::sqrt(2.0 * h);
  const int workers = config.workers > 0 ? config.workers : default_worker_count();

  ens.paths.assign(size_t(config.paths), PathRecord{});

  parallel_for(config.paths, workers, [&](long p) {
    PathRecord rec;
    rec.path_id = p;
    rec.r_trace.assign(checkpoint_steps.size(), 0.0);
    rec.com_trace.assign(checkpoint_steps.size() * size_t(d), 0.0);

    std::vector<CounterRng> streams;
    streams.reserve(size_t(N));
    for (int i = 0; i < N; ++i) {
      const uint64_t sid =
          config.particle_stream_ids.empty() ? uint64_t(i) : config.particle_stream_ids[size_t(i)];
      streams.emplace_back(config.seed, uint64_t(p) + 1, sid + 1);
    }

    Vec x = start;
    Vec drift(size_t(dim), 0.0);
    Vec pair_diff(size_t(d), 0.0);
    long below_run = 0;
    size_t next_cp = 0;
    bool stopped = false;

    for (long step = 0; step < steps && !stopped; ++step) {
      // pairwise attracting drift and the dispersion coordinate in one pass
      std::fill(drift.begin(), drift.end(), 0.0);
      double sum_sq = 0.0;
      for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
          double s = 0.0;
          double* diff = pair_diff.data();
          const double* xi = x.data() + size_t(i) * d;
          const double* xj = x.data() + size_t(j) * d;
          for (int k = 0; k < d; ++k) {
            diff[k] = xi[k] - xj[k];
            s += diff[k] * diff[k];
          }
          sum_sq += s;
          if (!table) continue;
          const double g = coeff * table->radial_coefficient(std::sqrt(s));
          const double eij = config.e.empty() ? 1.0 : config.e[size_t(i) * N + j];
          const double eji = config.e.empty() ? 1.0 : config.e[size_t(j) * N + i];
          double* di = drift.data() + size_t(i) * d;
          double* dj = drift.data() + size_t(j) * d;
          for (int k = 0; k < d; ++k) {
            di[k] += eij * g * diff[k];
            dj[k] -= eji * g * diff[k];
          }
        }
      if (qtrunc) {
        for (int i = 0; i < N; ++i) {
          std::span<const double> xi(x.data() + size_t(i) * d, size_t(d));
          for (int k = 0; k < d; ++k)
            drift[size_t(i) * d + k] +=
                qtrunc->row_divergence_component(k, xi, config.stream->fd_h);
        }
      }

      // X <- X - (b + q) h + sqrt(2h) xi, per-particle streams
      for (int i = 0; i < N; ++i)
        for (int k = 0; k < d; ++k)
          x[size_t(i) * d + k] +=
              -drift[size_t(i) * d + k] * h + noise_sd * streams[size_t(i)].normal();

      bool finite = true;
      for (const double c : x)
        if (!std::isfinite(c)) finite = false;
      if (!finite) {
        rec.overflow = true;
        break;
      }

      const double R = sum_sq / (2.0 * double(N));
      const double t_now = double(step + 1) * h;
      if (R <= eps_coll) {
        if (!rec.collided) {
          rec.collided = true;
          rec.collision_time = t_now;
          if (config.stop_on_collision) {
            rec.absorbed = true;
            stopped = true;
          }
        }
        ++below_run;
        if (!rec.sticky && below_run >= dwell_steps) {
          rec.sticky = true;
          rec.sticky_time = t_now - double(dwell_steps - 1) * h;  // window start
          if (config.stop_on_sticky) {
            rec.absorbed = true;
            stopped = true;
          }
        }
      } else {
        below_run = 0;
      }

      while (next_cp < checkpoint_steps.size() && step + 1 == checkpoint_steps[next_cp]) {
        rec.r_trace[next_cp] = R;
        for (int k = 0; k < d; ++k) {
          double com = 0.0;
          for (int i = 0; i < N; ++i) com += x[size_t(i) * d + k];
          rec.com_trace[next_cp * size_t(d) + size_t(k)] = com / double(N);
        }
        ++next_cp;
      }
    }

    // freeze later checkpoints when a path stopped early
    if (next_cp > 0 || stopped || rec.overflow) {
      for (size_t c = next_cp; c < checkpoint_steps.size(); ++c) {
        rec.r_trace[c] = next_cp > 0 ? rec.r_trace[next_cp - 1] : reduce_R(x, N, d);
        for (int k = 0; k < d; ++k) {
          double com = 0.0;
          for (int i = 0; i < N; ++i) com += x[size_t(i) * d + k];
          rec.com_trace[c * size_t(d) + size_t(k)] = com / double(N);
        }
      }
    }

    rec.terminal = std::move(x);
    ens.paths[size_t(p)] = std::move(rec);
  });

  for (const auto& rec : ens.paths)
    if (rec.overflow) ++ens.overflow_count;
  return ens;
}

struct CollisionStats {
  long valid_paths = 0;
  long overflow_paths = 0;
  double collision_probability = 0.0;
  WilsonInterval collision_interval;
  double sticky_fraction = 0.0;
  WilsonInterval sticky_interval;
  std::vector<double> cdf_times;     // checkpoint times
  std::vector<double> hitting_cdf;   // P(collision time <= t)
};

inline CollisionStats collision_statistics(const Ensemble& ens) {
  if (ens.paths.empty()) throw ConfigInvalid("collision_statistics: empty ensemble");
  CollisionStats st;
  st.overflow_paths = ens.overflow_count;
  long collided = 0, sticky = 0;
  for (const auto& rec : ens.paths) {
    if (rec.overflow) continue;
    ++st.valid_paths;
    if (rec.collided) ++collided;
    if (rec.sticky) ++sticky;
  }
  st.collision_interval = wilson_interval(collided, st.valid_paths);
  st.sticky_interval = wilson_interval(sticky, st.valid_paths);
  st.collision_probability =
      st.valid_paths > 0 ? double(collided) / double(st.valid_paths) : 0.0;
  st.sticky_fraction = st.valid_paths > 0 ? double(sticky) / double(st.valid_paths) : 0.0;
  st.cdf_times = ens.checkpoint_times;
  for (const double t : st.cdf_times) {
    long hit = 0;
    for (const auto& rec : ens.paths)
      if (!rec.overflow && rec.collision_time <= t) ++hit;
    st.hitting_cdf.push_back(st.valid_paths > 0 ? double(hit) / double(st.valid_paths) : 0.0);
  }
  return st;
}

struct ScanRow {
  double kappa = 0.0;
  Regime regime;
  CollisionStats stats;
};

// One ensemble per kappa with common random numbers across the grid.
inline std::vector<ScanRow> scan_kappa(const ParticleConfig& base, std::vector<double> kappas) {
  std::sort(kappas.begin(), kappas.end());
  std::vector<ScanRow> rows;
  for (const double kappa : kappas) {
    if (kappa < 0.0) throw ConfigInvalid("scan_kappa: kappa >= 0 required");
    ParticleConfig cfg = base;
    cfg.kappa = kappa;
    ScanRow row;
    row.kappa = kappa;
    row.regime = classify_regime(cfg.N, cfg.d, kappa);
    row.stats = collision_statistics(simulate_ensemble(cfg));
    rows.push_back(std::move(row));
  }
  return rows;
}

struct ComDiffusionResult {
  double slope = 0.0;          // per-coordinate variance growth rate
  double expected = 0.0;       // 2/N
  double relative_error = 0.0;
};

// Per-coordinate variance of the center of mass grows linearly with slope 2/N:
// the pairwise kernel cancels blockwise, leaving pure Brownian motion.
inline ComDiffusionResult com_diffusion_check(const Ensemble& ens) {
  const auto& cfg = ens.config;
  if (!cfg.e.empty()) throw ConfigInvalid("com_diffusion_check: requires e == 1");
  if (cfg.stream) throw ConfigInvalid("com_diffusion_check: requires no stream perturbation");
  const int d = cfg.d;
  const Vec start = cfg.resolved_x0();
  Vec com0(size_t(d), 0.0);
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < cfg.N; ++i) com0[size_t(k)] += start[size_t(i) * d + k];
    com0[size_t(k)] /= double(cfg.N);
  }
  std::vector<double> times, vars;
  for (size_t c = 0; c < ens.checkpoint_times.size(); ++c) {
    double var_sum = 0.0;
    for (int k = 0; k < d; ++k) {
      RunningMoments m;
      for (const auto& rec : ens.paths) {
        if (rec.overflow) continue;
        m.add(rec.com_trace[c * size_t(d) + size_t(k)] - com0[size_t(k)]);
      }
      var_sum += m.variance() + m.mean * m.mean;  // displacement second moment
    }
    times.push_back(ens.checkpoint_times[c]);
    vars.push_back(var_sum / double(d));
  }
  ComDiffusionResult res;
  res.slope = ls_slope_through_origin(times, vars);
  res.expected = 2.0 / double(cfg.N);
  res.relative_error = std::abs(res.slope - res.expected) / res.expected;
  return res;
}

struct UniquenessPoint {
  double eps = 0.0;
  double distance = 0.0;     // projected energy distance between the two laws
  double noise_floor = 0.0;  // permutation split quantile of the same statistic
};

namespace detail {

inline std::vector<Vec> projection_directions(int dim, int count, uint64_t seed) {
  std::vector<Vec> dirs;
  CounterRng rng(seed, 0x9E37ull, 0);
  while (int(dirs.size()) < count) {
    Vec v(size_t(dim), 0.0);
    double n2 = 0.0;
    for (auto& c : v) {
      c = rng.normal();
      n2 += c * c;
    }
    if (n2 < 1e-12) continue;
    for (auto& c : v) c /= std::sqrt(n2);
    dirs.push_back(std::move(v));
  }
  return dirs;
}

inline double projected_energy_distance(const std::vector<Vec>& dirs,
                                        const std::vector<const PathRecord*>& a,
                                        const std::vector<const PathRecord*>& b) {
  double acc = 0.0;
  std::vector<double> pa, pb;
  for (const auto& dir : dirs) {
    pa.clear();
    pb.clear();
    for (const auto* rec : a) {
      double s = 0.0;
      for (size_t k = 0; k < dir.size(); ++k) s += dir[k] * rec->terminal[k];
      pa.push_back(s);
    }
    for (const auto* rec : b) {
      double s = 0.0;
      for (size_t k = 0; k < dir.size(); ++k) s += dir[k] * rec->terminal[k];
      pb.push_back(s);
    }
    acc += energy_distance_1d(pa, pb);
  }
  return acc / double(dirs.size());
}

}  // namespace detail

struct UniquenessOptions {
  int projections = 32;
  int permutations = 64;
  double floor_quantile = 0.95;
};

// Theorem-style consistency check: ensembles driven by two different
// regularization families should converge to a common law. Returns, per
// schedule entry, the projected energy distance between terminal laws and a
// same-law noise floor from random splits of the first ensemble.
inline std::vector<UniquenessPoint> mollifier_uniqueness_test(
    const ParticleConfig& base, MollifierKind family_a, MollifierKind family_b,
    const std::vector<double>& eps_schedule, const UniquenessOptions& opt = {}) {
  const double delta = formbound_from_kappa(base.N, base.kappa);
  if (delta >= 4.0)
    throw DeltaAtOrAboveCritical(
        "mollifier_uniqueness_test: requires the form bound delta = ((N-1)/N)^2 kappa < 4, got " +
        std::to_string(delta));

  const auto dirs = detail::projection_directions(base.N * base.d, opt.projections,
                                                  mix64(base.seed ^ 0xD14Aull));
  std::vector<UniquenessPoint> trace;
  for (size_t idx = 0; idx < eps_schedule.size(); ++idx) {
    const double eps = eps_schedule[idx];
    ParticleConfig ca = base;
    ca.mollifier_kind = family_a;
    ca.mollifier_eps = eps;
    ca.seed = mix64(base.seed ^ (0xA000ull + idx));
    ParticleConfig cb = base;
    cb.mollifier_kind = family_b;
    cb.mollifier_eps = eps;
    cb.seed = mix64(base.seed ^ (0xB000ull + idx));

    const Ensemble ea = simulate_ensemble(ca);
    const Ensemble eb = simulate_ensemble(cb);
    std::vector<const PathRecord*> a, b;
    for (const auto& rec : ea.paths)
      if (!rec.overflow) a.push_back(&rec);
    for (const auto& rec : eb.paths)
      if (!rec.overflow) b.push_back(&rec);

    UniquenessPoint pt;
    pt.eps = eps;
    pt.distance = detail::projected_energy_distance(dirs, a, b);

    // noise floor: random half/half splits of ensemble A
    std::vector<double> null_stats;
    CounterRng perm_rng(mix64(base.seed ^ (0xF100ull + idx)), 0, 0);
    std::vector<const PathRecord*> pool = a;
    for (int p = 0; p < opt.permutations; ++p) {
      for (size_t i = pool.size(); i > 1; --i) {
        const size_t j = size_t((__uint128_t(perm_rng.next_u64()) * i) >> 64);
        std::swap(pool[i - 1], pool[j]);
      }
      const size_t half = pool.size() / 2;
      std::vector<const PathRecord*> lhs(pool.begin(), pool.begin() + half);
      std::vector<const PathRecord*> rhs(pool.begin() + half, pool.end());
      null_stats.push_back(detail::projected_energy_distance(dirs, lhs, rhs));
    }
    std::sort(null_stats.begin(), null_stats.end());
    pt.noise_floor = quantile_sorted(null_stats, opt.floor_quantile);
    trace.push_back(pt);
  }
  return trace;
}

}  // namespace sdelab
