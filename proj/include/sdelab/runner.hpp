// Subcommand implementations shared by the CLI binary and the tests: config
// resolution with the documented defaults, cross-field validation, dispatch,
// and CSV/JSON/manifest emission.
#pragma once

#include <filesystem>
#include <string>

#include "sdelab/bessel.hpp"
#include "sdelab/config.hpp"
#include "sdelab/hardy.hpp"
#include "sdelab/norms.hpp"
#include "sdelab/output.hpp"
#include "sdelab/particles.hpp"
#include "sdelab/version.hpp"

namespace sdelab {

struct RunArtifacts {
  std::string csv_path;
  std::string summary_path;
  std::string manifest_path;
  nlohmann::json summary;
};

namespace detail {

inline ParticleConfig particle_config_from(const Config& cfg) {
  ParticleConfig pc;
  pc.N = int(cfg.number_or("system.N", 2));
  pc.d = int(cfg.number_or("system.d", 3));
  pc.kappa = cfg.number_or("system.kappa", 0.0);
  if (pc.kappa < 0.0) throw ValidationError("system.kappa must be nonnegative");
  if (const auto* e = cfg.find("system.e")) {
    for (const auto& row : e->as_array("system.e"))
      for (const auto& cell : row.as_array("system.e row"))
        pc.e.push_back(cell.as_number("system.e entry"));
  }
  pc.T = cfg.number_or("sim.T", 1.0);
  pc.h = cfg.number_or("sim.h", 1e-3);
  pc.paths = long(cfg.number_or("sim.paths", 10000));
  pc.seed = uint64_t(cfg.number_or("sim.seed", 12345));
  pc.eps_coll = cfg.number_or("sim.eps_coll", -1.0);
  pc.dwell = cfg.number_or("sim.dwell", 0.5);
  pc.checkpoints = int(cfg.number_or("sim.checkpoints", 8));
  pc.R0 = cfg.number_or("sim.r0", 1.0);
  pc.stop_on_sticky = cfg.bool_or("sim.stop_on_sticky", true);
  pc.stop_on_collision = cfg.bool_or("sim.stop_on_collision", false);
  pc.workers = int(cfg.number_or("sim.workers", 0));
  pc.x0 = cfg.numbers_or("sim.x0", {});

  const std::string kind = cfg.string_or("mollifier.kind", "heat");
  if (kind == "heat")
    pc.mollifier_kind = MollifierKind::heat;
  else if (kind == "bump")
    pc.mollifier_kind = MollifierKind::bump;
  else
    throw ValidationError("mollifier.kind must be 'heat' or 'bump' for simulations");
  pc.mollifier_eps = cfg.number_or("mollifier.epsilon", 0.0);

  if (cfg.bool_or("stream.enabled", false)) {
    StreamPerturbation sp;
    sp.q0 = log_rotor_stream(pc.d, cfg.number_or("stream.strength", 1.0));
    sp.trunc_eps = cfg.number_or("stream.trunc_eps", 0.5);
    sp.fd_h = cfg.number_or("stream.fd_h", 1e-4);
    sp.clip_c = cfg.number_or("stream.clip_c", 1.0);
    pc.stream = std::move(sp);
  }
  try {
    pc.validate();
  } catch (const ConfigInvalid& e) {
    throw ValidationError(e.what());
  }
  return pc;
}

inline VectorField field_from(const Config& cfg) {
  const std::string kind = cfg.string_or("field.kind", "hardy");
  if (kind == "hardy")
    return hardy_field(cfg.number_or("field.delta", 1.0), int(cfg.number_or("field.d", 3)));
  if (kind == "particle_kernel") {
    std::vector<double> e;
    if (const auto* t = cfg.find("field.e")) {
      for (const auto& row : t->as_array("field.e"))
        for (const auto& cell : row.as_array("field.e row"))
          e.push_back(cell.as_number("field.e entry"));
    }
    return particle_kernel_field(int(cfg.number_or("field.N", 2)),
                                 int(cfg.number_or("field.d", 3)),
                                 cfg.number_or("field.kappa", 1.0), std::move(e));
  }
  if (kind == "rotational") return rotational_field(int(cfg.number_or("field.d", 3)));
  if (kind == "constant") {
    Vec v = cfg.numbers_or("field.value", {0.0, 0.0, 0.0});
    return constant_field(std::move(v));
  }
  if (kind == "inv_first_block")
    return inv_first_block_field(int(cfg.number_or("field.N", 2)),
                                 int(cfg.number_or("field.block_dim", 2)));
  throw ValidationError("field.kind '" + kind + "' is not known");
}

inline BallGrid grid_from(const Config& cfg, int dim) {
  BallGrid g;
  g.r_min = cfg.number_or("grid.r_min", 0.25);
  g.levels = int(cfg.number_or("grid.levels", 9));
  g.mc_nodes = long(cfg.number_or("grid.mc_nodes", 100000));
  g.seed = uint64_t(cfg.number_or("grid.seed", 7));
  g.radial_tilt = cfg.number_or("grid.radial_tilt", 2.0);
  if (const auto* centers = cfg.find("grid.centers")) {
    for (const auto& c : centers->as_array("grid.centers")) {
      Vec center;
      for (const auto& coord : c.as_array("grid.centers entry"))
        center.push_back(coord.as_number("grid center coordinate"));
      g.centers.push_back(std::move(center));
    }
  } else {
    g.centers = {Vec(size_t(dim), 0.0)};
  }
  try {
    g.validate(dim);
  } catch (const ConfigInvalid& e) {
    throw ValidationError(e.what());
  }
  return g;
}

inline RunArtifacts emit(const std::string& outdir, const std::string& name,
                         const RunTable& table, nlohmann::json summary, RunManifest manifest) {
  std::filesystem::create_directories(outdir);
  RunArtifacts art;
  art.csv_path = outdir + "/" + name + ".csv";
  art.summary_path = outdir + "/summary.json";
  art.manifest_path = outdir + "/manifest.json";
  summary["table"] = table.to_json();
  summary["subcommand"] = manifest.subcommand;
  manifest.outputs = {art.csv_path, art.summary_path};
  write_text_file(art.csv_path, table.to_csv());
  write_text_file(art.summary_path, summary.dump(2) + "\n");
  write_text_file(art.manifest_path, manifest.to_json().dump(2) + "\n");
  art.summary = std::move(summary);
  return art;
}

inline RunManifest manifest_for(const std::string& subcommand, const std::string& config_text,
                                uint64_t seed) {
  RunManifest m;
  m.subcommand = subcommand;
  m.config_text = config_text;
  m.master_seed = seed;
  m.tool_version = kToolVersion;
  m.build_id = kBuildId;
  return m;
}

}  // namespace detail

// ---- simulate ------------------------------------------------------------

inline RunArtifacts run_simulate(const std::string& config_text, const std::string& outdir) {
  const Config cfg = parse_config(config_text);
  const ParticleConfig pc = detail::particle_config_from(cfg);
  RunManifest manifest = detail::manifest_for("simulate", config_text, pc.seed);
  StageTimer timer(manifest);

  const Ensemble ens = timer.stage("simulate", [&] { return simulate_ensemble(pc); });
  const CollisionStats st = collision_statistics(ens);

  std::vector<std::string> cols = {"path_id",     "collided", "collision_time", "sticky",
                                   "sticky_time", "absorbed", "overflow",       "R_terminal"};
  for (int i = 0; i < pc.N * pc.d; ++i) cols.push_back("x" + std::to_string(i));
  RunTable table(cols);
  for (const auto& rec : ens.paths) {
    std::vector<nlohmann::json> row = {rec.path_id,
                                       rec.collided,
                                       rec.collision_time == std::numeric_limits<double>::infinity()
                                           ? -1.0
                                           : rec.collision_time,
                                       rec.sticky,
                                       rec.sticky_time == std::numeric_limits<double>::infinity()
                                           ? -1.0
                                           : rec.sticky_time,
                                       rec.absorbed,
                                       rec.overflow,
                                       reduce_R(rec.terminal, pc.N, pc.d)};
    for (const double c : rec.terminal) row.push_back(c);
    table.add_row(std::move(row));
  }

  nlohmann::json summary;
  summary["seed"] = pc.seed;
  summary["mollifier_eps"] = ens.mollifier_eps;
  summary["eps_coll"] = ens.eps_coll;
  summary["collision_probability"] = st.collision_probability;
  summary["collision_wilson_lo"] = st.collision_interval.lo;
  summary["collision_wilson_hi"] = st.collision_interval.hi;
  summary["sticky_fraction"] = st.sticky_fraction;
  summary["sticky_wilson_lo"] = st.sticky_interval.lo;
  summary["sticky_wilson_hi"] = st.sticky_interval.hi;
  summary["valid_paths"] = st.valid_paths;
  summary["overflow_paths"] = st.overflow_paths;
  summary["checkpoint_times"] = st.cdf_times;
  summary["hitting_cdf"] = st.hitting_cdf;
  summary["regime"] = regime_name(classify_regime(pc.N, pc.d, pc.kappa).label);
  summary["mu"] = bessel_dimension(pc.N, pc.d, pc.kappa);
  return detail::emit(outdir, "simulate", table, std::move(summary), std::move(manifest));
}

// ---- scan-kappa ------------------------------------------------------------

inline RunArtifacts run_scan_kappa(const std::string& config_text, const std::string& outdir) {
  const Config cfg = parse_config(config_text);
  const ParticleConfig base = detail::particle_config_from(cfg);
  std::vector<double> kappas = cfg.numbers_or("scan.kappas", {0.0, 16.0, 48.0, 100.0, 144.0, 160.0});
  RunManifest manifest = detail::manifest_for("scan-kappa", config_text, base.seed);
  StageTimer timer(manifest);

  const auto rows = timer.stage("scan", [&] { return scan_kappa(base, kappas); });

  RunTable table({"kappa", "mu", "label", "collision_probability", "collision_wilson_lo",
                  "collision_wilson_hi", "sticky_fraction", "sticky_wilson_lo",
                  "sticky_wilson_hi", "valid_paths", "overflow_paths"});
  for (const auto& row : rows) {
    table.add_row({row.kappa, row.regime.mu, regime_name(row.regime.label),
                   row.stats.collision_probability, row.stats.collision_interval.lo,
                   row.stats.collision_interval.hi, row.stats.sticky_fraction,
                   row.stats.sticky_interval.lo, row.stats.sticky_interval.hi,
                   row.stats.valid_paths, row.stats.overflow_paths});
  }
  nlohmann::json summary;
  summary["seed"] = base.seed;
  summary["kappa_count"] = rows.size();
  return detail::emit(outdir, "scan-kappa", table, std::move(summary), std::move(manifest));
}

// ---- uniqueness ------------------------------------------------------------

inline MollifierKind mollifier_kind_from_name(const std::string& name) {
  if (name == "heat") return MollifierKind::heat;
  if (name == "bump") return MollifierKind::bump;
  throw ValidationError("mollifier family '" + name + "' must be heat or bump");
}

inline RunArtifacts run_uniqueness(const std::string& config_text, const std::string& outdir) {
  const Config cfg = parse_config(config_text);
  const ParticleConfig base = detail::particle_config_from(cfg);
  const double delta = formbound_from_kappa(base.N, base.kappa);
  if (delta >= 4.0)
    throw ValidationError(
        "uniqueness requires the form bound delta = ((N-1)/N)^2 kappa < 4 "
        "(approximation-uniqueness hypothesis); got delta = " +
        std::to_string(delta));

  const auto fam_a = mollifier_kind_from_name(cfg.string_or("uniqueness.family_a", "heat"));
  const auto fam_b = mollifier_kind_from_name(cfg.string_or("uniqueness.family_b", "bump"));
  const auto eps = cfg.numbers_or("uniqueness.epsilons", {0.05, 0.01, 0.002});
  UniquenessOptions opt;
  opt.projections = int(cfg.number_or("uniqueness.projections", 32));
  opt.permutations = int(cfg.number_or("uniqueness.permutations", 64));

  RunManifest manifest = detail::manifest_for("uniqueness", config_text, base.seed);
  StageTimer timer(manifest);
  const auto trace =
      timer.stage("compare", [&] { return mollifier_uniqueness_test(base, fam_a, fam_b, eps, opt); });

  RunTable table({"epsilon", "energy_distance", "noise_floor", "ratio"});
  for (const auto& pt : trace)
    table.add_row({pt.eps, pt.distance, pt.noise_floor,
                   pt.noise_floor > 0.0 ? pt.distance / pt.noise_floor : -1.0});
  nlohmann::json summary;
  summary["seed"] = base.seed;
  summary["delta"] = delta;
  summary["projections"] = opt.projections;
  return detail::emit(outdir, "uniqueness", table, std::move(summary), std::move(manifest));
}

// ---- bessel-check ----------------------------------------------------------

inline RunArtifacts run_bessel_check(const std::string& config_text, const std::string& outdir) {
  const Config cfg = parse_config(config_text);
  BesselParams p;
  p.mu = cfg.number_or("bessel.mu", 3.0);
  p.x0 = cfg.number_or("bessel.x0", 1.0);
  const double t = cfg.number_or("bessel.t", 1.0);
  const long draws = long(cfg.number_or("bessel.draws", 100000));
  const double h = cfg.number_or("bessel.h", 1e-4);
  const uint64_t seed = uint64_t(cfg.number_or("bessel.seed", 12345));
  if (!(t > 0.0) || p.x0 < 0.0 || draws < 100)
    throw ValidationError("bessel-check requires t > 0, x0 >= 0, draws >= 100");

  RunManifest manifest = detail::manifest_for("bessel-check", config_text, seed);
  StageTimer timer(manifest);
  RunTable table({"mu", "x0", "t", "estimator", "value", "stderr"});

  timer.stage("estimate", [&] {
    if (p.mu > 0.0) {
      CounterRng rng(seed, 1, 0);
      RunningMoments m;
      std::vector<double> sample;
      sample.reserve(size_t(draws));
      for (long i = 0; i < draws; ++i) {
        const double r = sample_besq_transition(p, t, rng);
        m.add(r);
        sample.push_back(r);
      }
      table.add_row({p.mu, p.x0, t, "transition_mean", m.mean, m.stderr_mean()});
      table.add_row({p.mu, p.x0, t, "transition_mean_exact", p.x0 + p.mu * t, 0.0});
      table.add_row({p.mu, p.x0, t, "transition_variance", m.variance(),
                     m.variance() * std::sqrt(2.0 / double(draws - 1))});
      table.add_row({p.mu, p.x0, t, "transition_variance_exact",
                     4.0 * p.x0 * t + 2.0 * p.mu * t * t, 0.0});
      const double ks =
          ks_statistic(sample, [&](double x) { return besq_transition_cdf(p, t, x); });
      table.add_row({p.mu, p.x0, t, "transition_ks_vs_cdf", ks, 0.0});
    }
    {
      CounterRng rng(seed, 2, 0);
      RunningMoments m;
      long absorbed = 0;
      const long euler_draws = std::min<long>(draws, 20000);
      for (long i = 0; i < euler_draws; ++i) {
        const auto res = besq_euler_path(p, h, t, rng);
        m.add(res.terminal);
        if (res.absorbed) ++absorbed;
      }
      table.add_row({p.mu, p.x0, t, "euler_mean", m.mean, m.stderr_mean()});
      table.add_row(
          {p.mu, p.x0, t, "euler_absorbed_fraction", double(absorbed) / double(euler_draws), 0.0});
    }
    if (p.mu > 0.0 && p.mu < 2.0 && p.x0 > 0.0) {
      CounterRng rng(seed, 3, 0);
      std::vector<double> hits;
      for (long i = 0; i < draws; ++i) hits.push_back(sample_hitting_time(p, rng));
      std::sort(hits.begin(), hits.end());
      const double med = quantile_sorted(hits, 0.5);
      table.add_row({p.mu, p.x0, t, "hitting_median", med, 0.0});
      const double oracle = p.x0 / (2.0 * gamma_quantile(0.5, 1.0 - 0.5 * p.mu, 1.0));
      table.add_row({p.mu, p.x0, t, "hitting_median_exact", oracle, 0.0});
    }
  });

  nlohmann::json summary;
  summary["seed"] = seed;
  summary["mu"] = p.mu;
  summary["x0"] = p.x0;
  return detail::emit(outdir, "bessel-check", table, std::move(summary), std::move(manifest));
}

// ---- hardy-bounds ----------------------------------------------------------

struct RangeSpec {
  int lo = 0, hi = 0;
};

inline RangeSpec parse_range(const std::string& text) {
  const auto colon = text.find(':');
  RangeSpec r;
  try {
    if (colon == std::string::npos) {
      r.lo = r.hi = std::stoi(text);
    } else {
      r.lo = std::stoi(text.substr(0, colon));
      r.hi = std::stoi(text.substr(colon + 1));
    }
  } catch (const std::exception&) {
    throw ValidationError("range '" + text + "' must look like 'lo:hi'");
  }
  if (r.lo > r.hi) throw ValidationError("range '" + text + "' has lo > hi");
  return r;
}

inline RunArtifacts run_hardy_bounds(const std::string& d_range, const std::string& n_range,
                                     bool variational, const std::string& outdir,
                                     const std::string& config_text = "") {
  const RangeSpec dr = parse_range(d_range);
  const RangeSpec nr = parse_range(n_range);
  if (dr.lo < 3) throw ValidationError("hardy-bounds requires d >= 3");
  if (nr.lo < 2) throw ValidationError("hardy-bounds requires N >= 2");

  RunManifest manifest = detail::manifest_for("hardy-bounds", config_text, 2024);
  manifest.warnings.push_back(
      "k_int uses radicand factor 3(d-2)^2/(d-1)^2 while the lower bound uses "
      "3(d-2)^2/(2(d-1)^2); both are implemented verbatim");
  StageTimer timer(manifest);

  std::vector<std::string> cols = {"d",        "N",          "hhlt_lower", "paper_upper",
                                   "hhlt_upper", "kappa_hyp", "kappa_hyp2", "k_int"};
  if (variational) {
    cols.push_back("variational_upper");
    cols.push_back("variational_stderr");
  }
  RunTable table(cols);
  timer.stage("bounds", [&] {
    for (int d = dr.lo; d <= dr.hi; ++d)
      for (int n = nr.lo; n <= nr.hi; ++n) {
        auto row = bound_row(d, n);
        std::vector<nlohmann::json> cells = {row.d,          row.N,         row.hhlt_lower,
                                             row.paper_upper, row.hhlt_upper, row.kappa_hyp,
                                             row.kappa_hyp2,  row.k_int_endpoint};
        if (variational) {
          if (n <= 3) {
            const auto v = variational_upper(d, n);
            cells.push_back(v.c_hat);
            cells.push_back(v.stderr_batches);
          } else {
            cells.push_back(-1.0);
            cells.push_back(-1.0);
          }
        }
        table.add_row(std::move(cells));
      }
  });

  nlohmann::json summary;
  summary["rows"] = table.row_count();
  summary["warnings"] = manifest.warnings;
  return detail::emit(outdir, "hardy-bounds", table, std::move(summary), std::move(manifest));
}

// ---- norms -----------------------------------------------------------------

inline RunArtifacts run_norms(const std::string& config_text, const std::string& outdir) {
  const Config cfg = parse_config(config_text);
  const VectorField field = detail::field_from(cfg);
  const BallGrid grid = detail::grid_from(cfg, field.ambient_dim);
  const uint64_t seed = grid.seed;

  std::vector<std::string> functionals;
  if (const auto* f = cfg.find("norms.functionals")) {
    for (const auto& item : f->as_array("norms.functionals"))
      functionals.push_back(item.as_string("norms.functionals entry"));
  } else {
    functionals = {"morrey"};
  }

  RunManifest manifest = detail::manifest_for("norms", config_text, seed);
  StageTimer timer(manifest);
  RunTable table({"functional", "parameter", "estimate", "r_min", "levels", "mc_nodes",
                  "rejection_fraction"});
  timer.stage("estimate", [&] {
    for (const auto& name : functionals) {
      if (name == "morrey") {
        const double p = cfg.number_or("norms.p", 2.0);
        const auto res = morrey_functional(field, p, grid);
        table.add_row({"morrey", p, res.value, grid.r_min, grid.levels, grid.mc_nodes,
                       res.rejection_fraction});
      } else if (name == "cww") {
        const double alpha = cfg.number_or("norms.alpha", 1.0);
        const auto res = cww_functional(field, alpha, grid);
        table.add_row({"cww", alpha, res.value, grid.r_min, grid.levels, grid.mc_nodes,
                       res.rejection_fraction});
      } else if (name == "rayleigh") {
        const auto res = rayleigh_formbound(field);
        table.add_row({"rayleigh", 0.0, res.delta_hat, grid.r_min, grid.levels, grid.mc_nodes, 0.0});
      } else {
        throw ValidationError("norms functional '" + name + "' is not known");
      }
    }
  });

  nlohmann::json summary;
  summary["seed"] = seed;
  summary["field_kind"] = cfg.string_or("field.kind", "hardy");
  return detail::emit(outdir, "norms", table, std::move(summary), std::move(manifest));
}

// ---- replay ----------------------------------------------------------------

inline RunArtifacts run_from_manifest(const std::string& manifest_path, const std::string& outdir);

inline RunArtifacts dispatch(const std::string& subcommand, const std::string& config_text,
                             const std::string& outdir) {
  if (subcommand == "simulate") return run_simulate(config_text, outdir);
  if (subcommand == "scan-kappa") return run_scan_kappa(config_text, outdir);
  if (subcommand == "uniqueness") return run_uniqueness(config_text, outdir);
  if (subcommand == "bessel-check") return run_bessel_check(config_text, outdir);
  if (subcommand == "norms") return run_norms(config_text, outdir);
  if (subcommand == "hardy-bounds") {
    const Config cfg = parse_config(config_text);
    return run_hardy_bounds(cfg.string_or("hardy.d_range", "3:4"),
                            cfg.string_or("hardy.n_range", "2:3"),
                            cfg.bool_or("hardy.variational", false), outdir, config_text);
  }
  throw ValidationError("unknown subcommand '" + subcommand + "'");
}

inline RunArtifacts run_from_manifest(const std::string& manifest_path, const std::string& outdir) {
  const auto j = nlohmann::json::parse(read_text_file(manifest_path));
  return dispatch(j.at("subcommand").get<std::string>(), j.at("config_text").get<std::string>(),
                  outdir);
}

}  // namespace sdelab
