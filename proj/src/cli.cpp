#include "ttsa/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "ttsa/analysis.hpp"
#include "ttsa/config.hpp"
#include "ttsa/constants.hpp"
#include "ttsa/errors.hpp"
#include "ttsa/gtd.hpp"
#include "ttsa/sa_core.hpp"

namespace fs = std::filesystem;

namespace ttsa {

namespace {

MdpSpec mdp_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mdp file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("mdp file '" + path + "': " + e.what());
  }
  return mdp_from_json(j);
}

struct ResolvedSystem {
  MatrixSpec spec;
  DerivedSystem sys;
  std::shared_ptr<NoiseModel> noise;
  double m1 = 1.0, m2 = 1.0;
  std::unique_ptr<GtdInstance> inst;  // null for inline matrix systems
};

ResolvedSystem resolve_system(const ExperimentConfig& cfg, bool need_noise = true) {
  ResolvedSystem r;
  if (cfg.has_matrix) {
    r.spec = cfg.matrix;
    r.m1 = cfg.m1;
    r.m2 = cfg.m2;
  } else if (cfg.has_gtd || cfg.has_random_mdp) {
    const MdpSpec mdp =
        cfg.has_random_mdp
            ? random_mdp(cfg.mdp_states, cfg.mdp_features, cfg.mdp_seed, true)
            : (cfg.has_inline_mdp ? cfg.inline_mdp : mdp_from_file(cfg.mdp_file));
    r.inst = std::make_unique<GtdInstance>(build_gtd(cfg.variant, mdp));
    r.spec = r.inst->spec;
    r.m1 = r.inst->m1;
    r.m2 = r.inst->m2;
  } else {
    // constants falls back to the 1-d identity system
    r.spec.gamma1 = Matrix::Identity(1, 1);
    r.spec.w1 = Matrix::Zero(1, 1);
    r.spec.gamma2 = Matrix::Zero(1, 1);
    r.spec.w2 = Matrix::Identity(1, 1);
    r.spec.v1 = Vector::Zero(1);
    r.spec.v2 = Vector::Zero(1);
    r.m1 = cfg.m1;
    r.m2 = cfg.m2;
  }
  r.spec.validate();
  r.sys = derive_system(r.spec);
  if (!need_noise) return r;
  switch (cfg.noise) {
    case NoiseKind::Zero:
      r.noise = std::make_shared<ZeroNoise>();
      break;
    case NoiseKind::Sphere:
      r.noise = std::make_shared<BoundedSphereNoise>(cfg.noise_c);
      break;
    case NoiseKind::Gtd:
      if (!r.inst)
        throw ConfigError(
            "config field 'noise.kind': gtd noise needs a gtd or random_mdp system");
      r.noise = std::make_shared<GtdNoise>(*r.inst);
      break;
  }
  return r;
}

LedgerConfig ledger_config(const ExperimentConfig& cfg, const ResolvedSystem& r) {
  LedgerConfig lc;
  lc.delta = cfg.delta;
  lc.p = cfg.p;
  lc.schedule = cfg.schedule;
  lc.m1 = r.m1;
  lc.m2 = r.m2;
  lc.d = r.spec.dim();
  lc.r_theta = cfg.ledger_r_theta;
  lc.r_w = cfg.ledger_r_w;
  lc.report_n0 = cfg.report_n0;
  return lc;
}

std::vector<std::uint64_t> resolve_checkpoints(const ExperimentConfig& cfg) {
  if (!cfg.checkpoint_list.empty()) return cfg.checkpoint_list;
  const std::uint64_t lo = std::min<std::uint64_t>(100, cfg.horizon);
  return log_uniform_checkpoints(lo, cfg.horizon, cfg.checkpoint_count);
}

fs::path prepare_out(const ExperimentConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory '" + cfg.out_dir +
                      "': " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  return out;
}

void finish(std::ofstream& out, const fs::path& p) {
  out.flush();
  if (!out) throw ConfigError("write failed for '" + p.string() + "'");
  std::cout << "wrote " << p.string() << "\n";
}

void do_run(const ExperimentConfig& cfg) {
  const ResolvedSystem r = resolve_system(cfg);
  const auto cps = resolve_checkpoints(cfg);
  const SweepResult sweep =
      run_sweep(r.spec, cfg.schedule, cfg.projection, *r.noise, cfg.horizon,
                cps, cfg.base_seed, cfg.seed_count, 0);
  const fs::path p = prepare_out(cfg) / "runs.csv";
  auto out = open_out(p);
  write_runs_csv(out, sweep);
  finish(out, p);
  std::cout << sweep.seeds.size() << " seeds, " << cps.size()
            << " checkpoints, " << sweep.num_divergent() << " divergent\n";
}

void do_constants(const ExperimentConfig& cfg) {
  const ResolvedSystem r = resolve_system(cfg, /*need_noise=*/false);
  const ConstantsLedger ledger(r.sys, ledger_config(cfg, r));
  const fs::path p = prepare_out(cfg) / "constants.json";
  auto out = open_out(p);
  out << ledger.to_json().dump(2) << "\n";
  finish(out, p);
}

void do_rates(const ExperimentConfig& cfg) {
  const ResolvedSystem r = resolve_system(cfg);
  const auto cps = resolve_checkpoints(cfg);
  const SweepResult sweep =
      run_sweep(r.spec, cfg.schedule, cfg.projection, *r.noise, cfg.horizon,
                cps, cfg.base_seed, cfg.seed_count, 0);

  std::uint64_t lo = cfg.window_lo, hi = cfg.window_hi;
  if (lo == 0 && hi == 0) {
    // default fit window: the last two decades before the horizon
    hi = cfg.horizon;
    lo = std::max<std::uint64_t>(1, cfg.horizon / 100);
  }
  const RateReport rep = fit_rate(sweep, lo, hi, cfg.schedule);
  const SweepTable table = summarize(sweep, cfg.schedule, cfg.c);

  const fs::path dir = prepare_out(cfg);
  {
    const fs::path p = dir / "rates.csv";
    auto out = open_out(p);
    write_table_csv(out, table);
    finish(out, p);
  }
  nlohmann::json j;
  j["slope_theta"] = rep.slope_theta;
  j["slope_w"] = rep.slope_w;
  j["stderr_theta"] = rep.stderr_theta;
  j["stderr_w"] = rep.stderr_w;
  j["window"] = {rep.window_lo, rep.window_hi};
  j["num_seeds"] = rep.num_seeds;
  j["num_divergent"] = rep.num_divergent;
  j["predicted_theta"] = rep.predicted_theta;
  j["predicted_w"] = rep.predicted_w;
  const fs::path p = dir / "rates.json";
  auto out = open_out(p);
  out << j.dump(2) << "\n";
  finish(out, p);
  std::cout << "slope_theta " << rep.slope_theta << " (predicted "
            << rep.predicted_theta << "), slope_w " << rep.slope_w
            << " (predicted " << rep.predicted_w << ")\n";
}

void do_lower_bound(const ExperimentConfig& cfg) {
  const ResolvedSystem r = resolve_system(cfg);
  if (!r.inst)
    throw ConfigError("config field 'system': lower-bound needs a gtd instance");
  const auto cps = resolve_checkpoints(cfg);
  const SweepTable table = lower_bound_mc(*r.inst, cfg.schedule, cfg.seed_count,
                                          cfg.base_seed, cps, cfg.c, 0);
  const fs::path dir = prepare_out(cfg);
  {
    const fs::path p = dir / "lower_bound.csv";
    auto out = open_out(p);
    write_table_csv(out, table);
    finish(out, p);
  }
  nlohmann::json j;
  j["c"] = table.c;
  j["num_seeds"] = table.num_seeds;
  j["num_divergent"] = table.num_divergent;
  j["n"] = table.ns;
  j["frac_below_c_theta"] = table.frac_below_c_theta;
  j["frac_below_c_w"] = table.frac_below_c_w;
  const fs::path p = dir / "lower_bound.json";
  auto out = open_out(p);
  out << j.dump(2) << "\n";
  finish(out, p);
}

void do_decompose(const ExperimentConfig& cfg) {
  if (cfg.projection.enabled)
    throw ConfigError(
        "config field 'projection.enabled': decompose needs an unprojected run");
  const ResolvedSystem r = resolve_system(cfg);
  RunOptions opts;
  opts.record_noise = true;
  const ProjectionConfig off;
  const Trajectory traj = run_trajectory(r.spec, cfg.schedule, off, *r.noise,
                                         cfg.horizon, cfg.base_seed, {}, opts);
  const Decomposition dec = decompose(traj, r.sys, cfg.n0);

  nlohmann::json j;
  j["n0"] = dec.n0;
  j["horizon"] = cfg.horizon;
  j["seed"] = cfg.base_seed;
  j["residual_theta"] = dec.residual_theta;
  j["residual_w"] = dec.residual_w;
  j["residual_telescoping"] = dec.residual_telescoping;
  j["max_iterate_norm"] = dec.max_iterate_norm;
  const double tol = 1e-8 * dec.max_iterate_norm;
  j["within_tolerance"] = dec.residual_theta <= tol && dec.residual_w <= tol &&
                          dec.residual_telescoping <= tol;
  const fs::path p = prepare_out(cfg) / "decompose.json";
  auto out = open_out(p);
  out << j.dump(2) << "\n";
  finish(out, p);
}

void do_mdp_gen(const ExperimentConfig& cfg) {
  const MdpSpec mdp =
      random_mdp(cfg.mdp_states, cfg.mdp_features, cfg.mdp_seed, true);
  const fs::path p = prepare_out(cfg) / "mdp.json";
  auto out = open_out(p);
  out << mdp_to_json(mdp).dump(2) << "\n";
  finish(out, p);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Linear two-timescale stochastic approximation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, variant_str;
  int seeds = 0;
  std::uint64_t horizon = 0;
  double alpha = 0.0, beta = 0.0;
  app.add_option("--config", config_path, "Experiment config JSON file");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seeds", seeds, "Number of Monte Carlo seeds");
  app.add_option("--horizon", horizon, "Number of iterations");
  app.add_option("--alpha", alpha, "Slow step exponent");
  app.add_option("--beta", beta, "Fast step exponent");
  app.add_option("--variant", variant_str, "GTD variant")
      ->check(CLI::IsMember({"gtd0", "gtd2", "tdc"}));

  for (const char* name : {"run", "constants", "rates", "lower-bound",
                           "decompose", "mdp-gen"}) {
    auto* sub = app.add_subcommand(name);
    sub->fallthrough();
  }
  app.get_subcommand("run")->description("Trajectory errors at checkpoints -> runs.csv");
  app.get_subcommand("constants")->description("Finite-time constants ledger -> constants.json");
  app.get_subcommand("rates")->description("Multi-seed rate fit -> rates.csv/json");
  app.get_subcommand("lower-bound")->description("Scaled-error fractions -> lower_bound.csv/json");
  app.get_subcommand("decompose")->description("Decomposition residuals -> decompose.json");
  app.get_subcommand("mdp-gen")->description("Random MDP instance -> mdp.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    ExperimentConfig cfg =
        config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (app.count("--out")) cfg.out_dir = out_dir;
    if (app.count("--seeds")) cfg.seed_count = seeds;
    if (app.count("--horizon")) cfg.horizon = horizon;
    if (app.count("--alpha")) cfg.schedule.alpha = alpha;
    if (app.count("--beta")) cfg.schedule.beta = beta;
    if (app.count("--variant")) cfg.variant = variant_from_name(variant_str);
    cfg.mode = mode_from_name(app.get_subcommands().front()->get_name());
    cfg.validate();

    switch (cfg.mode) {
      case Mode::Run: do_run(cfg); break;
      case Mode::Constants: do_constants(cfg); break;
      case Mode::Rates: do_rates(cfg); break;
      case Mode::LowerBound: do_lower_bound(cfg); break;
      case Mode::Decompose: do_decompose(cfg); break;
      case Mode::MdpGen: do_mdp_gen(cfg); break;
    }
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.emplace_back("ttsa");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const auto& s : full) argv.push_back(s.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ttsa
