// Batch front-end: parse a config, dispatch a subcommand, manage seeds and
// workers, and emit analysis-ready tables.
//
// Exit codes: 0 success, 1 usage or parse error, 2 run invalid (cutoff
// overflow or divergence), 3 infeasibility where feasibility was required.
#include <omp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cim/config.hpp"
#include "cim/darkstate.hpp"
#include "cim/delayline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRunInvalid = 2;
constexpr int kExitInfeasible = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  int64_t seed = -1;
  int64_t samples = -1;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool require_config = true) {
  auto* opt = cmd->add_option("--config", args.config_path, "run configuration file");
  if (require_config) opt->required();
  cmd->add_option("--seed", args.seed, "master seed (overrides config)");
  cmd->add_option("--samples", args.samples, "sample count (overrides config)");
  cmd->add_option("--out", args.out_path, "output path (overrides config)");
  cmd->add_option("--workers", args.workers, "worker threads (default: all cores)");
}

cim::RunConfig load(const CommonArgs& args) {
  cim::RunConfig cfg = cim::load_run_config(args.config_path);
  if (args.seed >= 0) cfg.seed = static_cast<uint64_t>(args.seed);
  if (args.samples >= 0) cfg.n_samples = static_cast<int>(args.samples);
  if (!args.out_path.empty()) cfg.out_path = args.out_path;
  if (args.workers > 0) omp_set_num_threads(args.workers);
  return cfg;
}

cim::OscillatorNetwork build_network(const cim::RunConfig& cfg) {
  switch (cfg.scheme) {
    case cim::Scheme::Plain:
      return cim::build_plain(cfg.model, cfg.engine);
    case cim::Scheme::Hyperspin:
      return cim::build_hyperspin(cfg.model, cfg.phases_or_default(), cfg.engine);
    case cim::Scheme::GeneralFe: {
      if (cfg.n_flip < 0) throw std::runtime_error("general_fe scheme requires n_flip");
      return cim::build_general_fe(cfg.model, cfg.n_flip, cfg.engine);
    }
    case cim::Scheme::Feedback:
      return cim::build_feedback(cfg.model, cfg.engine);
  }
  throw std::logic_error("unreachable");
}

int cmd_solve_exact(const CommonArgs& args) {
  const cim::RunConfig cfg = load(args);
  const cim::Spectrum sp = cim::solve_exact(cfg.model);
  std::printf("n_spins %d  couplings %d  J %.17g\n", cfg.model.n_spins(),
              cfg.model.coupling_count(), cfg.model.j_magnitude());
  std::printf("E_mpe %.17g\n", cfg.model.minimum_possible_energy());
  std::printf("level,energy,degeneracy,required_flips\n");
  for (size_t i = 0; i < sp.level_count(); ++i) {
    std::printf("%zu,%.17g,%lld,%d\n", i, sp.energy(i),
                static_cast<long long>(sp.level(i).degeneracy),
                cfg.model.required_flips(sp.energy(i)));
  }
  return kExitOk;
}

int cmd_sweep(const CommonArgs& args) {
  const cim::RunConfig cfg = load(args);
  const cim::OscillatorNetwork net = build_network(cfg);

  cim::SweepOptions opts;
  opts.n_samples = cfg.n_samples;
  opts.seed = cfg.seed;
  opts.schedule = cfg.schedule;
  opts.integ = cfg.integ;
  opts.acceptance_ratio = cfg.acceptance_ratio;

  const std::vector<cim::SweepRecord> records = cim::run_sweep(net, cfg.model, opts);

  if (!cfg.out_path.empty()) {
    std::ofstream f(cfg.out_path, std::ios::binary);
    if (!f) {
      std::fprintf(stderr, "error: cannot write output file %s\n", cfg.out_path.c_str());
      return kExitUsage;
    }
    cim::write_sweep_csv(f, records);
  } else {
    cim::write_sweep_csv(std::cout, records);
  }

  const cim::SweepSummary sum = cim::summarize(records);
  std::printf("samples %d accepted %d", sum.n_samples, sum.n_accepted);
  if (sum.best_accepted_energy) std::printf(" best_accepted_energy %.17g", *sum.best_accepted_energy);
  if (sum.min_log10_fluctuation) std::printf(" min_log10_F %.6g", *sum.min_log10_fluctuation);
  std::printf("\n");

  bool feasibility_required = true;
  if (cfg.scheme == cim::Scheme::GeneralFe) {
    const cim::Spectrum sp = cim::solve_exact(cfg.model);
    feasibility_required = cfg.n_flip >= cfg.model.required_flips(sp.ground_energy());
  }
  if (sum.n_accepted == 0 && feasibility_required) return kExitInfeasible;
  return kExitOk;
}

int cmd_trajectory(const CommonArgs& args) {
  const cim::RunConfig cfg = load(args);
  const cim::QuantumConfig& q = cfg.quantum;

  if (cfg.scheme != cim::Scheme::Hyperspin)
    throw std::runtime_error("trajectory requires the hyperspin scheme");

  const double alpha = std::sqrt(q.alpha_sq);
  const int cutoff = q.cutoff > 0 ? q.cutoff : cim::default_fock_cutoff(q.alpha_sq);
  const int n_modes = cfg.model.n_spins() + 2;
  const int total_cap =
      q.total_cap == -2 ? cim::default_total_cap(q.alpha_sq * n_modes) : q.total_cap;

  const cim::PhaseMap phases = cfg.phases_or_default();
  const cim::FockNetwork net = cim::fock_hyperspin_network(
      cfg.model, phases, q.gamma, q.gamma_c_ratio * q.gamma, cutoff, total_cap);

  const auto components = cim::construct_dark_components(cfg.model, phases, alpha);
  const std::vector<cim::cxd> dark = cim::dark_state_vector(net.basis, components);

  const double s_max = 0.5 * q.gamma * q.alpha_sq;
  const cim::PumpSchedule sched =
      cim::PumpSchedule::ramp_then_hold(s_max, q.t_ramp / q.gamma, q.t_hold / q.gamma);

  cim::TrajectoryOptions topt;
  topt.n_traj = q.n_traj;
  topt.seed = cfg.seed;
  topt.dt_max = q.dt_max;
  topt.precision = q.precision;
  if (q.dark_initial) topt.initial_state = &dark;

  const cim::TrajectoryEnsemble ens =
      cim::run_trajectories(net, sched, sched.duration(), topt, &dark);
  const cim::FidelityEstimate fid = cim::fidelity_to_dark(ens);

  double max_boundary = 0.0;
  int jumps = 0;
  for (const auto& r : ens.results) {
    max_boundary = std::max(max_boundary, r.boundary_pop);
    jumps += r.jumps;
  }
  std::printf("trajectories %d fidelity %.6f stderr %.6f mean_jumps %.3f max_boundary_pop %.3g\n",
              q.n_traj, fid.mean, fid.std_error,
              static_cast<double>(jumps) / std::max(1, q.n_traj), max_boundary);

  if (!cfg.out_path.empty()) {
    std::ofstream f(cfg.out_path, std::ios::binary);
    if (!f) {
      std::fprintf(stderr, "error: cannot write output file %s\n", cfg.out_path.c_str());
      return kExitUsage;
    }
    cim::write_ensemble_csv(f, ens);
  }

  if (!ens.all_valid()) {
    std::fprintf(stderr, "run invalid: population on the truncation boundary exceeded the monitor\n");
    return kExitRunInvalid;
  }
  return kExitOk;
}

int cmd_compile_delayline(const CommonArgs& args, bool check) {
  const cim::RunConfig cfg = load(args);
  if (cfg.scheme != cim::Scheme::Hyperspin)
    throw std::runtime_error("compile-delayline requires the hyperspin scheme");
  const cim::PhaseMap phases = cfg.phases_or_default();
  const cim::PortSchedule sched = cim::compile_multiport(cfg.model, phases);

  std::ostringstream text;
  cim::write_port_schedule(text, sched);
  if (!cfg.out_path.empty()) {
    std::ofstream f(cfg.out_path, std::ios::binary);
    if (!f) {
      std::fprintf(stderr, "error: cannot write output file %s\n", cfg.out_path.c_str());
      return kExitUsage;
    }
    f << text.str();
  } else {
    std::cout << text.str();
  }

  if (check && cfg.model.coupling_count() > 0) {
    std::istringstream in(text.str());
    const cim::PortSchedule reread = cim::read_port_schedule(in);
    const auto [fwd, bwd] = cim::reconstruct_channels(reread, cfg.model.n_spins());
    const cim::OscillatorNetwork net =
        cim::build_hyperspin(cfg.model, phases, cfg.engine);
    double err = 0.0;
    for (size_t c = 0; c < net.channels.size(); ++c) {
      const auto& ref = c == 0 ? fwd : bwd;  // channel 0 is the idler-side one
      for (const auto& e : net.channels[c].coefficients) {
        const int slot = e.mode < cfg.model.n_spins() ? e.mode : cfg.model.n_spins();
        err = std::max(err, std::abs(e.coeff - ref[slot]));
      }
    }
    std::printf("round_trip_max_error %.3g\n", err);
    if (err > 1e-12) {
      std::fprintf(stderr, "round-trip check failed\n");
      return kExitRunInvalid;
    }
  }
  return kExitOk;
}

int cmd_check_dark(const CommonArgs& args) {
  const cim::RunConfig cfg = load(args);
  const cim::OscillatorNetwork net = build_network(cfg);
  std::vector<cim::cxd> assignment(net.size(), 0.0);
  for (const auto& [name, value] : cfg.assignment) {
    bool found = false;
    for (int i = 0; i < net.size(); ++i) {
      if (net.mode_names[i] == name) {
        assignment[i] = value;
        found = true;
        break;
      }
    }
    if (!found) throw std::runtime_error("assignment names unknown mode '" + name + "'");
  }
  std::printf("channel,residual_re,residual_im,abs\n");
  for (size_t c = 0; c < net.channels.size(); ++c) {
    const cim::cxd r = cim::channel_residual(net.channels[c], assignment);
    std::printf("%zu,%.17g,%.17g,%.3g\n", c, r.real(), r.imag(), std::abs(r));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coherent Ising machine simulator with frustration elimination"};
  app.require_subcommand(1);

  CommonArgs a_solve, a_sweep, a_traj, a_delay, a_dark;
  bool delay_check = false;

  auto* c_solve = app.add_subcommand("solve-exact", "enumerate the exact spectrum");
  add_common(c_solve, a_solve);
  auto* c_sweep = app.add_subcommand("sweep", "run a solution-search sweep");
  add_common(c_sweep, a_sweep);
  auto* c_traj = app.add_subcommand("trajectory", "quantum trajectory fidelity run");
  add_common(c_traj, a_traj);
  auto* c_delay = app.add_subcommand("compile-delayline", "emit a multi-port delay schedule");
  add_common(c_delay, a_delay);
  c_delay->add_flag("--check", delay_check, "re-read the schedule and verify the channels");
  auto* c_dark = app.add_subcommand("check-dark", "evaluate channel residuals on an assignment");
  add_common(c_dark, a_dark);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_solve->parsed()) return cmd_solve_exact(a_solve);
    if (c_sweep->parsed()) return cmd_sweep(a_sweep);
    if (c_traj->parsed()) return cmd_trajectory(a_traj);
    if (c_delay->parsed()) return cmd_compile_delayline(a_delay, delay_check);
    if (c_dark->parsed()) return cmd_check_dark(a_dark);
  } catch (const cim::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
