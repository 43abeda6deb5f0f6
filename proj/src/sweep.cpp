#include "cim/sweep.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "cim/rng.hpp"

namespace cim {

AmplitudeStats amplitude_stats(std::span<const cxd> amplitudes) {
  AmplitudeStats st;
  if (amplitudes.empty()) return st;
  double sum = 0.0;
  for (const cxd& a : amplitudes) sum += std::abs(a);
  st.mean_amp = sum / static_cast<double>(amplitudes.size());
  for (const cxd& a : amplitudes) {
    const double d = std::abs(a) - st.mean_amp;
    st.fluctuation += d * d;
  }
  return st;
}

SpinConfig readout(const NetworkState& state, const OscillatorNetwork& net, double floor) {
  SpinConfig cfg;
  cfg.spins.resize(net.signal_count);
  for (int i = 0; i < net.signal_count; ++i) {
    const double re = state.amplitudes[i].real();
    if (std::abs(re) < floor) throw ReadoutUndecided(i);
    cfg.spins[i] = re > 0 ? int8_t{1} : int8_t{-1};
  }
  return cfg;
}

bool record_accepted(const AmplitudeStats& stats, int mode_count, double acceptance_ratio) {
  return stats.fluctuation <
         acceptance_ratio * stats.mean_amp * stats.mean_amp * static_cast<double>(mode_count);
}

NetworkState draw_initial_state(const OscillatorNetwork& net, const PumpSchedule& schedule,
                                uint64_t sample_seed) {
  std::mt19937_64 rng(sample_seed);
  const double radius = 0.1 * std::sqrt(schedule.p_max / net.params.gamma_d);
  NetworkState st;
  st.amplitudes.resize(net.size());
  for (int i = 0; i < net.size(); ++i) {
    const double u = uniform01(rng);
    const double v = uniform01(rng);
    st.amplitudes[i] = std::polar(radius * std::sqrt(u), 2.0 * std::numbers::pi * v);
  }
  return st;
}

namespace {

SweepRecord run_one_sample(const OscillatorNetwork& net, const IsingModel& model,
                           const SweepOptions& opts, int sample_index) {
  SweepRecord rec;
  rec.seed = derive_seed(opts.seed, static_cast<uint64_t>(sample_index));
  const NetworkState init = draw_initial_state(net, opts.schedule, rec.seed);
  const IntegrationResult res =
      integrate(net, init, opts.schedule, opts.schedule.duration(), opts.integ);

  if (res.status == IntegrateStatus::Diverged) {
    rec.status = RecordStatus::Diverged;
    rec.ising_energy = std::numeric_limits<double>::quiet_NaN();
    rec.mean_amp = std::numeric_limits<double>::quiet_NaN();
    rec.fluctuation = std::numeric_limits<double>::quiet_NaN();
    return rec;
  }

  const AmplitudeStats stats = amplitude_stats(res.final_state.amplitudes);
  rec.mean_amp = stats.mean_amp;
  rec.fluctuation = stats.fluctuation;

  const double floor = std::max(opts.undecided_abs, opts.undecided_rel * stats.mean_amp);
  try {
    rec.spins = readout(res.final_state, net, floor);
  } catch (const ReadoutUndecided&) {
    rec.status = RecordStatus::Undecided;
    // Best-effort spins for the record; the run stays rejected.
    rec.spins.spins.resize(net.signal_count);
    for (int i = 0; i < net.signal_count; ++i)
      rec.spins.spins[i] = res.final_state.amplitudes[i].real() >= 0 ? int8_t{1} : int8_t{-1};
  }
  rec.ising_energy = model.energy(rec.spins);
  rec.accepted = rec.status == RecordStatus::Ok &&
                 record_accepted(stats, net.size(), opts.acceptance_ratio);
  return rec;
}

std::vector<SweepRecord> run_sweep_impl(const OscillatorNetwork& net, const IsingModel& model,
                                        const SweepOptions& opts, bool parallel) {
  if (opts.n_samples < 1) throw std::invalid_argument("run_sweep: n_samples must be >= 1");
  net.validate();
  std::vector<SweepRecord> records(opts.n_samples);
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (int s = 0; s < opts.n_samples; ++s) {
    records[s] = run_one_sample(net, model, opts, s);
  }
  return records;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const OscillatorNetwork& net, const IsingModel& model,
                                   const SweepOptions& opts) {
  return run_sweep_impl(net, model, opts, true);
}

std::vector<SweepRecord> run_sweep_serial(const OscillatorNetwork& net, const IsingModel& model,
                                          const SweepOptions& opts) {
  return run_sweep_impl(net, model, opts, false);
}

ExcitedSearchResult excited_search(const IsingModel& model, int level_index,
                                   const EngineParams& params, const SweepOptions& opts) {
  const Spectrum sp = solve_exact(model);
  if (level_index < 0 || level_index >= static_cast<int>(sp.level_count()))
    throw std::invalid_argument("excited_search: level index out of range");
  ExcitedSearchResult out;
  out.target_energy = sp.energy(level_index);
  out.n_flip = model.required_flips(out.target_energy);
  const OscillatorNetwork net = build_general_fe(model, out.n_flip, params);
  out.records = run_sweep(net, model, opts);
  return out;
}

std::vector<int> flipped_couplings(const NetworkState& state, const OscillatorNetwork& net,
                                   const IsingModel& model) {
  int ctrl = -1;
  std::vector<int> flags;
  for (int i = 0; i < net.size(); ++i) {
    if (net.modes[i].kind == ModeKind::DopoAncillaControl) ctrl = i;
    if (net.modes[i].kind == ModeKind::DopoAncillaFlag) flags.push_back(i);
  }
  if (ctrl < 0 || static_cast<int>(flags.size()) != model.coupling_count())
    throw std::invalid_argument("flipped_couplings: network is not a general-flip network");
  std::vector<int> out;
  const double rc = state.amplitudes[ctrl].real();
  for (int k = 0; k < model.coupling_count(); ++k) {
    if (state.amplitudes[flags[k]].real() * rc < 0) out.push_back(k);
  }
  return out;
}

namespace {

void append_double(std::string& s, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  s += buf;
}

}  // namespace

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << "# fecim-sweep v1\n";
  os << "seed,energy,mean_amp,fluctuation,log10_fluctuation,accepted,spins\n";
  for (const auto& r : records) {
    std::string line = std::to_string(r.seed);
    line += ',';
    append_double(line, r.ising_energy);
    line += ',';
    append_double(line, r.mean_amp);
    line += ',';
    append_double(line, r.fluctuation);
    line += ',';
    const double lf = r.fluctuation > 0 ? std::log10(r.fluctuation)
                                        : -std::numeric_limits<double>::infinity();
    append_double(line, lf);
    line += ',';
    line += r.accepted ? '1' : '0';
    line += ',';
    line += r.status == RecordStatus::Diverged ? std::string("-") : r.spins.to_string();
    line += '\n';
    os << line;
  }
}

SweepSummary summarize(const std::vector<SweepRecord>& records) {
  SweepSummary s;
  s.n_samples = static_cast<int>(records.size());
  for (const auto& r : records) {
    if (r.accepted) {
      ++s.n_accepted;
      if (!s.best_accepted_energy || r.ising_energy < *s.best_accepted_energy)
        s.best_accepted_energy = r.ising_energy;
    }
    if (r.status == RecordStatus::Ok && r.fluctuation > 0) {
      const double lf = std::log10(r.fluctuation);
      if (!s.min_log10_fluctuation || lf < *s.min_log10_fluctuation)
        s.min_log10_fluctuation = lf;
    }
  }
  return s;
}

}  // namespace cim
