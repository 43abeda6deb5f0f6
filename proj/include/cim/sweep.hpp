// Solution-search sweeps: random initial conditions, spin readout, the
// amplitude-inhomogeneity error metric, and acceptance classification.
#pragma once

#include <iosfwd>
#include <optional>

#include "cim/builders.hpp"
#include "cim/engine.hpp"
#include "cim/ising.hpp"

namespace cim {

struct AmplitudeStats {
  double mean_amp = 0.0;    // mean |A| over every mode of the network
  double fluctuation = 0.0; // sum of (|A| - mean)^2 over every mode
};

AmplitudeStats amplitude_stats(std::span<const cxd> amplitudes);

class ReadoutUndecided : public std::runtime_error {
 public:
  explicit ReadoutUndecided(int mode)
      : std::runtime_error("readout undecided on mode " + std::to_string(mode)), mode_(mode) {}
  int mode() const { return mode_; }

 private:
  int mode_;
};

// Spin n = sign of Re(A_n) for the signal modes. Throws ReadoutUndecided when
// any |Re(A_n)| falls below the floor.
SpinConfig readout(const NetworkState& state, const OscillatorNetwork& net,
                   double floor = 1e-9);

enum class RecordStatus { Ok, Undecided, Diverged };

struct SweepRecord {
  uint64_t seed = 0;  // per-sample derived seed
  SpinConfig spins;
  double ising_energy = 0.0;
  double mean_amp = 0.0;
  double fluctuation = 0.0;
  bool accepted = false;
  RecordStatus status = RecordStatus::Ok;
};

struct SweepOptions {
  int n_samples = 1;
  uint64_t seed = 1;
  PumpSchedule schedule = PumpSchedule::ramp_then_hold(2.0, 50.0, 50.0);
  IntegrateOptions integ;
  // Accepted iff F < acceptance_ratio * mean^2 * mode_count (a per-mode,
  // amplitude-scale-invariant cutoff).
  double acceptance_ratio = 1e-4;
  // Runs ending with any |Re(signal)| below max(undecided_abs, undecided_rel * mean)
  // are classified undecided and rejected.
  double undecided_abs = 1e-9;
  double undecided_rel = 1e-9;
};

bool record_accepted(const AmplitudeStats& stats, int mode_count, double acceptance_ratio);

// Independent per-sample streams derived from (seed, sample index); records
// are returned in sample order regardless of thread count.
std::vector<SweepRecord> run_sweep(const OscillatorNetwork& net, const IsingModel& model,
                                   const SweepOptions& opts);
std::vector<SweepRecord> run_sweep_serial(const OscillatorNetwork& net, const IsingModel& model,
                                          const SweepOptions& opts);

// Draws the initial state for one sample: per mode, independent complex
// amplitudes uniform on the disk of radius 0.1 * sqrt(p_max / gamma_d).
NetworkState draw_initial_state(const OscillatorNetwork& net, const PumpSchedule& schedule,
                                uint64_t sample_seed);

struct ExcitedSearchResult {
  double target_energy = 0.0;
  int n_flip = 0;
  std::vector<SweepRecord> records;
};

// Targets the given spectrum level: computes the flip budget, builds the
// general flip network, and sweeps.
ExcitedSearchResult excited_search(const IsingModel& model, int level_index,
                                   const EngineParams& params, const SweepOptions& opts);

// Diagnostic: couplings whose flag mode sits anti-aligned with the control
// mode (those are the flipped couplings in any dark configuration).
std::vector<int> flipped_couplings(const NetworkState& state, const OscillatorNetwork& net,
                                   const IsingModel& model);

// CSV export. Columns: seed,energy,mean_amp,fluctuation,log10_fluctuation,accepted,spins.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records);

struct SweepSummary {
  int n_samples = 0;
  int n_accepted = 0;
  std::optional<double> best_accepted_energy;
  std::optional<double> min_log10_fluctuation;
};

SweepSummary summarize(const std::vector<SweepRecord>& records);

}  // namespace cim
