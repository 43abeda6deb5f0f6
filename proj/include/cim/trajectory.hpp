// Monte-Carlo wave-function unraveling of the network Lindblad dynamics.
//
// The propagator works in a displaced frame: each two-photon pump combines
// with its two-photon loss into a single displaced dissipator (the pump
// Hamiltonian cancels exactly against the displacement compensation), so the
// drift is a pure sum of -(rate/2) L~^dag L~ pieces and the jump operators are
// the displaced L~. Ensemble averages are identical to the plain unraveling;
// on-track jump rates are far lower, which is what sets the step size.
//
// Steps use a Strang split (exact diagonal, explicit midpoint for the
// off-diagonal couplings) with the step bounded by 0.01 / (total jump rate),
// observed from the norm decay. Jumps fire when the squared norm crosses a
// uniform draw; all randomness is per-trajectory, derived from
// (seed, trajectory id).
#pragma once

#include <iosfwd>

#include "cim/fock.hpp"

namespace cim {

enum class Precision { Double, Single };

struct TrajectoryOptions {
  int n_traj = 1;
  uint64_t seed = 1;
  double dt_max = 0.01;          // accuracy-limited step
  double jump_dt_factor = 0.01;  // dt <= jump_dt_factor / (total jump rate)
  double segment_dt = 0.5;       // monitor / step-control cadence
  double top_level_threshold = 1e-3;
  Precision precision = Precision::Double;
  bool keep_states = false;
  const std::vector<cxd>* initial_state = nullptr;  // default: vacuum
};

struct TrajectoryResult {
  int id = 0;
  int jumps = 0;
  bool valid = true;               // false on cutoff overflow
  double boundary_pop = 0.0;       // max population seen on the truncation boundary
  double norm_dev = 0.0;           // max | ||psi||^2 - 1 | right after renormalisation
  uint64_t n_steps = 0;
  std::vector<double> mean_photon; // per mode, final state
  cxd target_overlap = 0.0;        // <target|psi(T)>, when a target was given
  std::vector<cxd> state;          // final state, when keep_states
};

struct TrajectoryEnsemble {
  std::vector<TrajectoryResult> results;
  bool all_valid() const;
};

TrajectoryEnsemble run_trajectories(const FockNetwork& net, const PumpSchedule& pump_s,
                                    double t_end, const TrajectoryOptions& opts,
                                    const std::vector<cxd>* target_state = nullptr);
TrajectoryEnsemble run_trajectories_serial(const FockNetwork& net, const PumpSchedule& pump_s,
                                           double t_end, const TrajectoryOptions& opts,
                                           const std::vector<cxd>* target_state = nullptr);

struct FidelityEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// mean over trajectories of |<target|psi>|^2.
FidelityEstimate fidelity_to_dark(const TrajectoryEnsemble& ensemble);

// Columns: trajectory,jumps,fidelity.
void write_ensemble_csv(std::ostream& os, const TrajectoryEnsemble& ensemble);

// Drift generator applications for validation: the fused kernel against a
// naive composition of the jump operators. Both compute
// [ -i H_residual - (1/2) sum_k rate_k L~_k^dag L~_k ] psi at pump amplitude S.
void apply_drift_reference(const FockNetwork& net, double S, std::span<const cxd> in,
                           std::span<cxd> out);
void apply_drift_fused(const FockNetwork& net, double S, std::span<const cxd> in,
                       std::span<cxd> out);

}  // namespace cim
