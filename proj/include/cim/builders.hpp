// Compile Ising instances into oscillator networks.
#pragma once

#include <vector>

#include "cim/ising.hpp"
#include "cim/network.hpp"

namespace cim {

// One phase per coupling, aligned with model.couplings(). Phases must be
// pairwise distinct so each coupling gets its own effective rotation.
using PhaseMap = std::vector<double>;

// The 3-mode all-to-all triangle keeps the reference values (0, pi/2 on the
// {2,3} pair, pi/4 on the {1,3} pair); other single-flip models get
// k*pi/(2*Nc) for coupling index k.
PhaseMap default_phases(const IsingModel& model);

// Plain CIM: one collective-loss channel a_n + sign*a_m per coupling, at rate
// gamma_c each. Frustrated instances have no dark state in this form.
OscillatorNetwork build_plain(const IsingModel& model, const EngineParams& params);

// Single shared hyperspin ancilla (one NDOPO pair). Emits the conjugate
// channel pair with coefficient e^{+-i phi} on each signal term and 2 on the
// ancilla, each at rate gamma_c. Requires the single-flip regime.
OscillatorNetwork build_hyperspin(const IsingModel& model, const PhaseMap& phases,
                                  const EngineParams& params);

// General flip scheme: per coupling one flag mode and one NDOPO pair, plus a
// shared control mode (3*Nc + 1 ancillas in total). The per-coupling channel
// pair carries +-i on (b_control + b_flag) and 2 on the NDOPO mode, at rate
// gamma_c/2 each; the control channel sums the flags with weight
// (2*n_flip - Nc) on the control mode, at rate gamma_c/2 with the force on
// the control mode doubled.
OscillatorNetwork build_general_fe(const IsingModel& model, int n_flip,
                                   const EngineParams& params);

// Measurement-feedback backend: no coupling channels; the Ising signs enter
// as a computed pump with gain omega_fb.
OscillatorNetwork build_feedback(const IsingModel& model, const EngineParams& params);

}  // namespace cim
