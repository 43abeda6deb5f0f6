// Dark-state algebra on multimode coherent states: component construction for
// single-flip models, Gram-matrix normalisation of the superposition, and the
// coherence-vs-projection readout probabilities.
#pragma once

#include <utility>

#include "cim/fock.hpp"

namespace cim {

// Eigenvalue of a linear loss channel on a coherent product state.
cxd channel_residual(const DissipativeChannel& channel, std::span<const cxd> assignment);

struct DarkComponent {
  int label = 0;                 // 1-based
  SpinConfig signal_config;
  std::vector<cxd> assignment;   // (signals..., a_ani, a_ans), real-axis convention
  int unsatisfied_coupling = -1;
};

// One component per degenerate ground configuration. Each ground state of a
// single-flip model leaves exactly one coupling unsatisfied; the ancilla pair
// is set so both conjugate channels vanish, which also pins the pair product
// to alpha^2.
std::vector<DarkComponent> construct_dark_components(const IsingModel& model,
                                                     const PhaseMap& phases, double alpha);

// <beta|alpha> = exp(-(|alpha|^2 + |beta|^2)/2 + conj(beta) alpha), per mode.
cxd coherent_overlap(std::span<const cxd> a, std::span<const cxd> b);

struct GramResult {
  std::vector<cxd> coefficients;  // equal weights 1/norm_constant
  double norm_constant = 0.0;     // sqrt(sum of all Gram entries)
  double delta = 0.0;             // norm_constant - sqrt(component count)
};

GramResult gram_normalize(const std::vector<DarkComponent>& components);

// Equal-weight superposition of the components in the truncated space, with
// the quantum-convention rotation applied (amplitudes times i), normalised
// numerically. This is the reference state for fidelity estimates.
std::vector<cxd> dark_state_vector(const FockBasis& basis,
                                   const std::vector<DarkComponent>& components);

// (p_co, p_projection) = (2 sqrt(n_det) / n_solution, 1 / n_solution).
std::pair<double, double> coherence_advantage(int n_det, int n_solution);

}  // namespace cim
