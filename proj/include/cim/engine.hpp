// Mean-field equations of motion and their integrator.
//
// Per mode, with pump value p = schedule(t):
//   DOPO (signal or ancilla):  dA/dt = p A* - gamma_s A - gamma_d A |A|^2 - forces
//   NDOPO (idler/signal pair): dA/dt = p B* - gamma_d A |B|^2 - forces,  B = partner
// where each channel L with rate g contributes -g * scale_i * conj(c_i) * <L>
// to mode i, and the feedback backend adds -Omega * sum_m sign(J_nm) * 2 Re(A_m)
// on the real quadrature of signal mode n.
#pragma once

#include <span>

#include "cim/network.hpp"

namespace cim {

// Writes the full right-hand side for the given amplitudes and pump value.
void network_rhs(const OscillatorNetwork& net, double pump_value,
                 std::span<const cxd> amplitudes, std::span<cxd> out);

// Max-norm of the right-hand side; a steady-state diagnostic.
double fixed_point_residual(const OscillatorNetwork& net, const NetworkState& state,
                            double pump_value);

enum class IntegratorMethod { AdaptiveRk45, FixedRk4 };
enum class IntegrateStatus { Ok, Diverged };

struct IntegrateOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_init = 1e-3;
  double fixed_dt = 1e-3;     // FixedRk4 only
  double sample_dt = 0.0;     // 0: record no intermediate samples
  IntegratorMethod method = IntegratorMethod::AdaptiveRk45;
};

struct IntegrationResult {
  NetworkState final_state;
  IntegrateStatus status = IntegrateStatus::Ok;
  std::vector<NetworkState> samples;  // includes the final state when sampling
  uint64_t n_steps = 0;
};

IntegrationResult integrate(const OscillatorNetwork& net, const NetworkState& initial,
                            const PumpSchedule& schedule, double t_end,
                            const IntegrateOptions& opts = {});

}  // namespace cim
