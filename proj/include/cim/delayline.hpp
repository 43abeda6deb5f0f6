// Beam-splitter transfer algebra of open-port delay lines and the compiler
// from coupling sets to multi-port delay-line schedules.
#pragma once

#include <iosfwd>
#include <string>

#include "cim/builders.hpp"

namespace cim {

struct SplitterParams {
  double r = 0.0;  // reflection amplitude, in [0, 1)
  double t = 1.0;  // transmission amplitude sqrt(1 - r^2)

  explicit SplitterParams(double reflection);
};

struct SinglePassFields {
  cxd a1, a2, b_out;
};

// Two sequential scatterings of the delay-line field against pulses 1 and 2.
SinglePassFields single_pass(const SplitterParams& p, cxd a1, cxd a2, cxd b_in);

struct DoublePassCoefficients {
  double dark;    // T(T + R^2) on (a1 - a2)
  double bright;  // T(T - R^2) on (a1 + a2)
  double cross;   // leakage of the bright mode into (a1 - a2)
};

DoublePassCoefficients double_pass_coefficients(const SplitterParams& p);

// Forward+backward pass with vacuum input ports.
std::pair<cxd, cxd> double_pass(const SplitterParams& p, cxd a1, cxd a2);

// The single-direction line for comparison: its "dark" combination keeps an
// O(R^2) coupling to the bright mode, which is what the second pass removes.
DoublePassCoefficients single_direction_coefficients(const SplitterParams& p);

struct DarkOrderRow {
  double r;
  double dark_deviation;   // |dark - 1|
  double bright_loss;      // intensity loss per pass of the bright mode
  double cross_coupling;   // dark <- bright leakage amplitude
  bool pass;
};

struct DarkOrderReport {
  std::vector<DarkOrderRow> rows;
  bool pass = true;
  std::string failure;  // first offending r, when any
};

// Asserts, for each r in (0, 0.3]: |dark - 1| <= r^4, bright intensity loss
// per pass within [1.5 r^2, 2.5 r^2], and cross coupling <= r^4.
DarkOrderReport verify_dark_order(const std::vector<double>& r_values);
DarkOrderReport verify_dark_order_single_direction(const std::vector<double>& r_values);

struct PortSchedule {
  enum class Direction { Forward, Backward };
  struct Entry {
    int coupling = 0;  // index into the model's coupling list
    int pulse_n = 0;   // 1-based pulse ids
    int pulse_m = 0;
    double phase = 0.0;
    int sign = +1;
    Direction direction = Direction::Forward;
  };
  std::vector<Entry> entries;
};

// One forward and one backward entry per coupling, carrying the modulator
// phase. Rebuilding the channel coefficient vectors from the schedule
// reproduces the conjugate channel pair exactly.
PortSchedule compile_multiport(const IsingModel& model, const PhaseMap& phases);

// Coefficient vectors (signals..., ancilla) reconstructed from the schedule;
// first = forward direction (idler channel), second = backward (signal).
std::pair<std::vector<cxd>, std::vector<cxd>> reconstruct_channels(const PortSchedule& schedule,
                                                                   int n_signals);

// Text format: phase exported in multiples of pi.
void write_port_schedule(std::ostream& os, const PortSchedule& schedule);
PortSchedule read_port_schedule(std::istream& is);

}  // namespace cim
