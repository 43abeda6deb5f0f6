#include "cim/delayline.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cim {

SplitterParams::SplitterParams(double reflection) : r(reflection) {
  if (!(r >= 0.0) || r >= 1.0)
    throw std::invalid_argument("SplitterParams: reflection must be in [0, 1)");
  t = std::sqrt(1.0 - r * r);
}

SinglePassFields single_pass(const SplitterParams& p, cxd a1, cxd a2, cxd b_in) {
  const double T = p.t, R = p.r;
  SinglePassFields out;
  out.a1 = T * a1 - R * b_in;
  out.a2 = T * a2 - R * T * b_in - R * R * a1;
  out.b_out = T * T * b_in + R * T * a1 + R * a2;
  return out;
}

std::pair<cxd, cxd> double_pass(const SplitterParams& p, cxd a1, cxd a2) {
  const double T = p.t, R = p.r;
  // Forward pass with vacuum b_in, then the opposite-order pass with vacuum
  // b_in_op.
  const SinglePassFields f = single_pass(p, a1, a2, 0.0);
  const cxd a2pp = T * f.a2;
  const cxd a1pp = T * f.a1 - R * R * f.a2;
  return {a1pp, a2pp};
}

DoublePassCoefficients double_pass_coefficients(const SplitterParams& p) {
  const double T = p.t, R = p.r;
  DoublePassCoefficients c;
  c.dark = T * (T + R * R);
  c.bright = T * (T - R * R);
  // a1'' - a2'' = dark*(a1 - a2) + R^4 a1; split the leftover R^4 a1 evenly
  // between the dark and bright combinations.
  c.cross = 0.5 * R * R * R * R;
  return c;
}

DoublePassCoefficients single_direction_coefficients(const SplitterParams& p) {
  const double T = p.t, R = p.r;
  DoublePassCoefficients c;
  c.dark = T + 0.5 * R * R;
  c.bright = T - 0.5 * R * R;
  c.cross = 0.5 * R * R;
  return c;
}

namespace {

DarkOrderReport check_coefficients(const std::vector<double>& r_values,
                                   DoublePassCoefficients (*coeffs)(const SplitterParams&),
                                   bool per_pass_pair) {
  DarkOrderReport rep;
  for (double r : r_values) {
    if (!(r > 0.0) || r > 0.3)
      throw std::invalid_argument("verify_dark_order: r must lie in (0, 0.3]");
    const SplitterParams p(r);
    const DoublePassCoefficients c = coeffs(p);
    DarkOrderRow row;
    row.r = r;
    row.dark_deviation = std::abs(c.dark - 1.0);
    const double intensity_loss = 1.0 - c.bright * c.bright;
    row.bright_loss = per_pass_pair ? 0.5 * intensity_loss : intensity_loss;
    row.cross_coupling = c.cross;
    const double r2 = r * r, r4 = r2 * r2;
    row.pass = row.dark_deviation <= r4 && row.bright_loss >= 1.5 * r2 &&
               row.bright_loss <= 2.5 * r2 && row.cross_coupling <= r4;
    if (!row.pass && rep.pass) {
      rep.pass = false;
      std::ostringstream msg;
      msg << "r = " << r << ": dark_dev = " << row.dark_deviation
          << ", bright_loss = " << row.bright_loss << ", cross = " << row.cross_coupling;
      rep.failure = msg.str();
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace

DarkOrderReport verify_dark_order(const std::vector<double>& r_values) {
  return check_coefficients(r_values, &double_pass_coefficients, true);
}

DarkOrderReport verify_dark_order_single_direction(const std::vector<double>& r_values) {
  return check_coefficients(r_values, &single_direction_coefficients, false);
}

PortSchedule compile_multiport(const IsingModel& model, const PhaseMap& phases) {
  if (static_cast<int>(phases.size()) != model.coupling_count())
    throw std::invalid_argument("compile_multiport: missing phase for a coupling");
  PortSchedule sched;
  for (int k = 0; k < model.coupling_count(); ++k) {
    const auto& c = model.couplings()[k];
    sched.entries.push_back(
        {k, c.n + 1, c.m + 1, phases[k], c.sign, PortSchedule::Direction::Forward});
  }
  for (int k = 0; k < model.coupling_count(); ++k) {
    const auto& c = model.couplings()[k];
    sched.entries.push_back(
        {k, c.n + 1, c.m + 1, phases[k], c.sign, PortSchedule::Direction::Backward});
  }
  return sched;
}

std::pair<std::vector<cxd>, std::vector<cxd>> reconstruct_channels(const PortSchedule& schedule,
                                                                   int n_signals) {
  std::vector<cxd> fwd(n_signals + 1, 0.0), bwd(n_signals + 1, 0.0);
  for (const auto& e : schedule.entries) {
    if (e.pulse_n < 1 || e.pulse_n > n_signals || e.pulse_m < 1 || e.pulse_m > n_signals)
      throw std::invalid_argument("reconstruct_channels: pulse id out of range");
    const bool forward = e.direction == PortSchedule::Direction::Forward;
    const cxd rot = std::polar(1.0, forward ? e.phase : -e.phase);
    auto& coeff = forward ? fwd : bwd;
    coeff[e.pulse_n - 1] += rot;
    coeff[e.pulse_m - 1] += rot * static_cast<double>(e.sign);
  }
  fwd[n_signals] = 2.0;
  bwd[n_signals] = 2.0;
  return {fwd, bwd};
}

void write_port_schedule(std::ostream& os, const PortSchedule& schedule) {
  os << "# fecim-delayline v1\n";
  os << "coupling,pulse_n,pulse_m,phase_over_pi,sign,direction\n";
  char buf[128];
  for (const auto& e : schedule.entries) {
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%.12g,%+d,%s\n", e.coupling, e.pulse_n, e.pulse_m,
                  e.phase / std::numbers::pi, e.sign,
                  e.direction == PortSchedule::Direction::Forward ? "forward" : "backward");
    os << buf;
  }
}

PortSchedule read_port_schedule(std::istream& is) {
  PortSchedule sched;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("coupling,", 0) == 0) continue;
    std::istringstream ls(line);
    PortSchedule::Entry e;
    std::string dir;
    char comma;
    double phase_over_pi = 0.0;
    ls >> e.coupling >> comma >> e.pulse_n >> comma >> e.pulse_m >> comma >> phase_over_pi >>
        comma >> e.sign >> comma;
    std::getline(ls, dir);
    if (!ls && dir.empty()) throw std::runtime_error("read_port_schedule: malformed line: " + line);
    e.phase = phase_over_pi * std::numbers::pi;
    if (dir == "forward")
      e.direction = PortSchedule::Direction::Forward;
    else if (dir == "backward")
      e.direction = PortSchedule::Direction::Backward;
    else
      throw std::runtime_error("read_port_schedule: bad direction: " + dir);
    sched.entries.push_back(e);
  }
  return sched;
}

}  // namespace cim
