// Run configuration: a line-based key = value format with dotted keys.
// Unknown keys are errors; `model.coupling` may repeat.
#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "cim/engine.hpp"
#include "cim/sweep.hpp"
#include "cim/trajectory.hpp"

namespace cim {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error("config line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class Scheme { Plain, Hyperspin, GeneralFe, Feedback };

struct QuantumConfig {
  double alpha_sq = 2.0;
  double gamma = 1.0;          // two-photon rates of both mode families
  double gamma_c_ratio = 3.0;  // collective rate in units of gamma
  int cutoff = -1;             // -1: default formula
  int total_cap = -2;          // -2: default formula, -1: no cap
  int n_traj = 200;
  double t_ramp = 20.0;        // in units of 1/gamma
  double t_hold = 30.0;
  double dt_max = 0.01;
  Precision precision = Precision::Double;
  bool dark_initial = false;   // start from the dark state instead of vacuum
};

struct RunConfig {
  IsingModel model{1, {}};
  Scheme scheme = Scheme::GeneralFe;
  int n_flip = -1;  // general_fe only
  EngineParams engine;
  PumpSchedule schedule = PumpSchedule::ramp_then_hold(2.0, 50.0, 50.0);
  IntegrateOptions integ;
  int n_samples = 1;
  uint64_t seed = 1;
  std::string out_path;
  double acceptance_ratio = 1e-4;
  std::optional<PhaseMap> phases;  // hyperspin; defaults when absent
  QuantumConfig quantum;
  std::map<std::string, cxd> assignment;  // check-dark input, keyed by mode name

  PhaseMap phases_or_default() const {
    return phases ? *phases : default_phases(model);
  }
};

RunConfig parse_run_config(std::istream& is);
RunConfig load_run_config(const std::string& path);

}  // namespace cim
