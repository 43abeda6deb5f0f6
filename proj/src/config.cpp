#include "cim/config.hpp"

#include <charconv>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

namespace cim {

namespace {

struct Item {
  std::string key;
  std::vector<std::string> tokens;
  int line;
};

std::vector<Item> tokenize(std::istream& is) {
  std::vector<Item> items;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string eq;
    if (!(ls >> eq) || eq != "=") throw ConfigError(lineno, "expected 'key = value'");
    Item item{key, {}, lineno};
    std::string tok;
    while (ls >> tok) item.tokens.push_back(tok);
    if (item.tokens.empty()) throw ConfigError(lineno, "missing value for '" + key + "'");
    items.push_back(std::move(item));
  }
  return items;
}

double to_double(const Item& it, const std::string& tok) {
  try {
    size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(it.line, "expected a number, got '" + tok + "'");
  }
}

long long to_int(const Item& it, const std::string& tok) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(it.line, "expected an integer, got '" + tok + "'");
  }
}

void expect_tokens(const Item& it, size_t n) {
  if (it.tokens.size() != n)
    throw ConfigError(it.line, "expected " + std::to_string(n) + " value(s) for '" + it.key + "'");
}

}  // namespace

RunConfig parse_run_config(std::istream& is) {
  const std::vector<Item> items = tokenize(is);

  int n_spins = 0;
  std::vector<Coupling> couplings;
  double j_mag = 1.0;
  bool have_generator = false, have_inline = false;
  int generator_n = 0;

  RunConfig cfg;
  std::map<std::pair<int, int>, double> phase_entries;
  double p_max = 2.0, t_ramp = 50.0, t_hold = 50.0;
  std::string shape = "linear_ramp_then_hold";

  for (const auto& it : items) {
    const std::string& k = it.key;
    if (k == "model.generator") {
      expect_tokens(it, 2);
      if (it.tokens[0] != "afm_complete")
        throw ConfigError(it.line, "unknown generator '" + it.tokens[0] + "'");
      generator_n = static_cast<int>(to_int(it, it.tokens[1]));
      have_generator = true;
    } else if (k == "model.n_spins") {
      expect_tokens(it, 1);
      n_spins = static_cast<int>(to_int(it, it.tokens[0]));
      have_inline = true;
    } else if (k == "model.coupling") {
      expect_tokens(it, 3);
      Coupling c;
      c.n = static_cast<int>(to_int(it, it.tokens[0])) - 1;  // file format is 1-based
      c.m = static_cast<int>(to_int(it, it.tokens[1])) - 1;
      c.sign = static_cast<int>(to_int(it, it.tokens[2]));
      couplings.push_back(c);
      have_inline = true;
    } else if (k == "model.j") {
      expect_tokens(it, 1);
      j_mag = to_double(it, it.tokens[0]);
    } else if (k == "scheme") {
      expect_tokens(it, 1);
      const std::string& s = it.tokens[0];
      if (s == "plain")
        cfg.scheme = Scheme::Plain;
      else if (s == "hyperspin")
        cfg.scheme = Scheme::Hyperspin;
      else if (s == "general_fe")
        cfg.scheme = Scheme::GeneralFe;
      else if (s == "feedback")
        cfg.scheme = Scheme::Feedback;
      else
        throw ConfigError(it.line, "unknown scheme '" + s + "'");
    } else if (k == "n_flip") {
      expect_tokens(it, 1);
      cfg.n_flip = static_cast<int>(to_int(it, it.tokens[0]));
    } else if (k == "engine.gamma_s") {
      expect_tokens(it, 1);
      cfg.engine.gamma_s = to_double(it, it.tokens[0]);
    } else if (k == "engine.gamma_d") {
      expect_tokens(it, 1);
      cfg.engine.gamma_d = to_double(it, it.tokens[0]);
    } else if (k == "engine.gamma_c") {
      expect_tokens(it, 1);
      cfg.engine.gamma_c = to_double(it, it.tokens[0]);
    } else if (k == "engine.omega_fb") {
      expect_tokens(it, 1);
      cfg.engine.omega_fb = to_double(it, it.tokens[0]);
    } else if (k == "schedule.shape") {
      expect_tokens(it, 1);
      shape = it.tokens[0];
      if (shape != "constant" && shape != "linear_ramp_then_hold")
        throw ConfigError(it.line, "unknown schedule shape '" + shape + "'");
    } else if (k == "schedule.p_max") {
      expect_tokens(it, 1);
      p_max = to_double(it, it.tokens[0]);
    } else if (k == "schedule.t_ramp") {
      expect_tokens(it, 1);
      t_ramp = to_double(it, it.tokens[0]);
    } else if (k == "schedule.t_hold") {
      expect_tokens(it, 1);
      t_hold = to_double(it, it.tokens[0]);
    } else if (k == "integ.rtol") {
      expect_tokens(it, 1);
      cfg.integ.rtol = to_double(it, it.tokens[0]);
    } else if (k == "integ.atol") {
      expect_tokens(it, 1);
      cfg.integ.atol = to_double(it, it.tokens[0]);
    } else if (k == "sweep.samples") {
      expect_tokens(it, 1);
      cfg.n_samples = static_cast<int>(to_int(it, it.tokens[0]));
    } else if (k == "seed") {
      expect_tokens(it, 1);
      cfg.seed = static_cast<uint64_t>(to_int(it, it.tokens[0]));
    } else if (k == "out") {
      expect_tokens(it, 1);
      cfg.out_path = it.tokens[0];
    } else if (k == "acceptance_ratio") {
      expect_tokens(it, 1);
      cfg.acceptance_ratio = to_double(it, it.tokens[0]);
    } else if (k.rfind("phase.", 0) == 0) {
      // phase.N_M = value in multiples of pi
      expect_tokens(it, 1);
      const std::string pair = k.substr(6);
      const auto us = pair.find('_');
      if (us == std::string::npos) throw ConfigError(it.line, "phase key must be phase.N_M");
      const int a = static_cast<int>(to_int(it, pair.substr(0, us))) - 1;
      const int b = static_cast<int>(to_int(it, pair.substr(us + 1))) - 1;
      phase_entries[{std::min(a, b), std::max(a, b)}] =
          to_double(it, it.tokens[0]) * std::numbers::pi;
    } else if (k == "quantum.alpha_sq") {
      expect_tokens(it, 1);
      cfg.quantum.alpha_sq = to_double(it, it.tokens[0]);
    } else if (k == "quantum.gamma") {
      expect_tokens(it, 1);
      cfg.quantum.gamma = to_double(it, it.tokens[0]);
    } else if (k == "quantum.gamma_c_ratio") {
      expect_tokens(it, 1);
      cfg.quantum.gamma_c_ratio = to_double(it, it.tokens[0]);
    } else if (k == "quantum.cutoff") {
      expect_tokens(it, 1);
      cfg.quantum.cutoff = static_cast<int>(to_int(it, it.tokens[0]));
    } else if (k == "quantum.total_cap") {
      expect_tokens(it, 1);
      cfg.quantum.total_cap = static_cast<int>(to_int(it, it.tokens[0]));
    } else if (k == "quantum.n_traj") {
      expect_tokens(it, 1);
      cfg.quantum.n_traj = static_cast<int>(to_int(it, it.tokens[0]));
    } else if (k == "quantum.t_ramp") {
      expect_tokens(it, 1);
      cfg.quantum.t_ramp = to_double(it, it.tokens[0]);
    } else if (k == "quantum.t_hold") {
      expect_tokens(it, 1);
      cfg.quantum.t_hold = to_double(it, it.tokens[0]);
    } else if (k == "quantum.dt_max") {
      expect_tokens(it, 1);
      cfg.quantum.dt_max = to_double(it, it.tokens[0]);
    } else if (k == "quantum.precision") {
      expect_tokens(it, 1);
      if (it.tokens[0] == "double")
        cfg.quantum.precision = Precision::Double;
      else if (it.tokens[0] == "single")
        cfg.quantum.precision = Precision::Single;
      else
        throw ConfigError(it.line, "quantum.precision must be 'double' or 'single'");
    } else if (k == "quantum.dark_initial") {
      expect_tokens(it, 1);
      cfg.quantum.dark_initial = to_int(it, it.tokens[0]) != 0;
    } else if (k.rfind("assignment.", 0) == 0) {
      expect_tokens(it, 2);
      cfg.assignment[k.substr(11)] =
          cxd(to_double(it, it.tokens[0]), to_double(it, it.tokens[1]));
    } else {
      throw ConfigError(it.line, "unknown key '" + k + "'");
    }
  }

  if (have_generator && have_inline)
    throw ConfigError(1, "model.generator and inline model keys are mutually exclusive");
  try {
    if (have_generator) {
      cfg.model = IsingModel::all_to_all_afm(generator_n, j_mag);
    } else if (have_inline) {
      cfg.model = IsingModel(n_spins, couplings, j_mag);
    } else {
      throw std::invalid_argument("no model given (model.generator or model.n_spins/model.coupling)");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(1, e.what());
  }

  if (!phase_entries.empty()) {
    PhaseMap phases(cfg.model.coupling_count(), 0.0);
    std::vector<bool> seen(cfg.model.coupling_count(), false);
    for (const auto& [pair, value] : phase_entries) {
      const int idx = cfg.model.coupling_index(pair.first, pair.second);
      phases[idx] = value;
      seen[idx] = true;
    }
    for (size_t i = 0; i < seen.size(); ++i)
      if (!seen[i]) throw ConfigError(1, "phase map incomplete: missing a coupling phase");
    cfg.phases = std::move(phases);
  }

  cfg.schedule = shape == "constant" ? PumpSchedule::constant(p_max, t_hold)
                                     : PumpSchedule::ramp_then_hold(p_max, t_ramp, t_hold);

  if (cfg.n_samples < 1) throw ConfigError(1, "sweep.samples must be >= 1");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  return parse_run_config(f);
}

}  // namespace cim
