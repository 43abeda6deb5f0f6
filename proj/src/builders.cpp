#include "cim/builders.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cim {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_afm_triangle(const IsingModel& model) {
  if (model.n_spins() != 3 || model.coupling_count() != 3) return false;
  for (const auto& c : model.couplings())
    if (c.sign != +1) return false;
  return true;
}

std::string pair_suffix(const Coupling& c) {
  return std::to_string(c.n + 1) + "_" + std::to_string(c.m + 1);
}

void check_phases(const IsingModel& model, const PhaseMap& phases) {
  if (static_cast<int>(phases.size()) != model.coupling_count())
    throw std::invalid_argument("hyperspin: phase map incomplete");
  for (size_t i = 0; i < phases.size(); ++i)
    for (size_t k = i + 1; k < phases.size(); ++k)
      if (std::abs(phases[i] - phases[k]) < 1e-12)
        throw std::invalid_argument("hyperspin: phases must be pairwise distinct");
}

}  // namespace

PhaseMap default_phases(const IsingModel& model) {
  const int nc = model.coupling_count();
  PhaseMap phases(nc);
  if (is_afm_triangle(model)) {
    for (int k = 0; k < nc; ++k) {
      const auto& c = model.couplings()[k];
      if (c.n == 0 && c.m == 1) phases[k] = 0.0;
      if (c.n == 1 && c.m == 2) phases[k] = kPi / 2;
      if (c.n == 0 && c.m == 2) phases[k] = kPi / 4;
    }
    return phases;
  }
  for (int k = 0; k < nc; ++k) phases[k] = k * kPi / (2.0 * nc);
  return phases;
}

OscillatorNetwork build_plain(const IsingModel& model, const EngineParams& params) {
  params.validate();
  OscillatorNetwork net;
  net.params = params;
  net.signal_count = model.n_spins();
  for (int i = 0; i < model.n_spins(); ++i) {
    net.modes.push_back({ModeKind::DopoSignal, -1});
    net.mode_names.push_back("a" + std::to_string(i + 1));
  }
  for (const auto& c : model.couplings()) {
    DissipativeChannel ch;
    ch.rate = params.gamma_c;
    ch.coefficients = {{c.n, 1.0}, {c.m, static_cast<double>(c.sign)}};
    net.channels.push_back(std::move(ch));
  }
  net.validate();
  return net;
}

OscillatorNetwork build_hyperspin(const IsingModel& model, const PhaseMap& phases,
                                  const EngineParams& params) {
  params.validate();
  if (model.coupling_count() == 0)
    throw std::invalid_argument("hyperspin: model has no couplings to flip");
  check_phases(model, phases);
  {
    const Spectrum sp = solve_exact(model);
    if (model.required_flips(sp.ground_energy()) != 1)
      throw std::invalid_argument("hyperspin: model is not in the single-flip regime");
  }

  OscillatorNetwork net;
  net.params = params;
  net.signal_count = model.n_spins();
  for (int i = 0; i < model.n_spins(); ++i) {
    net.modes.push_back({ModeKind::DopoSignal, -1});
    net.mode_names.push_back("a" + std::to_string(i + 1));
  }
  const int ani = net.size();
  net.modes.push_back({ModeKind::NdopoIdler, ani + 1});
  net.mode_names.push_back("a_ani");
  const int ans = net.size();
  net.modes.push_back({ModeKind::NdopoSignal, ani});
  net.mode_names.push_back("a_ans");

  DissipativeChannel ch_ani, ch_ans;
  ch_ani.rate = params.gamma_c;
  ch_ans.rate = params.gamma_c;
  std::vector<cxd> coeff_ani(model.n_spins(), 0.0), coeff_ans(model.n_spins(), 0.0);
  for (int k = 0; k < model.coupling_count(); ++k) {
    const auto& c = model.couplings()[k];
    const cxd rot = std::polar(1.0, phases[k]);
    coeff_ani[c.n] += rot;
    coeff_ani[c.m] += rot * static_cast<double>(c.sign);
    coeff_ans[c.n] += std::conj(rot);
    coeff_ans[c.m] += std::conj(rot) * static_cast<double>(c.sign);
  }
  for (int i = 0; i < model.n_spins(); ++i) {
    if (std::abs(coeff_ani[i]) > 0) ch_ani.coefficients.push_back({i, coeff_ani[i]});
    if (std::abs(coeff_ans[i]) > 0) ch_ans.coefficients.push_back({i, coeff_ans[i]});
  }
  ch_ani.coefficients.push_back({ani, 2.0});
  ch_ans.coefficients.push_back({ans, 2.0});
  net.channels.push_back(std::move(ch_ani));
  net.channels.push_back(std::move(ch_ans));
  net.validate();
  return net;
}

OscillatorNetwork build_general_fe(const IsingModel& model, int n_flip,
                                   const EngineParams& params) {
  params.validate();
  const int nc = model.coupling_count();
  if (n_flip < 0 || n_flip > nc)
    throw std::invalid_argument("general_fe: n_flip out of range [0, Nc]");

  OscillatorNetwork net;
  net.params = params;
  net.signal_count = model.n_spins();
  for (int i = 0; i < model.n_spins(); ++i) {
    net.modes.push_back({ModeKind::DopoSignal, -1});
    net.mode_names.push_back("a" + std::to_string(i + 1));
  }

  std::vector<int> flag_idx(nc), ans_idx(nc), ani_idx(nc);
  for (int k = 0; k < nc; ++k) {
    const auto& c = model.couplings()[k];
    flag_idx[k] = net.size();
    net.modes.push_back({ModeKind::DopoAncillaFlag, -1});
    net.mode_names.push_back("b_" + pair_suffix(c));
    ans_idx[k] = net.size();
    net.modes.push_back({ModeKind::NdopoSignal, ans_idx[k] + 1});
    net.mode_names.push_back("ans_" + pair_suffix(c));
    ani_idx[k] = net.size();
    net.modes.push_back({ModeKind::NdopoIdler, ans_idx[k]});
    net.mode_names.push_back("ani_" + pair_suffix(c));
  }
  const int ctrl = net.size();
  net.modes.push_back({ModeKind::DopoAncillaControl, -1});
  net.mode_names.push_back("b_ctrl");

  const cxd iu(0.0, 1.0);
  const double half_rate = params.gamma_c / 2.0;
  for (int k = 0; k < nc; ++k) {
    const auto& c = model.couplings()[k];
    DissipativeChannel ch_ans;
    ch_ans.rate = half_rate;
    ch_ans.coefficients = {{c.n, 1.0},      {c.m, static_cast<double>(c.sign)},
                           {ctrl, iu},      {flag_idx[k], iu},
                           {ans_idx[k], 2.0}};
    net.channels.push_back(std::move(ch_ans));

    DissipativeChannel ch_ani;
    ch_ani.rate = half_rate;
    ch_ani.coefficients = {{c.n, 1.0},      {c.m, static_cast<double>(c.sign)},
                           {ctrl, -iu},     {flag_idx[k], -iu},
                           {ani_idx[k], 2.0}};
    net.channels.push_back(std::move(ch_ani));
  }

  DissipativeChannel ch_ctrl;
  ch_ctrl.rate = half_rate;
  for (int k = 0; k < nc; ++k) ch_ctrl.coefficients.push_back({flag_idx[k], 1.0});
  ch_ctrl.coefficients.push_back({ctrl, static_cast<double>(2 * n_flip - nc)});
  ch_ctrl.force_scale.push_back({ctrl, 2.0});
  net.channels.push_back(std::move(ch_ctrl));

  net.validate();
  return net;
}

OscillatorNetwork build_feedback(const IsingModel& model, const EngineParams& params) {
  params.validate();
  OscillatorNetwork net;
  net.params = params;
  net.signal_count = model.n_spins();
  for (int i = 0; i < model.n_spins(); ++i) {
    net.modes.push_back({ModeKind::DopoSignal, -1});
    net.mode_names.push_back("a" + std::to_string(i + 1));
  }
  FeedbackCoupling fb;
  fb.n_modes = model.n_spins();
  fb.omega = params.omega_fb;
  fb.signs.assign(static_cast<size_t>(fb.n_modes) * fb.n_modes, 0.0);
  for (const auto& c : model.couplings()) {
    fb.signs[static_cast<size_t>(c.n) * fb.n_modes + c.m] = c.sign;
    fb.signs[static_cast<size_t>(c.m) * fb.n_modes + c.n] = c.sign;
  }
  net.feedback = fb;
  net.validate();
  return net;
}

}  // namespace cim
