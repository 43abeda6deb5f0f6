// Semiclassical oscillator networks: mode registry, dissipative channels with
// complex mode coefficients, engine parameters, and pump schedules.
#pragma once

#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cim {

using cxd = std::complex<double>;

enum class ModeKind {
  DopoSignal,
  DopoAncillaControl,  // b_control
  DopoAncillaFlag,     // b_{n,m}
  NdopoIdler,          // a_ani
  NdopoSignal,         // a_ans
};

inline bool is_ndopo(ModeKind k) { return k == ModeKind::NdopoIdler || k == ModeKind::NdopoSignal; }

struct ModeSpec {
  ModeKind kind = ModeKind::DopoSignal;
  int partner = -1;  // NDOPO modes: index of the paired idler/signal mode
};

// Linear loss channel L = sum_k c_k a_k at the given rate. The mean-field
// force it exerts on mode i is -rate * scale_i * conj(c_i) * <L>, with
// scale_i = 1 unless overridden (the general-flip control channel doubles the
// force on the control mode; the channel value itself is unaffected).
struct DissipativeChannel {
  struct Entry {
    int mode;
    cxd coeff;
  };
  struct ForceScale {
    int mode;
    double factor;
  };

  std::vector<Entry> coefficients;
  double rate = 0.0;
  std::vector<ForceScale> force_scale;

  template <typename State>
  cxd value(const State& amplitudes) const {
    cxd v = 0.0;
    for (const auto& e : coefficients) v += e.coeff * amplitudes[e.mode];
    return v;
  }

  double scale_for(int mode) const {
    for (const auto& s : force_scale)
      if (s.mode == mode) return s.factor;
    return 1.0;
  }
};

struct EngineParams {
  double gamma_s = 0.0;   // single-photon loss on DOPO modes
  double gamma_d = 1.0;   // two-photon saturation (DOPO and NDOPO)
  double gamma_c = 1.0;   // collective-loss rate unit consumed by the builders
  double omega_fb = 0.0;  // measurement-feedback gain

  void validate() const {
    if (gamma_s < 0 || gamma_c < 0 || omega_fb < 0)
      throw std::invalid_argument("EngineParams: rates must be nonnegative");
    if (!(gamma_d > 0)) throw std::invalid_argument("EngineParams: gamma_d must be positive");
  }
};

struct PumpSchedule {
  enum class Shape { Constant, LinearRampThenHold };

  Shape shape = Shape::LinearRampThenHold;
  double p_max = 2.0;
  double t_ramp = 50.0;
  double t_hold = 50.0;

  static PumpSchedule constant(double p, double t_hold) {
    PumpSchedule s;
    s.shape = Shape::Constant;
    s.p_max = p;
    s.t_ramp = 0.0;
    s.t_hold = t_hold;
    if (t_hold < 0) throw std::invalid_argument("PumpSchedule: negative duration");
    return s;
  }

  static PumpSchedule ramp_then_hold(double p_max, double t_ramp, double t_hold) {
    PumpSchedule s;
    s.shape = Shape::LinearRampThenHold;
    s.p_max = p_max;
    s.t_ramp = t_ramp;
    s.t_hold = t_hold;
    if (t_ramp < 0 || t_hold < 0) throw std::invalid_argument("PumpSchedule: negative duration");
    return s;
  }

  double value(double t) const {
    if (shape == Shape::Constant) return p_max;
    if (t <= 0) return 0.0;
    if (t >= t_ramp) return p_max;
    return p_max * (t / t_ramp);
  }

  double duration() const { return t_ramp + t_hold; }
};

// Measurement-feedback backend: couplings enter as a computed pump on the
// real quadrature instead of optical loss channels.
struct FeedbackCoupling {
  int n_modes = 0;
  std::vector<double> signs;  // row-major n x n, entries in {-1, 0, +1}
  double omega = 0.0;

  double sign(int n, int m) const { return signs[static_cast<size_t>(n) * n_modes + m]; }
};

struct OscillatorNetwork {
  std::vector<ModeSpec> modes;
  std::vector<std::string> mode_names;
  std::vector<DissipativeChannel> channels;
  EngineParams params;
  int signal_count = 0;
  std::optional<FeedbackCoupling> feedback;

  int size() const { return static_cast<int>(modes.size()); }

  void validate() const {
    params.validate();
    for (int i = 0; i < size(); ++i) {
      const auto& m = modes[i];
      if (is_ndopo(m.kind)) {
        if (m.partner < 0 || m.partner >= size() || modes[m.partner].partner != i ||
            modes[m.partner].kind == m.kind || !is_ndopo(modes[m.partner].kind))
          throw std::invalid_argument("OscillatorNetwork: unpaired NDOPO mode");
      }
    }
    for (const auto& ch : channels) {
      if (ch.coefficients.empty())
        throw std::invalid_argument("OscillatorNetwork: channel with no coefficients");
      bool nonzero = false;
      for (const auto& e : ch.coefficients) {
        if (e.mode < 0 || e.mode >= size())
          throw std::invalid_argument("OscillatorNetwork: channel mode out of range");
        if (!std::isfinite(e.coeff.real()) || !std::isfinite(e.coeff.imag()))
          throw std::invalid_argument("OscillatorNetwork: non-finite channel coefficient");
        if (std::abs(e.coeff) > 0) nonzero = true;
      }
      if (!nonzero) throw std::invalid_argument("OscillatorNetwork: all-zero channel");
      if (ch.rate < 0) throw std::invalid_argument("OscillatorNetwork: negative channel rate");
    }
  }
};

struct NetworkState {
  std::vector<cxd> amplitudes;
  double time = 0.0;
};

}  // namespace cim
