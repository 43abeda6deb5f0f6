#include "cim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cim {

void network_rhs(const OscillatorNetwork& net, double pump_value,
                 std::span<const cxd> amplitudes, std::span<cxd> out) {
  const int n = net.size();
  if (static_cast<int>(amplitudes.size()) != n || static_cast<int>(out.size()) != n)
    throw std::invalid_argument("network_rhs: state dimension does not match network");

  const double gs = net.params.gamma_s;
  const double gd = net.params.gamma_d;

  for (int i = 0; i < n; ++i) {
    const auto& mode = net.modes[i];
    const cxd a = amplitudes[i];
    if (is_ndopo(mode.kind)) {
      const cxd b = amplitudes[mode.partner];
      out[i] = pump_value * std::conj(b) - gd * a * std::norm(b);
    } else {
      out[i] = pump_value * std::conj(a) - gs * a - gd * a * std::norm(a);
    }
  }

  for (const auto& ch : net.channels) {
    const cxd v = ch.value(amplitudes);
    for (const auto& e : ch.coefficients) {
      out[e.mode] -= ch.rate * ch.scale_for(e.mode) * std::conj(e.coeff) * v;
    }
  }

  if (net.feedback) {
    const auto& fb = *net.feedback;
    for (int i = 0; i < fb.n_modes; ++i) {
      double drive = 0.0;
      for (int m = 0; m < fb.n_modes; ++m) {
        const double s = fb.sign(i, m);
        if (s != 0.0) drive += s * 2.0 * amplitudes[m].real();
      }
      out[i] -= fb.omega * drive;
    }
  }
}

double fixed_point_residual(const OscillatorNetwork& net, const NetworkState& state,
                            double pump_value) {
  std::vector<cxd> rhs(state.amplitudes.size());
  network_rhs(net, pump_value, state.amplitudes, rhs);
  double r = 0.0;
  for (const cxd& v : rhs) r = std::max(r, std::abs(v));
  return r;
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Error weights: b - b_hat (embedded 4th order solution).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

bool finite(std::span<const cxd> v) {
  for (const cxd& x : v)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
  return true;
}

}  // namespace

IntegrationResult integrate(const OscillatorNetwork& net, const NetworkState& initial,
                            const PumpSchedule& schedule, double t_end,
                            const IntegrateOptions& opts) {
  if (!(t_end > 0)) throw std::invalid_argument("integrate: t_end must be positive");
  if (!(opts.rtol > 0) || !(opts.atol > 0))
    throw std::invalid_argument("integrate: tolerances must be positive");
  const int n = net.size();
  if (static_cast<int>(initial.amplitudes.size()) != n)
    throw std::invalid_argument("integrate: state dimension does not match network");

  IntegrationResult res;
  std::vector<cxd> y = initial.amplitudes;
  double t = initial.time;

  double next_sample = opts.sample_dt > 0 ? t + opts.sample_dt : t_end + 1.0;
  auto record = [&](double tt, const std::vector<cxd>& yy) {
    res.samples.push_back(NetworkState{yy, tt});
  };

  std::vector<cxd> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
  auto rhs = [&](double tt, const std::vector<cxd>& yy, std::vector<cxd>& out) {
    network_rhs(net, schedule.value(tt), yy, out);
  };

  if (opts.method == IntegratorMethod::FixedRk4) {
    const double dt0 = opts.fixed_dt;
    if (!(dt0 > 0)) throw std::invalid_argument("integrate: fixed_dt must be positive");
    while (t < t_end) {
      const double dt = std::min(dt0, t_end - t);
      rhs(t, y, k1);
      for (int i = 0; i < n; ++i) ytmp[i] = y[i] + 0.5 * dt * k1[i];
      rhs(t + 0.5 * dt, ytmp, k2);
      for (int i = 0; i < n; ++i) ytmp[i] = y[i] + 0.5 * dt * k2[i];
      rhs(t + 0.5 * dt, ytmp, k3);
      for (int i = 0; i < n; ++i) ytmp[i] = y[i] + dt * k3[i];
      rhs(t + dt, ytmp, k4);
      for (int i = 0; i < n; ++i)
        y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      t += dt;
      ++res.n_steps;
      if (!finite(y)) {
        res.status = IntegrateStatus::Diverged;
        break;
      }
      while (t >= next_sample - 1e-12 && next_sample <= t_end) {
        record(t, y);
        next_sample += opts.sample_dt;
      }
    }
  } else {
    double h = std::min(opts.h_init, t_end - t);
    const double h_floor = 1e-14 * t_end;
    rhs(t, y, k1);  // FSAL
    while (t < t_end) {
      h = std::min(h, t_end - t);
      rhs(t, y, k1);
      for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
      rhs(t + c2 * h, ytmp, k2);
      for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      rhs(t + c3 * h, ytmp, k3);
      for (int i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      rhs(t + c4 * h, ytmp, k4);
      for (int i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      rhs(t + c5 * h, ytmp, k5);
      for (int i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      rhs(t + h, ytmp, k6);
      for (int i = 0; i < n; ++i)
        ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      rhs(t + h, ynew, k7);

      double err = 0.0;
      for (int i = 0; i < n; ++i) {
        const cxd de = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
        const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        const double r = std::abs(de) / sc;
        err += r * r;
      }
      err = std::sqrt(err / n);

      if (!finite(ynew) || !std::isfinite(err)) {
        res.status = IntegrateStatus::Diverged;
        break;
      }

      if (err <= 1.0) {
        t += h;
        y.swap(ynew);
        ++res.n_steps;
        while (t >= next_sample - 1e-12 && next_sample <= t_end) {
          record(t, y);
          next_sample += opts.sample_dt;
        }
      }
      const double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::clamp(fac, 0.2, 5.0);
      if (h < h_floor) {
        res.status = IntegrateStatus::Diverged;  // step-size underflow
        break;
      }
    }
  }

  res.final_state = NetworkState{std::move(y), t};
  if (opts.sample_dt > 0 && res.status == IntegrateStatus::Ok) {
    if (res.samples.empty() || res.samples.back().time < t - 1e-12)
      res.samples.push_back(res.final_state);
  }
  return res;
}

}  // namespace cim
