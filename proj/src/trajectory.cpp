#include "cim/trajectory.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <stdexcept>

#include "cim/rng.hpp"

namespace cim {

namespace {

// Factor-table ids by level change of the state.
enum : int { kTyCreate = 0, kTyAnnih = 1, kTyCreate2 = 2, kTyAnnih2 = 3 };

int type_of_delta(int delta) {
  switch (delta) {
    case +1: return kTyCreate;
    case -1: return kTyAnnih;
    case +2: return kTyCreate2;
    case -2: return kTyAnnih2;
  }
  throw std::logic_error("unsupported ladder delta");
}

// Time-factor slots for term weights.
enum : int { kTfConst = 0, kTfPump = 1, kTfShiftTp = 2, kTfShiftNd = 3, kTfCount = 4 };

std::array<std::vector<double>, 4> make_factor_tables(int dim) {
  std::array<std::vector<double>, 4> fac;
  for (auto& v : fac) v.assign(dim, 0.0);
  for (int n = 0; n < dim; ++n) {
    fac[kTyCreate][n] = std::sqrt(static_cast<double>(n));
    fac[kTyAnnih][n] = n + 1 < dim ? std::sqrt(static_cast<double>(n + 1)) : 0.0;
    fac[kTyCreate2][n] = n >= 2 ? std::sqrt(static_cast<double>(n) * (n - 1)) : 0.0;
    fac[kTyAnnih2][n] =
        n + 2 < dim ? std::sqrt(static_cast<double>(n + 1) * (n + 2)) : 0.0;
  }
  return fac;
}

struct RawTerm {
  cxd w0;
  int tf = kTfConst;
  int mode1 = -1, delta1 = 0;
  int mode2 = -1, delta2 = 0;
};

// State vectors split into real and imaginary planes for vectorisation.
template <typename Real>
struct Soa {
  std::vector<Real> re, im;
  size_t size() const { return re.size(); }
  void assign(size_t n, Real v) {
    re.assign(n, v);
    im.assign(n, v);
  }
  void resize(size_t n) {
    re.resize(n);
    im.resize(n);
  }
};

template <typename Real>
double soa_norm_sq(const Soa<Real>& v) {
  double s = 0.0;
  const size_t n = v.size();
  for (size_t i = 0; i < n; ++i)
    s += static_cast<double>(v.re[i]) * v.re[i] + static_cast<double>(v.im[i]) * v.im[i];
  return s;
}

// An operator compiled to a flat instruction stream over the basis lines.
// Each instruction is one contiguous run: dst[0..count) += w * f * (f0?) * src.
// Weight values are supplied per call; geometry is immutable and shared.
template <typename Real>
class CompiledOp {
 public:
  CompiledOp(const FockBasis& basis, const std::vector<RawTerm>& raw) : basis_(&basis) {
    n_weights_ = raw.size();
    const FockBasis& b = basis;
    fac0_.resize(4);
    {
      auto f = make_factor_tables(b.dims[0]);
      for (int ty = 0; ty < 4; ++ty) {
        fac0_[ty].assign(f[ty].size(), Real(0));
        for (size_t i = 0; i < f[ty].size(); ++i) fac0_[ty][i] = static_cast<Real>(f[ty][i]);
      }
    }
    std::vector<std::array<std::vector<double>, 4>> facd;
    facd.reserve(b.n_modes);
    for (int k = 0; k < b.n_modes; ++k) facd.push_back(make_factor_tables(b.dims[k]));

    struct TermGeom {
      int om1 = -1, oty1 = 0, om2 = -1, oty2 = 0, ty0 = -1, d0shift = 0;
      int64_t dprefix = 0;
    };
    std::vector<TermGeom> geom(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
      auto add = [&](TermGeom& g, int mode, int delta) {
        if (mode < 0 || delta == 0) return;
        if (mode == 0) {
          g.ty0 = type_of_delta(delta);
          g.d0shift = delta;
        } else {
          if (g.om1 < 0) {
            g.om1 = mode;
            g.oty1 = type_of_delta(delta);
          } else {
            g.om2 = mode;
            g.oty2 = type_of_delta(delta);
          }
          g.dprefix -= static_cast<int64_t>(delta) * b.pstride[mode];
        }
      };
      add(geom[i], raw[i].mode1, raw[i].delta1);
      add(geom[i], raw[i].mode2, raw[i].delta2);
    }

    const int m = b.n_modes;
    for (size_t p = 0; p < b.prefix_count; ++p) {
      const int len = b.line_len[p];
      if (len == 0) continue;
      const uint8_t* lv = b.line_levels.data() + p * (m - 1);
      for (size_t ti = 0; ti < raw.size(); ++ti) {
        const TermGeom& g = geom[ti];
        double f = 1.0;
        if (g.om1 >= 0) {
          f = facd[g.om1][g.oty1][lv[g.om1 - 1]];
          if (f == 0.0) continue;
        }
        if (g.om2 >= 0) {
          f *= facd[g.om2][g.oty2][lv[g.om2 - 1]];
          if (f == 0.0) continue;
        }
        const size_t tp = static_cast<size_t>(static_cast<int64_t>(p) + g.dprefix);
        const int tlen = b.line_len[tp];
        const int lo = std::max(0, g.d0shift);
        const int hi = std::min(len, tlen + g.d0shift);
        if (hi <= lo) continue;
        Instr ins;
        ins.dst = static_cast<int32_t>(b.line_offset[p] + lo);
        ins.src = static_cast<int32_t>(b.line_offset[tp] + (lo - g.d0shift));
        ins.count = static_cast<int32_t>(hi - lo);
        ins.n0 = static_cast<int32_t>(lo);
        ins.widx = static_cast<int16_t>(ti);
        ins.ty0 = static_cast<int16_t>(g.ty0);
        ins.f = static_cast<Real>(f);
        instrs_.push_back(ins);
      }
    }
  }

  size_t weight_count() const { return n_weights_; }

  // out = sum of terms applied to in, with the given per-term weights.
  void apply(std::span<const std::complex<Real>> w, const Soa<Real>& in, Soa<Real>& out) const {
    std::fill(out.re.begin(), out.re.end(), Real(0));
    std::fill(out.im.begin(), out.im.end(), Real(0));
    const Real* __restrict sre_all = in.re.data();
    const Real* __restrict sim_all = in.im.data();
    Real* __restrict dre_all = out.re.data();
    Real* __restrict dim_all = out.im.data();
    for (const Instr& ins : instrs_) {
      const Real wr = w[ins.widx].real() * ins.f;
      const Real wi = w[ins.widx].imag() * ins.f;
      const Real* __restrict sr = sre_all + ins.src;
      const Real* __restrict si = sim_all + ins.src;
      Real* __restrict dr = dre_all + ins.dst;
      Real* __restrict di = dim_all + ins.dst;
      const int n = ins.count;
      if (ins.ty0 >= 0) {
        const Real* __restrict f0 = fac0_[ins.ty0].data() + ins.n0;
        for (int i = 0; i < n; ++i) {
          const Real c = f0[i];
          dr[i] += c * (wr * sr[i] - wi * si[i]);
          di[i] += c * (wr * si[i] + wi * sr[i]);
        }
      } else {
        for (int i = 0; i < n; ++i) {
          dr[i] += wr * sr[i] - wi * si[i];
          di[i] += wr * si[i] + wi * sr[i];
        }
      }
    }
  }

 private:
  struct Instr {
    int32_t dst = 0;
    int32_t src = 0;
    int32_t count = 0;
    int32_t n0 = 0;
    int16_t widx = 0;
    int16_t ty0 = -1;
    Real f = Real(0);
  };

  const FockBasis* basis_;
  size_t n_weights_ = 0;
  std::vector<Instr> instrs_;
  std::vector<std::vector<Real>> fac0_;
};

std::vector<RawTerm> drift_terms(const FockNetwork& net) {
  std::vector<RawTerm> raw;
  const bool displaced = net.displaced_frame;
  for (int k : net.dopo_modes) {
    if (net.gamma_tp > 0) {
      raw.push_back({-0.5 * net.gamma_tp, kTfShiftTp, k, -2});
      raw.push_back({-0.5 * net.gamma_tp, kTfShiftTp, k, +2});
    }
    if (!displaced || net.gamma_tp == 0) {
      raw.push_back({-1.0, kTfPump, k, +2});
      raw.push_back({+1.0, kTfPump, k, -2});
    }
  }
  for (auto [i, j] : net.ndopo_pairs) {
    if (net.gamma_nd > 0) {
      raw.push_back({-0.5 * net.gamma_nd, kTfShiftNd, i, -1, j, -1});
      raw.push_back({-0.5 * net.gamma_nd, kTfShiftNd, i, +1, j, +1});
    }
    if (!displaced || net.gamma_nd == 0) {
      raw.push_back({-1.0, kTfPump, i, +1, j, +1});
      raw.push_back({+1.0, kTfPump, i, -1, j, -1});
    }
  }
  for (const auto& ch : net.collective) {
    for (const auto& [ma, ca] : ch.coeffs) {
      for (const auto& [mb, cb] : ch.coeffs) {
        if (ma == mb) continue;
        raw.push_back({-0.5 * ch.rate * std::conj(ca) * cb, kTfConst, ma, +1, mb, -1});
      }
    }
  }
  return raw;
}

std::array<double, kTfCount> time_factors(const FockNetwork& net, double S) {
  const bool displaced = net.displaced_frame;
  const double s_tp = displaced && net.gamma_tp > 0 ? 2.0 * S / net.gamma_tp : 0.0;
  const double s_nd = displaced && net.gamma_nd > 0 ? 2.0 * S / net.gamma_nd : 0.0;
  return {1.0, S, s_tp, s_nd};
}

void drift_weights(const std::vector<RawTerm>& raw, const std::array<double, kTfCount>& tf,
                   std::vector<cxd>& w) {
  w.resize(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) w[i] = raw[i].w0 * tf[raw[i].tf];
}

double drift_u(const FockNetwork& net, const std::array<double, kTfCount>& tf) {
  double u = 0.0;
  u -= 0.5 * net.gamma_tp * tf[kTfShiftTp] * tf[kTfShiftTp] *
       static_cast<double>(net.dopo_modes.size());
  u -= 0.5 * net.gamma_nd * tf[kTfShiftNd] * tf[kTfShiftNd] *
       static_cast<double>(net.ndopo_pairs.size());
  return u;
}

std::vector<double> drift_diag(const FockNetwork& net) {
  const FockBasis& b = net.basis;
  std::vector<double> diag(b.dim, 0.0);
  const int m = b.n_modes;
  std::vector<double> lv(m);
  for (size_t p = 0; p < b.prefix_count; ++p) {
    const int len = b.line_len[p];
    if (len == 0) continue;
    for (int k = 1; k < m; ++k) lv[k] = b.line_levels[p * (m - 1) + (k - 1)];
    const int64_t off = b.line_offset[p];
    for (int n0 = 0; n0 < len; ++n0) {
      lv[0] = n0;
      double d = 0.0;
      for (int k : net.dopo_modes) d -= 0.5 * net.gamma_tp * lv[k] * (lv[k] - 1.0);
      for (auto [i, j] : net.ndopo_pairs) d -= 0.5 * net.gamma_nd * lv[i] * lv[j];
      for (const auto& ch : net.collective)
        for (const auto& [mode, c] : ch.coeffs) d -= 0.5 * ch.rate * std::norm(c) * lv[mode];
      if (net.gamma_s > 0)
        for (int k = 0; k < m; ++k) d -= 0.5 * net.gamma_s * lv[k];
      diag[off + n0] = d;
    }
  }
  return diag;
}

// A jump channel: compiled ladder part plus a c-number displacement that is
// a time-factor slot (identical in law to the plain unraveling).
template <typename Real>
struct JumpChannel {
  CompiledOp<Real> op;
  std::vector<cxd> base_weights;
  double rate = 0.0;
  int shift_tf = kTfConst;
  bool shifted = false;
};

template <typename Real>
std::vector<JumpChannel<Real>> make_jumps(const FockNetwork& net) {
  std::vector<JumpChannel<Real>> jumps;
  auto add = [&](std::vector<RawTerm> raw, double rate, bool shifted, int tf) {
    std::vector<cxd> w;
    w.reserve(raw.size());
    for (auto& r : raw) w.push_back(r.w0);
    jumps.push_back(
        {CompiledOp<Real>(net.basis, raw), std::move(w), rate, tf, shifted});
  };
  for (int k : net.dopo_modes)
    if (net.gamma_tp > 0)
      add({{1.0, kTfConst, k, -2}}, net.gamma_tp, net.displaced_frame, kTfShiftTp);
  for (auto [i, j] : net.ndopo_pairs)
    if (net.gamma_nd > 0)
      add({{1.0, kTfConst, i, -1, j, -1}}, net.gamma_nd, net.displaced_frame, kTfShiftNd);
  for (const auto& ch : net.collective) {
    std::vector<RawTerm> raw;
    for (const auto& [mode, c] : ch.coeffs) raw.push_back({c, kTfConst, mode, -1});
    add(std::move(raw), ch.rate, false, kTfConst);
  }
  if (net.gamma_s > 0)
    for (int k = 0; k < net.basis.n_modes; ++k)
      add({{1.0, kTfConst, k, -1}}, net.gamma_s, false, kTfConst);
  return jumps;
}

// out = (op + shift) * in; returns ||out||^2.
template <typename Real>
double apply_jump(const JumpChannel<Real>& j, double shift_value, const Soa<Real>& in,
                  Soa<Real>& out) {
  std::vector<std::complex<Real>> w(j.base_weights.size());
  for (size_t i = 0; i < w.size(); ++i)
    w[i] = std::complex<Real>(static_cast<Real>(j.base_weights[i].real()),
                              static_cast<Real>(j.base_weights[i].imag()));
  j.op.apply(w, in, out);
  if (j.shifted && shift_value != 0.0) {
    const Real s = static_cast<Real>(shift_value);
    const size_t n = in.size();
    for (size_t i = 0; i < n; ++i) {
      out.re[i] += s * in.re[i];
      out.im[i] += s * in.im[i];
    }
  }
  return soa_norm_sq(out);
}

template <typename Real>
double boundary_pop_soa(const FockBasis& b, const Soa<Real>& psi) {
  const int m = b.n_modes;
  double pop = 0.0;
  for (size_t p = 0; p < b.prefix_count; ++p) {
    const int len = b.line_len[p];
    if (len == 0) continue;
    const int64_t off = b.line_offset[p];
    bool outer_top = false;
    for (int k = 1; k < m; ++k)
      if (b.line_levels[p * (m - 1) + (k - 1)] == b.dims[k] - 1) outer_top = true;
    if (outer_top) {
      for (int n0 = 0; n0 < len; ++n0)
        pop += static_cast<double>(psi.re[off + n0]) * psi.re[off + n0] +
               static_cast<double>(psi.im[off + n0]) * psi.im[off + n0];
    } else {
      pop += static_cast<double>(psi.re[off + len - 1]) * psi.re[off + len - 1] +
             static_cast<double>(psi.im[off + len - 1]) * psi.im[off + len - 1];
    }
  }
  return pop;
}

template <typename Real>
struct TrajectoryWork {
  Soa<Real> psi, k1, k2, scratch;
  std::vector<std::complex<Real>> weights;
  std::map<int, std::vector<Real>> evec_cache;  // exp tables on the dt ladder
};

struct SharedDrift {
  std::vector<RawTerm> raw;
  std::vector<double> diag;
};

template <typename Real>
TrajectoryResult run_one(const FockNetwork& net, const CompiledOp<Real>& drift,
                         const SharedDrift& sd, const std::vector<JumpChannel<Real>>& jumps,
                         const PumpSchedule& pump_s, double t_end,
                         const TrajectoryOptions& opts, int id, const std::vector<cxd>* target,
                         TrajectoryWork<Real>& wk) {
  const FockBasis& b = net.basis;
  const size_t dim = b.dim;
  TrajectoryResult res;
  res.id = id;

  std::mt19937_64 rng(derive_seed(opts.seed, static_cast<uint64_t>(id)));

  wk.psi.assign(dim, Real(0));
  wk.k1.resize(dim);
  wk.k2.resize(dim);
  wk.scratch.resize(dim);
  if (opts.initial_state) {
    if (opts.initial_state->size() != dim)
      throw std::invalid_argument("trajectory: initial state dimension mismatch");
    for (size_t i = 0; i < dim; ++i) {
      wk.psi.re[i] = static_cast<Real>((*opts.initial_state)[i].real());
      wk.psi.im[i] = static_cast<Real>((*opts.initial_state)[i].imag());
    }
  } else {
    wk.psi.re[0] = Real(1);
  }

  auto evec_for = [&](int level) -> const std::vector<Real>& {
    auto it = wk.evec_cache.find(level);
    if (it != wk.evec_cache.end()) return it->second;
    const double dt = opts.dt_max / static_cast<double>(int64_t{1} << level);
    std::vector<Real> e(dim);
    for (size_t i = 0; i < dim; ++i)
      e[i] = static_cast<Real>(std::exp(sd.diag[i] * dt * 0.5));
    return wk.evec_cache.emplace(level, std::move(e)).first->second;
  };

  double t = 0.0;
  int level = 0;  // dt = dt_max / 2^level
  double u_jump = uniform01(rng);
  double w2 = soa_norm_sq(wk.psi);
  double rate_est = 0.0;
  int calm_steps = 0;
  const int max_level = 14;
  double next_monitor = std::min(opts.segment_dt, t_end);

  auto do_jump = [&](double tj) {
    const auto tf = time_factors(net, pump_s.value(tj));
    double total = 0.0;
    std::vector<double> wjump(jumps.size());
    for (size_t k = 0; k < jumps.size(); ++k) {
      wjump[k] = jumps[k].rate * apply_jump(jumps[k], tf[jumps[k].shift_tf], wk.psi, wk.scratch);
      total += wjump[k];
    }
    auto renorm_only = [&] {
      const double inv = 1.0 / std::sqrt(w2);
      for (size_t i = 0; i < dim; ++i) {
        wk.psi.re[i] *= static_cast<Real>(inv);
        wk.psi.im[i] *= static_cast<Real>(inv);
      }
      w2 = 1.0;
      u_jump = uniform01(rng);
    };
    if (total <= 1e-300) {
      renorm_only();
      return;
    }
    double pick = uniform01(rng) * total;
    size_t sel = 0;
    for (; sel + 1 < jumps.size(); ++sel) {
      if (pick < wjump[sel]) break;
      pick -= wjump[sel];
    }
    const double n2 = apply_jump(jumps[sel], tf[jumps[sel].shift_tf], wk.psi, wk.scratch);
    if (n2 <= 1e-300) {
      renorm_only();
      return;
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (size_t i = 0; i < dim; ++i) {
      wk.psi.re[i] = wk.scratch.re[i] * static_cast<Real>(inv);
      wk.psi.im[i] = wk.scratch.im[i] * static_cast<Real>(inv);
    }
    ++res.jumps;
    w2 = soa_norm_sq(wk.psi);
    res.norm_dev = std::max(res.norm_dev, std::abs(w2 - 1.0));
    u_jump = uniform01(rng);
  };

  std::vector<Real> evec_last;  // for the clamped final step
  while (t < t_end - 1e-12) {
    // Step bound: dt <= jump_dt_factor / (total jump rate), with the rate
    // observed from the norm decay (factor 2 safety; the level relaxes only
    // after a calm stretch so post-jump transients stay resolved).
    const double dt_target = opts.jump_dt_factor / std::max(2.0 * rate_est, 1e-12);
    int want = 0;
    while (want < max_level && opts.dt_max / static_cast<double>(int64_t{1} << want) > dt_target)
      ++want;
    if (want > level) {
      level = want;
      calm_steps = 0;
    } else if (want < level && ++calm_steps >= 16) {
      --level;
      calm_steps = 0;
    }

    double dt = opts.dt_max / static_cast<double>(int64_t{1} << level);
    const bool clamp = t + dt > t_end;
    const Real* evec = nullptr;
    if (clamp) {
      dt = t_end - t;
      evec_last.resize(dim);
      for (size_t i = 0; i < dim; ++i)
        evec_last[i] = static_cast<Real>(std::exp(sd.diag[i] * dt * 0.5));
      evec = evec_last.data();
    } else {
      evec = evec_for(level).data();
    }

    const double t_mid = t + 0.5 * dt;
    const auto tf = time_factors(net, pump_s.value(t_mid));
    {
      std::vector<cxd> wd;
      drift_weights(sd.raw, tf, wd);
      wk.weights.resize(wd.size());
      for (size_t i = 0; i < wd.size(); ++i)
        wk.weights[i] = std::complex<Real>(static_cast<Real>(wd[i].real()),
                                           static_cast<Real>(wd[i].imag()));
    }
    const Real g = static_cast<Real>(std::exp(drift_u(net, tf) * dt * 0.5));

    for (size_t i = 0; i < dim; ++i) {
      const Real e = evec[i] * g;
      wk.psi.re[i] *= e;
      wk.psi.im[i] *= e;
    }
    drift.apply(wk.weights, wk.psi, wk.k1);
    const Real h2 = static_cast<Real>(0.5 * dt);
    for (size_t i = 0; i < dim; ++i) {
      wk.k2.re[i] = wk.psi.re[i] + h2 * wk.k1.re[i];
      wk.k2.im[i] = wk.psi.im[i] + h2 * wk.k1.im[i];
    }
    drift.apply(wk.weights, wk.k2, wk.k1);
    const Real hr = static_cast<Real>(dt);
    double w2_new = 0.0;
    for (size_t i = 0; i < dim; ++i) {
      const Real e = evec[i] * g;
      const Real pr = (wk.psi.re[i] + hr * wk.k1.re[i]) * e;
      const Real pi = (wk.psi.im[i] + hr * wk.k1.im[i]) * e;
      wk.psi.re[i] = pr;
      wk.psi.im[i] = pi;
      w2_new += static_cast<double>(pr) * pr + static_cast<double>(pi) * pi;
    }
    if (!clamp) {
      const double decay = w2_new > 0 && w2 > 0 ? -std::log(w2_new / w2) / dt : 1e9;
      rate_est = std::max(std::max(decay, 0.0), 0.75 * rate_est);
    }
    w2 = w2_new;
    t = clamp ? t_end : t + dt;
    ++res.n_steps;

    if (w2 < u_jump) do_jump(t);

    if (t >= next_monitor - 1e-12) {
      const double bpop = boundary_pop_soa(b, wk.psi) / w2;
      res.boundary_pop = std::max(res.boundary_pop, bpop);
      if (bpop > opts.top_level_threshold) res.valid = false;
      if (std::getenv("FECIM_TRAJ_DEBUG") && id == 0) {
        std::fprintf(stderr,
                     "[traj0] t=%.2f level=%d rate=%.3g w2=%.4f jumps=%d steps=%llu bpop=%.2g\n",
                     t, level, rate_est, w2, res.jumps,
                     static_cast<unsigned long long>(res.n_steps), bpop);
      }
      next_monitor += opts.segment_dt;
    }
  }

  {
    const double inv = 1.0 / std::sqrt(w2);
    for (size_t i = 0; i < dim; ++i) {
      wk.psi.re[i] *= static_cast<Real>(inv);
      wk.psi.im[i] *= static_cast<Real>(inv);
    }
    res.norm_dev = std::max(res.norm_dev, std::abs(soa_norm_sq(wk.psi) - 1.0));
  }

  std::vector<cxd> psi_d(dim);
  for (size_t i = 0; i < dim; ++i)
    psi_d[i] = cxd(static_cast<double>(wk.psi.re[i]), static_cast<double>(wk.psi.im[i]));
  res.mean_photon = mean_photon_numbers(b, psi_d);
  if (target) {
    if (target->size() != dim)
      throw std::invalid_argument("trajectory: target state dimension mismatch");
    cxd ov = 0.0;
    for (size_t i = 0; i < dim; ++i) ov += std::conj((*target)[i]) * psi_d[i];
    res.target_overlap = ov;
  }
  if (opts.keep_states) res.state = std::move(psi_d);
  return res;
}

template <typename Real>
TrajectoryEnsemble run_impl(const FockNetwork& net, const PumpSchedule& pump_s, double t_end,
                            const TrajectoryOptions& opts, const std::vector<cxd>* target,
                            bool parallel) {
  net.validate();
  if (net.basis.dim > 1000000)
    throw std::invalid_argument("trajectory: truncated dimension exceeds 10^6");
  if (opts.n_traj < 1) throw std::invalid_argument("trajectory: n_traj must be >= 1");
  if (!(t_end > 0)) throw std::invalid_argument("trajectory: t_end must be positive");

  SharedDrift sd{drift_terms(net), drift_diag(net)};
  const CompiledOp<Real> drift(net.basis, sd.raw);
  const std::vector<JumpChannel<Real>> jumps = make_jumps<Real>(net);

  TrajectoryEnsemble ens;
  ens.results.resize(opts.n_traj);
#pragma omp parallel if (parallel)
  {
    TrajectoryWork<Real> wk;
#pragma omp for schedule(dynamic, 1)
    for (int id = 0; id < opts.n_traj; ++id) {
      ens.results[id] = run_one<Real>(net, drift, sd, jumps, pump_s, t_end, opts, id, target, wk);
    }
  }
  return ens;
}

}  // namespace

bool TrajectoryEnsemble::all_valid() const {
  for (const auto& r : results)
    if (!r.valid) return false;
  return true;
}

TrajectoryEnsemble run_trajectories(const FockNetwork& net, const PumpSchedule& pump_s,
                                    double t_end, const TrajectoryOptions& opts,
                                    const std::vector<cxd>* target_state) {
  return opts.precision == Precision::Double
             ? run_impl<double>(net, pump_s, t_end, opts, target_state, true)
             : run_impl<float>(net, pump_s, t_end, opts, target_state, true);
}

TrajectoryEnsemble run_trajectories_serial(const FockNetwork& net, const PumpSchedule& pump_s,
                                           double t_end, const TrajectoryOptions& opts,
                                           const std::vector<cxd>* target_state) {
  return opts.precision == Precision::Double
             ? run_impl<double>(net, pump_s, t_end, opts, target_state, false)
             : run_impl<float>(net, pump_s, t_end, opts, target_state, false);
}

FidelityEstimate fidelity_to_dark(const TrajectoryEnsemble& ensemble) {
  FidelityEstimate est;
  const size_t n = ensemble.results.size();
  if (n == 0) return est;
  double sum = 0.0;
  for (const auto& r : ensemble.results) sum += std::norm(r.target_overlap);
  est.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double var = 0.0;
    for (const auto& r : ensemble.results) {
      const double d = std::norm(r.target_overlap) - est.mean;
      var += d * d;
    }
    est.std_error = std::sqrt(var / (static_cast<double>(n) * (n - 1)));
  }
  return est;
}

void write_ensemble_csv(std::ostream& os, const TrajectoryEnsemble& ensemble) {
  os << "# fecim-trajectories v1\n";
  os << "trajectory,jumps,fidelity\n";
  char buf[64];
  for (const auto& r : ensemble.results) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", r.id, r.jumps, std::norm(r.target_overlap));
    os << buf;
  }
}

void apply_drift_reference(const FockNetwork& net, double S, std::span<const cxd> in,
                           std::span<cxd> out) {
  net.validate();
  const FockBasis& b = net.basis;
  std::fill(out.begin(), out.end(), cxd(0));
  std::vector<cxd> tmp(b.dim), tmp2(b.dim);

  const bool displaced = net.displaced_frame;
  const double s_tp = displaced && net.gamma_tp > 0 ? 2.0 * S / net.gamma_tp : 0.0;
  const double s_nd = displaced && net.gamma_nd > 0 ? 2.0 * S / net.gamma_nd : 0.0;

  auto add_damping = [&](const FockOperator& op, cxd shift, double rate) {
    if (rate <= 0) return;
    op.apply(b, in, tmp, shift);
    FockOperator adj;
    adj.identity = std::conj(op.identity + shift);
    for (const auto& t : op.terms)
      adj.terms.push_back({std::conj(t.w), t.mode1, -t.delta1, t.mode2,
                           t.mode2 >= 0 ? -t.delta2 : 0});
    adj.apply(b, tmp, tmp2);
    for (size_t i = 0; i < b.dim; ++i) out[i] -= 0.5 * rate * tmp2[i];
  };

  for (int k : net.dopo_modes) add_damping(FockOperator::annihilate_sq(k), s_tp, net.gamma_tp);
  for (auto [i, j] : net.ndopo_pairs)
    add_damping(FockOperator::pair_annihilate(i, j), s_nd, net.gamma_nd);
  for (const auto& ch : net.collective)
    add_damping(FockOperator::linear_combination(ch.coeffs), 0.0, ch.rate);
  if (net.gamma_s > 0)
    for (int k = 0; k < b.n_modes; ++k) add_damping(FockOperator::annihilate(k), 0.0, net.gamma_s);

  // Residual pump Hamiltonian; identically cancelled in the displaced frame.
  FockOperator h;
  if (!displaced || net.gamma_tp == 0) {
    for (int k : net.dopo_modes) {
      h.terms.push_back({-S, k, +2, -1, 0});
      h.terms.push_back({+S, k, -2, -1, 0});
    }
  }
  if (!displaced || net.gamma_nd == 0) {
    for (auto [i, j] : net.ndopo_pairs) {
      h.terms.push_back({-S, i, +1, j, +1});
      h.terms.push_back({+S, i, -1, j, -1});
    }
  }
  if (!h.terms.empty()) {
    h.apply(b, in, tmp);
    for (size_t i = 0; i < b.dim; ++i) out[i] += tmp[i];
  }
}

void apply_drift_fused(const FockNetwork& net, double S, std::span<const cxd> in,
                       std::span<cxd> out) {
  net.validate();
  SharedDrift sd{drift_terms(net), drift_diag(net)};
  const CompiledOp<double> drift(net.basis, sd.raw);
  const auto tf = time_factors(net, S);
  std::vector<cxd> w;
  drift_weights(sd.raw, tf, w);
  std::vector<std::complex<double>> wr(w.begin(), w.end());

  Soa<double> in_s, out_s;
  in_s.resize(net.basis.dim);
  out_s.resize(net.basis.dim);
  for (size_t i = 0; i < net.basis.dim; ++i) {
    in_s.re[i] = in[i].real();
    in_s.im[i] = in[i].imag();
  }
  drift.apply(wr, in_s, out_s);
  const double u = drift_u(net, tf);
  for (size_t i = 0; i < net.basis.dim; ++i)
    out[i] = cxd(out_s.re[i], out_s.im[i]) + (sd.diag[i] + u) * in[i];
}

}  // namespace cim
