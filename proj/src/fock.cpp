#include "cim/fock.hpp"

#include <cmath>
#include <stdexcept>

namespace cim {

int default_fock_cutoff(double alpha_sq) {
  return static_cast<int>(std::ceil(alpha_sq + 6.0 * std::sqrt(alpha_sq) + 4.0));
}

int default_total_cap(double total_alpha_sq) {
  return static_cast<int>(std::ceil(total_alpha_sq + 6.0 * std::sqrt(total_alpha_sq) + 4.0));
}

FockBasis FockBasis::make(std::vector<int> dims, int total_cap) {
  FockBasis b;
  b.n_modes = static_cast<int>(dims.size());
  if (b.n_modes < 1) throw std::invalid_argument("FockBasis: needs at least one mode");
  for (int d : dims)
    if (d < 4) throw std::invalid_argument("FockBasis: cutoffs must be >= 4");
  b.dims = std::move(dims);
  b.total_cap = total_cap;
  b.d0 = b.dims[0];

  b.pstride.assign(b.n_modes, 0);
  b.prefix_count = 1;
  for (int k = 1; k < b.n_modes; ++k) {
    b.pstride[k] = static_cast<int64_t>(b.prefix_count);
    b.prefix_count *= static_cast<size_t>(b.dims[k]);
  }

  b.line_offset.assign(b.prefix_count, 0);
  b.line_len.assign(b.prefix_count, 0);
  b.line_levels.assign(b.prefix_count * std::max(1, b.n_modes - 1), 0);

  int64_t offset = 0;
  std::vector<int> lv(b.n_modes, 0);
  for (size_t p = 0; p < b.prefix_count; ++p) {
    size_t rem = p;
    int sum = 0;
    for (int k = 1; k < b.n_modes; ++k) {
      lv[k] = static_cast<int>(rem % b.dims[k]);
      rem /= b.dims[k];
      sum += lv[k];
      b.line_levels[p * (b.n_modes - 1) + (k - 1)] = static_cast<uint8_t>(lv[k]);
    }
    int len = b.d0;
    if (total_cap >= 0) len = std::min(len, total_cap - sum + 1);
    len = std::max(len, 0);
    b.line_offset[p] = offset;
    b.line_len[p] = len;
    offset += len;
  }
  b.dim = static_cast<size_t>(offset);
  if (b.dim == 0) throw std::invalid_argument("FockBasis: total cap excludes every state");
  return b;
}

int64_t FockBasis::index_of(std::span<const int> levels) const {
  if (static_cast<int>(levels.size()) != n_modes) return -1;
  size_t p = 0;
  for (int k = 0; k < n_modes; ++k) {
    if (levels[k] < 0 || levels[k] >= dims[k]) return -1;
    if (k >= 1) p += static_cast<size_t>(levels[k]) * static_cast<size_t>(pstride[k]);
  }
  if (levels[0] >= line_len[p]) return -1;
  return line_offset[p] + levels[0];
}

std::vector<int> FockBasis::levels_of(int64_t index) const {
  // Linear scan over lines; intended for tests and small diagnostics.
  for (size_t p = 0; p < prefix_count; ++p) {
    if (index >= line_offset[p] && index < line_offset[p] + line_len[p]) {
      std::vector<int> lv(n_modes, 0);
      lv[0] = static_cast<int>(index - line_offset[p]);
      for (int k = 1; k < n_modes; ++k)
        lv[k] = line_levels[p * (n_modes - 1) + (k - 1)];
      return lv;
    }
  }
  throw std::out_of_range("FockBasis::levels_of: index out of range");
}

FockOperator FockOperator::annihilate(int mode) {
  FockOperator op;
  op.terms.push_back({1.0, mode, -1, -1, 0});
  return op;
}

FockOperator FockOperator::annihilate_sq(int mode) {
  FockOperator op;
  op.terms.push_back({1.0, mode, -2, -1, 0});
  return op;
}

FockOperator FockOperator::pair_annihilate(int mode_a, int mode_b) {
  FockOperator op;
  op.terms.push_back({1.0, mode_a, -1, mode_b, -1});
  return op;
}

FockOperator FockOperator::linear_combination(const std::vector<std::pair<int, cxd>>& coeffs) {
  FockOperator op;
  for (const auto& [mode, c] : coeffs) op.terms.push_back({c, mode, -1, -1, 0});
  return op;
}

namespace {

// <x| ladder |x - delta>, zero when the source level leaves the box.
double ladder_factor(int out_level, int delta, int dim) {
  switch (delta) {
    case +1:
      return std::sqrt(static_cast<double>(out_level));
    case -1:
      return out_level + 1 < dim ? std::sqrt(static_cast<double>(out_level + 1)) : 0.0;
    case +2:
      return std::sqrt(static_cast<double>(out_level) * (out_level - 1));
    case -2:
      return out_level + 2 < dim
                 ? std::sqrt(static_cast<double>(out_level + 1) * (out_level + 2))
                 : 0.0;
    default:
      throw std::logic_error("ladder_factor: unsupported delta");
  }
}

}  // namespace

void FockOperator::apply(const FockBasis& basis, std::span<const cxd> in, std::span<cxd> out,
                         cxd extra_identity) const {
  if (in.size() != basis.dim || out.size() != basis.dim)
    throw std::invalid_argument("FockOperator::apply: dimension mismatch");
  const cxd id = identity + extra_identity;
  const int m = basis.n_modes;
  std::vector<int> lv(m), src(m);
  for (size_t p = 0; p < basis.prefix_count; ++p) {
    const int len = basis.line_len[p];
    if (len == 0) continue;
    for (int k = 1; k < m; ++k) lv[k] = basis.line_levels[p * (m - 1) + (k - 1)];
    const int64_t off = basis.line_offset[p];
    for (int n0 = 0; n0 < len; ++n0) {
      lv[0] = n0;
      cxd acc = id * in[off + n0];
      for (const auto& t : terms) {
        double f = ladder_factor(lv[t.mode1], t.delta1, basis.dims[t.mode1]);
        if (t.mode2 >= 0) {
          f *= t.mode2 == t.mode1 ? 0.0  // same-mode double handled via delta +-2
                                  : ladder_factor(lv[t.mode2], t.delta2, basis.dims[t.mode2]);
        }
        if (f == 0.0) continue;
        for (int k = 0; k < m; ++k) src[k] = lv[k];
        src[t.mode1] -= t.delta1;
        if (t.mode2 >= 0) src[t.mode2] -= t.delta2;
        const int64_t j = basis.index_of(src);
        if (j < 0) continue;
        acc += t.w * f * in[j];
      }
      out[off + n0] = acc;
    }
  }
}

double FockOperator::apply_norm(const FockBasis& basis, std::span<const cxd> in,
                                std::span<cxd> out, cxd extra_identity) const {
  apply(basis, in, out, extra_identity);
  double s = 0.0;
  for (const cxd& v : out) s += std::norm(v);
  return s;
}

std::vector<cxd> coherent_coefficients(cxd alpha, int dim) {
  std::vector<cxd> c(dim);
  c[0] = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < dim; ++n) c[n] = c[n - 1] * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

std::vector<cxd> coherent_product_state(const FockBasis& basis, std::span<const cxd> alphas) {
  if (static_cast<int>(alphas.size()) != basis.n_modes)
    throw std::invalid_argument("coherent_product_state: one amplitude per mode required");
  std::vector<std::vector<cxd>> per_mode(basis.n_modes);
  for (int k = 0; k < basis.n_modes; ++k)
    per_mode[k] = coherent_coefficients(alphas[k], basis.dims[k]);

  std::vector<cxd> psi(basis.dim);
  const int m = basis.n_modes;
  for (size_t p = 0; p < basis.prefix_count; ++p) {
    const int len = basis.line_len[p];
    if (len == 0) continue;
    cxd outer = 1.0;
    for (int k = 1; k < m; ++k) outer *= per_mode[k][basis.line_levels[p * (m - 1) + (k - 1)]];
    const int64_t off = basis.line_offset[p];
    for (int n0 = 0; n0 < len; ++n0) psi[off + n0] = outer * per_mode[0][n0];
  }
  return psi;
}

std::vector<double> mean_photon_numbers(const FockBasis& basis, std::span<const cxd> psi) {
  std::vector<double> out(basis.n_modes, 0.0);
  const int m = basis.n_modes;
  for (size_t p = 0; p < basis.prefix_count; ++p) {
    const int len = basis.line_len[p];
    if (len == 0) continue;
    const int64_t off = basis.line_offset[p];
    double line_pop = 0.0, line_n0 = 0.0;
    for (int n0 = 0; n0 < len; ++n0) {
      const double w = std::norm(psi[off + n0]);
      line_pop += w;
      line_n0 += w * n0;
    }
    out[0] += line_n0;
    for (int k = 1; k < m; ++k)
      out[k] += line_pop * basis.line_levels[p * (m - 1) + (k - 1)];
  }
  return out;
}

double boundary_population(const FockBasis& basis, std::span<const cxd> psi) {
  const int m = basis.n_modes;
  double pop = 0.0;
  for (size_t p = 0; p < basis.prefix_count; ++p) {
    const int len = basis.line_len[p];
    if (len == 0) continue;
    const int64_t off = basis.line_offset[p];
    bool outer_top = false;
    for (int k = 1; k < m; ++k)
      if (basis.line_levels[p * (m - 1) + (k - 1)] == basis.dims[k] - 1) outer_top = true;
    if (outer_top) {
      for (int n0 = 0; n0 < len; ++n0) pop += std::norm(psi[off + n0]);
      continue;
    }
    // Last element of the line: mode-0 top level for a full line, total
    // quanta == cap for a cap-limited one.
    pop += std::norm(psi[off + len - 1]);
  }
  return pop;
}

void FockNetwork::validate() const {
  if (gamma_tp < 0 || gamma_nd < 0 || gamma_s < 0)
    throw std::invalid_argument("FockNetwork: rates must be nonnegative");
  for (int k : dopo_modes)
    if (k < 0 || k >= basis.n_modes) throw std::invalid_argument("FockNetwork: bad mode index");
  for (auto [i, j] : ndopo_pairs)
    if (i < 0 || j < 0 || i >= basis.n_modes || j >= basis.n_modes || i == j)
      throw std::invalid_argument("FockNetwork: bad pair");
  for (const auto& ch : collective) {
    if (ch.coeffs.empty()) throw std::invalid_argument("FockNetwork: empty channel");
    for (auto& [mode, c] : ch.coeffs) {
      (void)c;
      if (mode < 0 || mode >= basis.n_modes)
        throw std::invalid_argument("FockNetwork: channel mode out of range");
    }
  }
}

FockNetwork fock_hyperspin_network(const IsingModel& model, const PhaseMap& phases,
                                   double gamma, double gamma_c, int cutoff, int total_cap) {
  if (static_cast<int>(phases.size()) != model.coupling_count())
    throw std::invalid_argument("fock_hyperspin_network: phase map incomplete");
  const int n = model.n_spins();
  FockNetwork net;
  net.basis = FockBasis::make(std::vector<int>(n + 2, cutoff), total_cap);
  net.gamma_tp = gamma;
  net.gamma_nd = gamma;
  for (int k = 0; k < n; ++k) net.dopo_modes.push_back(k);
  const int ani = n, ans = n + 1;
  net.ndopo_pairs.push_back({ani, ans});

  std::vector<cxd> coeff_ani(n, 0.0), coeff_ans(n, 0.0);
  for (int k = 0; k < model.coupling_count(); ++k) {
    const auto& c = model.couplings()[k];
    const cxd rot = std::polar(1.0, phases[k]);
    coeff_ani[c.n] += rot;
    coeff_ani[c.m] += rot * static_cast<double>(c.sign);
    coeff_ans[c.n] += std::conj(rot);
    coeff_ans[c.m] += std::conj(rot) * static_cast<double>(c.sign);
  }
  FockNetwork::Collective ch_ani, ch_ans;
  ch_ani.rate = gamma_c;
  ch_ans.rate = gamma_c;
  for (int k = 0; k < n; ++k) {
    if (std::abs(coeff_ani[k]) > 0) ch_ani.coeffs.push_back({k, coeff_ani[k]});
    if (std::abs(coeff_ans[k]) > 0) ch_ans.coeffs.push_back({k, coeff_ans[k]});
  }
  ch_ani.coeffs.push_back({ani, 2.0});
  ch_ans.coeffs.push_back({ans, 2.0});
  net.collective.push_back(std::move(ch_ani));
  net.collective.push_back(std::move(ch_ans));
  net.validate();
  return net;
}

FockNetwork fock_single_dopo(double gamma, int cutoff) {
  FockNetwork net;
  net.basis = FockBasis::make({cutoff});
  net.gamma_tp = gamma;
  net.dopo_modes = {0};
  net.validate();
  return net;
}

FockNetwork fock_afm_pair(double gamma, double gamma_c, int cutoff) {
  FockNetwork net;
  net.basis = FockBasis::make({cutoff, cutoff});
  net.gamma_tp = gamma;
  net.dopo_modes = {0, 1};
  FockNetwork::Collective ch;
  ch.rate = gamma_c;
  ch.coeffs = {{0, 1.0}, {1, 1.0}};
  net.collective.push_back(std::move(ch));
  net.validate();
  return net;
}

}  // namespace cim
