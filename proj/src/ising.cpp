#include "cim/ising.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace cim {

std::string SpinConfig::to_string() const {
  std::string s;
  s.reserve(spins.size());
  for (int8_t v : spins) s.push_back(v > 0 ? '+' : '-');
  return s;
}

uint32_t encode_config(const SpinConfig& config) {
  const int n = static_cast<int>(config.spins.size());
  uint32_t code = 0;
  for (int i = 0; i < n; ++i) {
    if (config.spins[i] > 0) code |= 1u << (n - 1 - i);
  }
  return code;
}

SpinConfig decode_config(uint32_t code, int n_spins) {
  SpinConfig c;
  c.spins.resize(n_spins);
  for (int i = 0; i < n_spins; ++i) {
    c.spins[i] = (code >> (n_spins - 1 - i)) & 1u ? int8_t{1} : int8_t{-1};
  }
  return c;
}

IsingModel::IsingModel(int n_spins, std::vector<Coupling> couplings, double j_magnitude)
    : n_spins_(n_spins), j_(j_magnitude), couplings_(std::move(couplings)) {
  if (n_spins_ <= 0) throw std::invalid_argument("IsingModel: n_spins must be positive");
  if (!(j_ > 0.0)) throw std::invalid_argument("IsingModel: j_magnitude must be positive");
  for (auto& c : couplings_) {
    if (c.n == c.m) throw std::invalid_argument("IsingModel: coupling with n == m");
    if (c.n < 0 || c.n >= n_spins_ || c.m < 0 || c.m >= n_spins_)
      throw std::invalid_argument("IsingModel: coupling index out of range");
    if (c.sign != 1 && c.sign != -1)
      throw std::invalid_argument("IsingModel: coupling sign must be +1 or -1");
    if (c.n > c.m) std::swap(c.n, c.m);
  }
  for (size_t i = 0; i < couplings_.size(); ++i) {
    for (size_t k = i + 1; k < couplings_.size(); ++k) {
      if (couplings_[i].n == couplings_[k].n && couplings_[i].m == couplings_[k].m)
        throw std::invalid_argument("IsingModel: duplicate coupling pair");
    }
  }
}

IsingModel IsingModel::all_to_all_afm(int n_spins, double j_magnitude) {
  std::vector<Coupling> cs;
  for (int n = 0; n < n_spins; ++n)
    for (int m = n + 1; m < n_spins; ++m) cs.push_back({n, m, +1});
  return IsingModel(n_spins, std::move(cs), j_magnitude);
}

long long IsingModel::energy_units(const SpinConfig& config) const {
  if (static_cast<int>(config.spins.size()) != n_spins_)
    throw std::invalid_argument("energy: config length does not match model");
  long long e = 0;
  for (const auto& c : couplings_) {
    e += static_cast<long long>(c.sign) * config.spins[c.n] * config.spins[c.m];
  }
  return e;
}

long long IsingModel::energy_units(uint32_t code) const {
  long long e = 0;
  for (const auto& c : couplings_) {
    const int bn = (code >> (n_spins_ - 1 - c.n)) & 1u;
    const int bm = (code >> (n_spins_ - 1 - c.m)) & 1u;
    e += (bn == bm) ? c.sign : -c.sign;
  }
  return e;
}

double IsingModel::energy(const SpinConfig& config) const {
  return j_ * static_cast<double>(energy_units(config));
}

int IsingModel::unsatisfied_count(const SpinConfig& config) const {
  // energy - E_mpe = 2J * (#unsatisfied)
  return static_cast<int>((energy_units(config) + coupling_count()) / 2);
}

double IsingModel::minimum_possible_energy() const {
  return -j_ * static_cast<double>(coupling_count());
}

int IsingModel::required_flips(double target_energy) const {
  const double units = target_energy / j_;
  const double flips = (units + coupling_count()) / 2.0;
  const double rounded = std::round(flips);
  if (std::abs(flips - rounded) > 1e-9)
    throw std::invalid_argument("required_flips: target is not an integer number of flips above E_mpe");
  if (rounded < 0)
    throw std::invalid_argument("required_flips: target below the minimum possible energy");
  return static_cast<int>(rounded);
}

int IsingModel::coupling_index(int n, int m) const {
  if (n > m) std::swap(n, m);
  for (size_t i = 0; i < couplings_.size(); ++i) {
    if (couplings_[i].n == n && couplings_[i].m == m) return static_cast<int>(i);
  }
  throw std::invalid_argument("coupling_index: pair is not a coupling of the model");
}

Spectrum::Spectrum(int n_spins, double j, std::vector<Level> levels)
    : n_spins_(n_spins), j_(j), levels_(std::move(levels)) {}

std::vector<SpinConfig> Spectrum::configs(size_t level_index) const {
  const Level& lv = levels_.at(level_index);
  std::vector<SpinConfig> out;
  out.reserve(lv.codes.size());
  for (uint32_t code : lv.codes) out.push_back(decode_config(code, n_spins_));
  return out;
}

namespace {

Spectrum build_spectrum(const IsingModel& model, bool parallel) {
  const int n = model.n_spins();
  if (n > 24) throw std::invalid_argument("solve_exact: instance too large (n_spins > 24)");
  const uint64_t total = uint64_t{1} << n;
  const int nc = model.coupling_count();
  const int n_energy_slots = 2 * nc + 1;  // energy_units in [-nc, nc]

  // Pass 1: count configurations per energy, per thread range.
  const int n_threads = parallel ? omp_get_max_threads() : 1;
  std::vector<std::vector<int64_t>> counts(n_threads, std::vector<int64_t>(n_energy_slots, 0));
  std::vector<uint64_t> range_lo(n_threads + 1);
  for (int t = 0; t <= n_threads; ++t) range_lo[t] = total * t / n_threads;

#pragma omp parallel num_threads(n_threads) if (parallel)
  {
    const int t = omp_get_thread_num();
    auto& local = counts[t];
    for (uint64_t code = range_lo[t]; code < range_lo[t + 1]; ++code) {
      local[model.energy_units(static_cast<uint32_t>(code)) + nc]++;
    }
  }

  std::vector<int64_t> level_total(n_energy_slots, 0);
  for (int t = 0; t < n_threads; ++t)
    for (int s = 0; s < n_energy_slots; ++s) level_total[s] += counts[t][s];

  std::vector<Spectrum::Level> levels;
  std::vector<int> slot_to_level(n_energy_slots, -1);
  for (int s = 0; s < n_energy_slots; ++s) {
    if (level_total[s] == 0) continue;
    slot_to_level[s] = static_cast<int>(levels.size());
    Spectrum::Level lv;
    lv.energy_units = s - nc;
    lv.degeneracy = level_total[s];
    lv.codes.resize(static_cast<size_t>(level_total[s]));
    levels.push_back(std::move(lv));
  }

  // Pass 2: place codes. Offsets per (thread, slot) keep ascending code order
  // within each level regardless of thread count.
  std::vector<std::vector<int64_t>> offset(n_threads, std::vector<int64_t>(n_energy_slots, 0));
  std::vector<int64_t> running(n_energy_slots, 0);
  for (int t = 0; t < n_threads; ++t)
    for (int s = 0; s < n_energy_slots; ++s) {
      offset[t][s] = running[s];
      running[s] += counts[t][s];
    }

#pragma omp parallel num_threads(n_threads) if (parallel)
  {
    const int t = omp_get_thread_num();
    auto local = offset[t];
    for (uint64_t code = range_lo[t]; code < range_lo[t + 1]; ++code) {
      const int s = static_cast<int>(model.energy_units(static_cast<uint32_t>(code))) + nc;
      levels[slot_to_level[s]].codes[static_cast<size_t>(local[s]++)] = static_cast<uint32_t>(code);
    }
  }

  return Spectrum(n, model.j_magnitude(), std::move(levels));
}

}  // namespace

Spectrum solve_exact(const IsingModel& model) { return build_spectrum(model, true); }
Spectrum solve_exact_serial(const IsingModel& model) { return build_spectrum(model, false); }

}  // namespace cim
