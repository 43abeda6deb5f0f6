// Ising instances with uniform coupling magnitude |J|, exact spectra, and
// the flip-count bookkeeping used by the frustration-elimination builders.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cim {

struct SpinConfig {
  std::vector<int8_t> spins;  // entries are +1 or -1

  std::string to_string() const;  // e.g. "+-+"
  bool operator==(const SpinConfig&) const = default;
};

// Packed representation: bit (n_spins-1-i) of the code is set iff spins[i] == +1,
// so ascending code order is lexicographic order of the spin vector with -1 < +1.
uint32_t encode_config(const SpinConfig& config);
SpinConfig decode_config(uint32_t code, int n_spins);

struct Coupling {
  int n = 0;
  int m = 0;
  int sign = +1;  // +1 antiferromagnetic, -1 ferromagnetic, times J
};

class IsingModel {
 public:
  IsingModel(int n_spins, std::vector<Coupling> couplings, double j_magnitude = 1.0);

  static IsingModel all_to_all_afm(int n_spins, double j_magnitude = 1.0);

  int n_spins() const { return n_spins_; }
  double j_magnitude() const { return j_; }
  const std::vector<Coupling>& couplings() const { return couplings_; }
  int coupling_count() const { return static_cast<int>(couplings_.size()); }

  // Energy in units of J; exact integer, used for level grouping.
  long long energy_units(const SpinConfig& config) const;
  long long energy_units(uint32_t code) const;
  double energy(const SpinConfig& config) const;

  int unsatisfied_count(const SpinConfig& config) const;

  // -J * (number of couplings); attained only by frustration-free configurations.
  double minimum_possible_energy() const;

  // (target - E_mpe) / (2J). Rejects targets below E_mpe and targets that are
  // not an integer number of double-flips away from it.
  int required_flips(double target_energy) const;

  // Index of the coupling in couplings() holding the unordered pair {n, m}.
  int coupling_index(int n, int m) const;

 private:
  int n_spins_;
  double j_;
  std::vector<Coupling> couplings_;
};

class Spectrum {
 public:
  struct Level {
    long long energy_units = 0;
    int64_t degeneracy = 0;
    std::vector<uint32_t> codes;  // ascending = lexicographic spin order
  };

  Spectrum(int n_spins, double j, std::vector<Level> levels);

  int n_spins() const { return n_spins_; }
  size_t level_count() const { return levels_.size(); }
  const Level& level(size_t i) const { return levels_.at(i); }
  double energy(size_t i) const { return j_ * static_cast<double>(levels_.at(i).energy_units); }
  double ground_energy() const { return energy(0); }
  int64_t ground_degeneracy() const { return levels_.at(0).degeneracy; }

  std::vector<SpinConfig> configs(size_t level_index) const;

 private:
  int n_spins_;
  double j_;
  std::vector<Level> levels_;
};

// Full enumeration of all 2^N configurations, grouped by energy. Guarded at
// n_spins <= 24. The parallel version enumerates in per-thread code ranges and
// merges deterministically; both orderings are identical.
Spectrum solve_exact(const IsingModel& model);
Spectrum solve_exact_serial(const IsingModel& model);

}  // namespace cim
