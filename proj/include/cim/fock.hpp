// Truncated Fock spaces and operators for the quantum runs.
//
// The basis is a per-mode box truncation with an optional total-quanta cap;
// states are grouped into lines that are contiguous in the level of mode 0.
// Operators factor into at most two ladder actions, which is enough for
// two-photon pumps and losses, pair channels, and linear collective losses.
#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "cim/builders.hpp"

namespace cim {

int default_fock_cutoff(double alpha_sq);     // ceil(a + 6*sqrt(a) + 4)
int default_total_cap(double total_alpha_sq); // same margin on the total quanta

struct FockBasis {
  int n_modes = 0;
  std::vector<int> dims;
  int total_cap = -1;  // -1: no cap

  size_t dim = 0;            // admissible states
  int d0 = 0;                // dims[0]; mode 0 is the fast index
  size_t prefix_count = 0;   // product of dims[1..]
  std::vector<int64_t> pstride;       // prefix stride per mode (0 for mode 0)
  std::vector<int64_t> line_offset;   // per prefix; length prefix_count
  std::vector<int> line_len;          // per prefix; 0 when excluded by the cap
  std::vector<uint8_t> line_levels;   // per prefix: levels of modes 1..n-1

  static FockBasis make(std::vector<int> dims, int total_cap = -1);

  // -1 when the level vector is outside the truncation.
  int64_t index_of(std::span<const int> levels) const;
  std::vector<int> levels_of(int64_t index) const;
};

// Sum of scalar + weighted ladder terms; each term touches at most two modes.
// delta is the level change of the state (+1 creation, -1 annihilation,
// +-2 for the squared operators on a single mode).
struct FockTerm {
  cxd w = 0.0;
  int mode1 = -1;
  int delta1 = 0;
  int mode2 = -1;
  int delta2 = 0;
};

struct FockOperator {
  cxd identity = 0.0;
  std::vector<FockTerm> terms;

  static FockOperator annihilate(int mode);
  static FockOperator annihilate_sq(int mode);
  static FockOperator pair_annihilate(int mode_a, int mode_b);
  static FockOperator linear_combination(const std::vector<std::pair<int, cxd>>& coeffs);

  // out = (this + extra_identity) * in, with explicit bounds checks. This is
  // the reference application path; the propagator uses a fused kernel.
  void apply(const FockBasis& basis, std::span<const cxd> in, std::span<cxd> out,
             cxd extra_identity = 0.0) const;
  double apply_norm(const FockBasis& basis, std::span<const cxd> in, std::span<cxd> out,
                    cxd extra_identity = 0.0) const;
};

// Per-mode truncated coherent coefficients exp(-|a|^2/2) a^n / sqrt(n!).
std::vector<cxd> coherent_coefficients(cxd alpha, int dim);

// Product of per-mode coherent states, laid out on the basis (not
// renormalised after truncation).
std::vector<cxd> coherent_product_state(const FockBasis& basis, std::span<const cxd> alphas);

std::vector<double> mean_photon_numbers(const FockBasis& basis, std::span<const cxd> psi);

// Population on the truncation boundary (any mode at its top level, or the
// total-quanta cap). The validity monitor for cutoff overflow.
double boundary_population(const FockBasis& basis, std::span<const cxd> psi);

// A quantum network: degenerate modes with two-photon pump and loss,
// nondegenerate pairs with the cross pump and pair loss, linear collective
// channels, and optional single-photon loss. One shared pump amplitude S(t)
// drives every parametric term.
struct FockNetwork {
  FockBasis basis;
  double gamma_tp = 1.0;  // two-photon loss, degenerate modes
  double gamma_nd = 1.0;  // pair loss, nondegenerate pairs
  double gamma_s = 0.0;   // single-photon loss on every mode

  std::vector<int> dopo_modes;
  std::vector<std::pair<int, int>> ndopo_pairs;
  struct Collective {
    std::vector<std::pair<int, cxd>> coeffs;
    double rate = 0.0;
  };
  std::vector<Collective> collective;

  // The propagator may displace the two-photon jump operators by the
  // instantaneous steady amplitude; the displaced and plain forms generate
  // the same ensemble.
  bool displaced_frame = true;

  void validate() const;
};

// The 3-signal + 1-NDOPO-pair network with the conjugate channel pair, in the
// quantum convention (amplitudes on the rotated axis).
FockNetwork fock_hyperspin_network(const IsingModel& model, const PhaseMap& phases,
                                   double gamma, double gamma_c, int cutoff,
                                   int total_cap = -1);

FockNetwork fock_single_dopo(double gamma, int cutoff);
FockNetwork fock_afm_pair(double gamma, double gamma_c, int cutoff);

}  // namespace cim
