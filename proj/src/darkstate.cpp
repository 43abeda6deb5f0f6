#include "cim/darkstate.hpp"

#include <cmath>
#include <stdexcept>

namespace cim {

cxd channel_residual(const DissipativeChannel& channel, std::span<const cxd> assignment) {
  cxd v = 0.0;
  for (const auto& e : channel.coefficients) v += e.coeff * assignment[e.mode];
  return v;
}

std::vector<DarkComponent> construct_dark_components(const IsingModel& model,
                                                     const PhaseMap& phases, double alpha) {
  if (static_cast<int>(phases.size()) != model.coupling_count())
    throw std::invalid_argument("construct_dark_components: phase map incomplete");
  if (!(alpha > 0)) throw std::invalid_argument("construct_dark_components: alpha must be positive");

  const Spectrum sp = solve_exact(model);
  const std::vector<SpinConfig> ground = sp.configs(0);

  std::vector<DarkComponent> out;
  out.reserve(ground.size());
  const int n = model.n_spins();
  int label = 1;
  for (const auto& cfg : ground) {
    int unsat = -1;
    for (int k = 0; k < model.coupling_count(); ++k) {
      const auto& c = model.couplings()[k];
      if (c.sign * cfg.spins[c.n] * cfg.spins[c.m] > 0) {
        if (unsat >= 0)
          throw std::invalid_argument(
              "construct_dark_components: ground state leaves more than one coupling "
              "unsatisfied (not a single-flip model)");
        unsat = k;
      }
    }
    if (unsat < 0)
      throw std::invalid_argument(
          "construct_dark_components: ground state is frustration-free (nothing to flip)");

    DarkComponent comp;
    comp.label = label++;
    comp.signal_config = cfg;
    comp.unsatisfied_coupling = unsat;
    comp.assignment.resize(n + 2);
    for (int i = 0; i < n; ++i) comp.assignment[i] = alpha * static_cast<double>(cfg.spins[i]);
    // Only the unsatisfied coupling contributes to the channel sums; solving
    // both conjugate channels for the ancilla pair:
    const auto& c = model.couplings()[unsat];
    const cxd rot = std::polar(1.0, phases[unsat]);
    const cxd partial =
        comp.assignment[c.n] + static_cast<double>(c.sign) * comp.assignment[c.m];
    comp.assignment[n] = -0.5 * rot * partial;              // a_ani
    comp.assignment[n + 1] = -0.5 * std::conj(rot) * partial;  // a_ans
    out.push_back(std::move(comp));
  }
  return out;
}

cxd coherent_overlap(std::span<const cxd> a, std::span<const cxd> b) {
  if (a.size() != b.size()) throw std::invalid_argument("coherent_overlap: size mismatch");
  cxd log_ov = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    log_ov += -0.5 * (std::norm(a[k]) + std::norm(b[k])) + std::conj(b[k]) * a[k];
  }
  return std::exp(log_ov);
}

GramResult gram_normalize(const std::vector<DarkComponent>& components) {
  const size_t n = components.size();
  if (n == 0) throw std::invalid_argument("gram_normalize: no components");
  std::vector<cxd> gram(n * n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t k = 0; k < n; ++k) {
      gram[i * n + k] = coherent_overlap(components[k].assignment, components[i].assignment);
      if (i != k && std::abs(gram[i * n + k]) > 1.0 - 1e-12)
        throw std::invalid_argument("gram_normalize: components coincide (singular Gram matrix)");
    }
  }
  cxd total = 0.0;
  for (const cxd& g : gram) total += g;
  const double norm_sq = total.real();
  if (!(norm_sq > 0)) throw std::invalid_argument("gram_normalize: singular Gram matrix");

  GramResult res;
  res.norm_constant = std::sqrt(norm_sq);
  res.delta = res.norm_constant - std::sqrt(static_cast<double>(n));
  res.coefficients.assign(n, cxd(1.0 / res.norm_constant, 0.0));
  return res;
}

std::vector<cxd> dark_state_vector(const FockBasis& basis,
                                   const std::vector<DarkComponent>& components) {
  if (components.empty()) throw std::invalid_argument("dark_state_vector: no components");
  std::vector<cxd> psi(basis.dim, 0.0);
  std::vector<cxd> rotated(basis.n_modes);
  const cxd iu(0.0, 1.0);
  for (const auto& comp : components) {
    if (static_cast<int>(comp.assignment.size()) != basis.n_modes)
      throw std::invalid_argument("dark_state_vector: component/basis mode mismatch");
    for (int k = 0; k < basis.n_modes; ++k) rotated[k] = iu * comp.assignment[k];
    const std::vector<cxd> vec = coherent_product_state(basis, rotated);
    for (size_t i = 0; i < basis.dim; ++i) psi[i] += vec[i];
  }
  double nrm = 0.0;
  for (const cxd& v : psi) nrm += std::norm(v);
  nrm = std::sqrt(nrm);
  for (cxd& v : psi) v /= nrm;
  return psi;
}

std::pair<double, double> coherence_advantage(int n_det, int n_solution) {
  if (n_det < 1 || n_det > n_solution)
    throw std::invalid_argument("coherence_advantage: need 1 <= n_det <= n_solution");
  return {2.0 * std::sqrt(static_cast<double>(n_det)) / n_solution, 1.0 / n_solution};
}

}  // namespace cim
