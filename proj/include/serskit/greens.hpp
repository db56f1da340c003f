#pragma once

#include <optional>
#include <vector>

#include "serskit/self_energy.hpp"
#include "serskit/types.hpp"

namespace sers::greens {

/// Bare retarded HF propagator 1/(w + i eta - e_p).
Complex hf_greens_retarded(const MolecularModel& model, int p, double omega,
                           double eta);

/// Reduced (r,q) element of the retarded HF polarization propagator with its
/// occupation factor, (rho_q - rho_r)/(w + i eta + e_q - e_r).
Complex polarization_propagator_retarded(const MolecularModel& model, int r,
                                         int q, double omega, double eta);

/// Time-ordered counterpart with the two-pole occupation structure.
Complex polarization_propagator_time_ordered(const MolecularModel& model,
                                             int r, int q, double omega,
                                             double eta);

/// Linear HF polarizability tensor alpha_M(w).
Tensor3 molecular_polarizability(const MolecularModel& model, double omega,
                                 double eta);

/// Transition polarizability [alpha_M]_pq,rr(w_k, -w_k') through the single
/// intermediate state r (both time orderings summed).
Tensor3 transition_polarizability(const MolecularModel& model, int p, int q,
                                  int r, double omega_k, double omega_kp,
                                  double eta);

/// Pair-resolved variant for the diagonal intermediate pair (r, s).
/// Particle-hole and hole-particle pairs do not contribute to Raman
/// scattering and are rejected with std::invalid_argument; r != s pairs of
/// equal occupation vanish.
Tensor3 transition_polarizability_pair(const MolecularModel& model, int p,
                                       int q, int r, int s, double omega_k,
                                       double omega_kp, double eta);

/// Isotropic RPA/Drude particle polarizability -1/(w(w + i gamma) - Omega0^2).
/// Pass a complex frequency to fold in an eta regularization.
Tensor3 rpa_polarizability(double omega0, double gamma, Complex omega);

/// Dressed one-body Green's function. Diagonal elements follow the Dyson
/// inverse 1/(w - e_p - Sigma_pp(w)); particle-hole off-diagonals follow the
/// weak-coupling block inverse; equal-occupation off-diagonals vanish.
/// weak_coupling_ok flags |Sigma_pq| <= 0.5 |Sigma_pp| for the requested pair.
struct GreensValue {
  Complex value;
  bool weak_coupling_ok = true;
};
GreensValue interacting_greens(const RpaSelfEnergy& sigma,
                               const MolecularModel& model, int p, int q,
                               double omega);

/// Diagonal quasiparticle energies: damped fixed point of
/// e <- e_p + Re Sigma_pp(Re e) - (i/2) Gamma_pp(Re e).
/// Throws NonConvergenceError (carrying the residual history) after
/// max_iter iterations.
std::vector<Complex> quasiparticle_energies(const RpaSelfEnergy& sigma,
                                            const MolecularModel& model,
                                            double tol = 1e-10,
                                            int max_iter = 200,
                                            double damping = 0.5);

struct QuantumOptions {
  SigmaFlavor flavor = SigmaFlavor::Retarded;
  SigmaForm form = SigmaForm::Simplified;
  /// Multiplies the image self-energy inside the enhancement denominators;
  /// 0 removes the image effect entirely.
  double self_energy_scale = 1.0;
};

/// Unitless incident/scattered enhancement factors g and g' for the
/// intermediate state r and reference state q. Both reduce to the identity
/// as the coupling vanishes. Throws ResonanceSingularityError when a
/// denominator collapses below 1e-12 in magnitude.
struct EnhancementFactors {
  Tensor3 g;
  Tensor3 g_prime;
};
EnhancementFactors enhancement_factors(const MolecularModel& model,
                                       const DrudeParameters& drude,
                                       const Geometry& geometry, int q, int r,
                                       double omega_k, double omega_kp,
                                       double eta,
                                       const QuantumOptions& opts = {});

/// Electronic states p <- q with vibrational quanta nu -> nu'.
struct RamanTransition {
  int p = 0;
  int q = 0;
  int nu = 0;
  int nu_prime = 1;
};

/// Normal Raman intensity ratio I/I0 of the bare molecule; polarizability
/// derivatives come from the central finite difference over each mode's
/// displaced models.
double normal_raman_intensity(const MolecularModel& model,
                              const std::vector<VibrationalMode>& modes,
                              const RamanTransition& transition,
                              const FieldConfig& field);

/// SERS transition amplitude <nu'|T|nu> with unit field amplitudes.
/// A disengaged particle (nullopt) reduces it to the normal Raman T-matrix.
Complex sers_tmatrix(const MolecularModel& model,
                     const std::optional<AnalyticRpa>& particle,
                     const Geometry& geometry,
                     const std::vector<VibrationalMode>& modes,
                     const RamanTransition& transition,
                     const FieldConfig& field, const QuantumOptions& opts = {});

/// SERS intensity ratio I_SERS/I0 from the enhanced T-matrix.
double sers_intensity(const MolecularModel& model,
                      const std::optional<AnalyticRpa>& particle,
                      const Geometry& geometry,
                      const std::vector<VibrationalMode>& modes,
                      const RamanTransition& transition,
                      const FieldConfig& field, const QuantumOptions& opts = {});

}  // namespace sers::greens
