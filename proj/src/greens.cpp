#include <cmath>
#include <sstream>
#include <stdexcept>

#include "serskit/dipole.hpp"
#include "serskit/errors.hpp"
#include "serskit/greens.hpp"

namespace sers::greens {

namespace {

Tensor3 outer(const Vec3c& a, const Vec3c& b) { return a * b.transpose(); }

/// Occupation-free resonance kernel 1/(w + e_q - e_r + i eta), the reduced
/// (r,q) propagator element entering the enhancement denominators.
Complex resonance_kernel(const MolecularModel& model, int r, int q,
                         double omega, double eta) {
  return 1.0 / Complex(omega + model.energy(q) - model.energy(r), eta);
}

struct FactorPair {
  Tensor3 g = Tensor3::Identity();
  Tensor3 g_prime = Tensor3::Identity();
};

/// g and g' for intermediate r, reference q, from precomputed Lambda and
/// RPA polarizabilities at +w_k and -w_k'.
FactorPair make_factors(const MolecularModel& model, const RpaSelfEnergy& sigma,
                        const Tensor3& lambda, const Tensor3& alpha_k,
                        const Tensor3& alpha_kp, int q, int r, double omega_k,
                        double omega_kp, double eta) {
  const double eq = model.energy(q);
  const Complex den_k = 1.0 - resonance_kernel(model, r, q, omega_k, eta) *
                                  sigma.eval(r, r, eq + omega_k);
  const Complex den_kp = 1.0 - resonance_kernel(model, r, q, -omega_kp, eta) *
                                   sigma.eval(r, r, eq - omega_kp);
  if (std::abs(den_k) < 1e-12 || std::abs(den_kp) < 1e-12) {
    std::ostringstream msg;
    msg << "enhancement denominator is singular for intermediate r=" << r
        << ", q=" << q;
    throw ResonanceSingularityError(msg.str());
  }
  FactorPair f;
  f.g = (Tensor3::Identity() + lambda * alpha_k) / den_k;
  f.g_prime = (Tensor3::Identity() + alpha_kp * lambda) / den_kp;
  return f;
}

struct ParticleContext {
  Tensor3 lambda;
  Tensor3 alpha_k;
  Tensor3 alpha_kp;
  RpaSelfEnergy sigma;
};

/// Vibronic SERS amplitude sum over modes J and diagonal intermediates r:
///   sum_{J,r} <nu'|Q-Q0|nu> eps'* . g'_rq . d(alpha_pq,rr)/dQ_J . g_rq . eps
/// With no particle the enhancement factors drop out exactly and the sum is
/// the normal Raman amplitude.
Complex vibronic_amplitude(const MolecularModel& model,
                           const ParticleContext* particle,
                           const std::vector<VibrationalMode>& modes,
                           const RamanTransition& t, const FieldConfig& field) {
  const double eta = field.eta;
  const double wk = field.incident.frequency;
  const double wkp = field.scattered.frequency;
  const Vec3c& inc = field.incident.polarization;
  const Vec3c& sc = field.scattered.polarization;

  Complex amplitude(0.0, 0.0);
  for (const VibrationalMode& mode : modes) {
    if (mode.displaced_plus.size() != model.size() ||
        mode.displaced_minus.size() != model.size()) {
      throw std::invalid_argument(
          "displaced models must share the molecule's orbital count");
    }
    const double melem = vibrational_matrix_element(mode, t.nu, t.nu_prime);
    if (melem == 0.0) continue;
    const double inv_step = 1.0 / (2.0 * mode.delta);
    for (int r = 0; r < model.size(); ++r) {
      const Tensor3 dalpha =
          (transition_polarizability(mode.displaced_plus, t.p, t.q, r, wk, wkp,
                                     eta) -
           transition_polarizability(mode.displaced_minus, t.p, t.q, r, wk,
                                     wkp, eta)) *
          inv_step;
      if (particle != nullptr) {
        const FactorPair f =
            make_factors(model, particle->sigma, particle->lambda,
                         particle->alpha_k, particle->alpha_kp, t.q, r, wk,
                         wkp, eta);
        amplitude += melem * sc.dot(f.g_prime * dalpha * f.g * inc);
      } else {
        amplitude += melem * sc.dot(dalpha * inc);
      }
    }
  }
  return amplitude;
}

ParticleContext make_particle_context(const MolecularModel& model,
                                      const AnalyticRpa& particle,
                                      const Geometry& geometry,
                                      const FieldConfig& field,
                                      const QuantumOptions& opts) {
  const double wk = field.incident.frequency;
  const double wkp = field.scattered.frequency;
  return ParticleContext{
      dipole_tensor(geometry.separation).cast<Complex>(),
      rpa_polarizability(particle.drude.omega0, particle.drude.gamma, wk),
      rpa_polarizability(particle.drude.omega0, particle.drude.gamma, -wkp),
      RpaSelfEnergy(model, geometry, particle.drude.omega0, field.eta,
                    opts.flavor, opts.form)
          .scaled(opts.self_energy_scale)};
}

}  // namespace

Complex hf_greens_retarded(const MolecularModel& model, int p, double omega,
                           double eta) {
  return 1.0 / Complex(omega - model.energy(p), eta);
}

Complex polarization_propagator_retarded(const MolecularModel& model, int r,
                                         int q, double omega, double eta) {
  const double occ = model.occupation(q) - model.occupation(r);
  return occ / Complex(omega + model.energy(q) - model.energy(r), eta);
}

Complex polarization_propagator_time_ordered(const MolecularModel& model,
                                             int r, int q, double omega,
                                             double eta) {
  const double rho_r = model.occupation(r);
  const double rho_q = model.occupation(q);
  const double de = model.energy(q) - model.energy(r);
  return (1.0 - rho_r) * rho_q / Complex(omega + de, eta) -
         rho_r * (1.0 - rho_q) / Complex(omega + de, -eta);
}

Tensor3 molecular_polarizability(const MolecularModel& model, double omega,
                                 double eta) {
  Tensor3 alpha = Tensor3::Zero();
  for (int p = 0; p < model.size(); ++p) {
    if (!model.occupied(p)) continue;
    for (int q = 0; q < model.size(); ++q) {
      const double de = model.energy(q) - model.energy(p);
      alpha += outer(model.dipole(q, p), model.dipole(p, q)) /
                   Complex(de + omega, eta) +
               outer(model.dipole(p, q), model.dipole(q, p)) /
                   Complex(de - omega, -eta);
    }
  }
  return alpha;
}

Tensor3 transition_polarizability(const MolecularModel& model, int p, int q,
                                  int r, double omega_k, double omega_kp,
                                  double eta) {
  const double de = model.energy(q) - model.energy(r);
  return -(outer(model.dipole(p, r), model.dipole(r, q)) /
               Complex(de + omega_k, eta) +
           outer(model.dipole(r, q), model.dipole(p, r)) /
               Complex(de - omega_kp, eta));
}

Tensor3 transition_polarizability_pair(const MolecularModel& model, int p,
                                       int q, int r, int s, double omega_k,
                                       double omega_kp, double eta) {
  if (model.occupation(r) != model.occupation(s)) {
    throw std::invalid_argument(
        "particle-hole intermediate pairs do not contribute to Raman "
        "scattering and are rejected");
  }
  if (r != s) return Tensor3::Zero();
  return transition_polarizability(model, p, q, r, omega_k, omega_kp, eta);
}

Tensor3 rpa_polarizability(double omega0, double gamma, Complex omega) {
  const Complex denom = omega * (omega + Complex(0.0, gamma)) - omega0 * omega0;
  return (-1.0 / denom) * Tensor3::Identity();
}

GreensValue interacting_greens(const RpaSelfEnergy& sigma,
                               const MolecularModel& model, int p, int q,
                               double omega) {
  const Complex spp = sigma.eval(p, p, omega);
  if (p == q) {
    return {1.0 / (omega - model.energy(p) - spp), true};
  }
  const Complex sqq = sigma.eval(q, q, omega);
  const Complex spq = sigma.eval(p, q, omega);
  const bool ok = std::abs(spq) <= 0.5 * std::abs(spp) &&
                  std::abs(spq) <= 0.5 * std::abs(sqq);
  if (model.occupation(p) == model.occupation(q)) {
    // Weak-coupling block inverse keeps equal-occupation blocks diagonal.
    return {Complex(0.0, 0.0), ok};
  }
  const Complex gpp = 1.0 / (omega - model.energy(p) - spp);
  const Complex gqq = 1.0 / (omega - model.energy(q) - sqq);
  return {gpp * spq * gqq, ok};
}

std::vector<Complex> quasiparticle_energies(const RpaSelfEnergy& sigma,
                                            const MolecularModel& model,
                                            double tol, int max_iter,
                                            double damping) {
  std::vector<Complex> result;
  result.reserve(static_cast<size_t>(model.size()));
  for (int p = 0; p < model.size(); ++p) {
    Complex eps(model.energy(p), 0.0);
    std::vector<double> residuals;
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
      const Complex target =
          model.energy(p) + sigma.eval(p, p, eps.real());
      const double residual = std::abs(target - eps);
      residuals.push_back(residual);
      if (residual < tol) {
        converged = true;
        break;
      }
      eps += damping * (target - eps);
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "quasiparticle fixed point for orbital " << p
          << " did not converge; last iterates " << eps << " and "
          << model.energy(p) + sigma.eval(p, p, eps.real());
      throw NonConvergenceError(msg.str(), residuals);
    }
    result.push_back(eps);
  }
  return result;
}

EnhancementFactors enhancement_factors(const MolecularModel& model,
                                       const DrudeParameters& drude,
                                       const Geometry& geometry, int q, int r,
                                       double omega_k, double omega_kp,
                                       double eta, const QuantumOptions& opts) {
  const Tensor3 lambda = dipole_tensor(geometry.separation).cast<Complex>();
  const RpaSelfEnergy sigma =
      RpaSelfEnergy(model, geometry, drude.omega0, eta, opts.flavor, opts.form)
          .scaled(opts.self_energy_scale);
  const Tensor3 alpha_k = rpa_polarizability(drude.omega0, drude.gamma, omega_k);
  const Tensor3 alpha_kp =
      rpa_polarizability(drude.omega0, drude.gamma, -omega_kp);
  const FactorPair f = make_factors(model, sigma, lambda, alpha_k, alpha_kp, q,
                                    r, omega_k, omega_kp, eta);
  return {f.g, f.g_prime};
}

double normal_raman_intensity(const MolecularModel& model,
                              const std::vector<VibrationalMode>& modes,
                              const RamanTransition& transition,
                              const FieldConfig& field) {
  const Complex amplitude =
      vibronic_amplitude(model, nullptr, modes, transition, field);
  return intensity_prefactor(field) * std::norm(amplitude);
}

Complex sers_tmatrix(const MolecularModel& model,
                     const std::optional<AnalyticRpa>& particle,
                     const Geometry& geometry,
                     const std::vector<VibrationalMode>& modes,
                     const RamanTransition& transition,
                     const FieldConfig& field, const QuantumOptions& opts) {
  if (!particle.has_value()) {
    return -vibronic_amplitude(model, nullptr, modes, transition, field);
  }
  const ParticleContext ctx =
      make_particle_context(model, *particle, geometry, field, opts);
  return -vibronic_amplitude(model, &ctx, modes, transition, field);
}

double sers_intensity(const MolecularModel& model,
                      const std::optional<AnalyticRpa>& particle,
                      const Geometry& geometry,
                      const std::vector<VibrationalMode>& modes,
                      const RamanTransition& transition,
                      const FieldConfig& field, const QuantumOptions& opts) {
  const Complex t =
      sers_tmatrix(model, particle, geometry, modes, transition, field, opts);
  return intensity_prefactor(field) * std::norm(t);
}

}  // namespace sers::greens
