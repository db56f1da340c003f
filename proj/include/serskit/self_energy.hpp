#pragma once

#include <vector>

#include "serskit/types.hpp"

namespace sers::greens {

/// Pole prescription of the frequency-dependent self-energy.
///
/// TimeOrdered follows the RPA closed form literally (+i eta on the hole
/// pole, -i eta on the particle pole). Retarded is the zero-temperature
/// prescription used for observables: the retarded branch above the
/// chemical potential and the advanced branch below it, so that
/// Im Sigma_pp(w) <= 0 for w > mu and >= 0 for w < mu. The real part is the
/// same for both.
enum class SigmaFlavor { TimeOrdered, Retarded };

/// Spatial contraction of the dipole tensors in the RPA self-energy.
///
/// Simplified keeps the single-Lambda contraction with a 1/r^3
/// prefactor; ExactContraction evaluates the full Lambda . Lambda double
/// contraction of the frequency integral by residues at +-Omega0. The two
/// are not equal for the stated Lambda (see dipole_tensor tests); both are
/// kept behind this switch.
enum class SigmaForm { Simplified, ExactContraction };

/// RPA image self-energy Sigma*_pq(w) of a molecule coupled to a plasmonic
/// particle through the dipole tensor. Per orbital pair it is a sum over
/// intermediate states s of a weight times
///   rho_s /(e_s - Omega0 - w + i eta) + (1 - rho_s)/(e_s + Omega0 - w -+ i eta).
/// Immutable and cheap to evaluate; safe to share across threads.
class RpaSelfEnergy {
 public:
  RpaSelfEnergy(const MolecularModel& model, const Geometry& geometry,
                double omega0, double eta,
                SigmaFlavor flavor = SigmaFlavor::Retarded,
                SigmaForm form = SigmaForm::Simplified);

  /// Decoupled limit (all weights zero); eval returns 0 for every argument.
  static RpaSelfEnergy zero(const MolecularModel& model);

  /// Copy with the overall coupling multiplied by s.
  RpaSelfEnergy scaled(double s) const;

  Complex eval(int p, int q, double omega) const;
  Eigen::MatrixXcd matrix(double omega) const;

  /// Diagonal element on the proper retarded branch (all poles in the lower
  /// half plane) regardless of flavor; Re - i|Im| of the Retarded flavor.
  Complex retarded_diagonal(int p, double omega) const;

  /// Real parts of the Sigma poles, e_s -+ Omega0 over intermediate states.
  std::vector<double> pole_positions() const;

  SigmaFlavor flavor() const { return flavor_; }
  SigmaForm form() const { return form_; }
  double eta() const { return eta_; }
  double chemical_potential() const { return mu_; }
  int size() const { return n_; }

 private:
  RpaSelfEnergy() = default;
  Complex eval_with_zeta(int p, int q, double omega, double zeta_hole,
                         double zeta_particle) const;

  int n_ = 0;
  double omega0_ = 1.0;
  double eta_ = 1e-3;
  double mu_ = 0.0;
  double scale_ = 1.0;
  SigmaFlavor flavor_ = SigmaFlavor::Retarded;
  SigmaForm form_ = SigmaForm::Simplified;
  std::vector<double> energies_;
  std::vector<int> occupations_;
  std::vector<Eigen::MatrixXcd> weights_;  // one n x n matrix per state s
};

/// Delta^P_p(w) = Re Sigma_pp(w): frequency-dependent level shift.
double level_shift(const RpaSelfEnergy& sigma, int p, double omega);

/// Gamma^P_p(w) = -2 Im Sigma_pp(w): plasmon emission/absorption broadening.
/// With the Retarded flavor this changes sign at the chemical potential;
/// it is nonnegative at the energies of unoccupied orbitals.
double level_width(const RpaSelfEnergy& sigma, int p, double omega);

}  // namespace sers::greens
