#include <cmath>
#include <stdexcept>

#include "serskit/dipole.hpp"
#include "serskit/self_energy.hpp"

namespace sers::greens {

RpaSelfEnergy::RpaSelfEnergy(const MolecularModel& model,
                             const Geometry& geometry, double omega0,
                             double eta, SigmaFlavor flavor, SigmaForm form)
    : n_(model.size()),
      omega0_(omega0),
      eta_(eta),
      mu_(model.chemical_potential()),
      flavor_(flavor),
      form_(form) {
  if (!(omega0 > 0.0)) {
    throw std::invalid_argument("plasma frequency must be positive");
  }
  if (!(eta > 0.0)) {
    throw std::invalid_argument("eta must be positive");
  }
  const Eigen::Matrix3d lambda = dipole_tensor(geometry.separation);
  const double r = geometry.separation.norm();

  // Simplified keeps the single Lambda contraction with the 1/r^3
  // prefactor of the simplified closed form; ExactContraction carries the
  // residue of the frequency integral through Lambda . Lambda.
  Tensor3 kernel;
  if (form == SigmaForm::Simplified) {
    kernel = (lambda / (2.0 * omega0 * r * r * r)).cast<Complex>();
  } else {
    kernel = (-(lambda * lambda) / (2.0 * omega0)).cast<Complex>();
  }

  energies_.resize(static_cast<size_t>(n_));
  occupations_.resize(static_cast<size_t>(n_));
  weights_.resize(static_cast<size_t>(n_));
  for (int s = 0; s < n_; ++s) {
    energies_[static_cast<size_t>(s)] = model.energy(s);
    occupations_[static_cast<size_t>(s)] = model.occupation(s);
    Eigen::MatrixXcd w(n_, n_);
    for (int p = 0; p < n_; ++p) {
      for (int q = 0; q < n_; ++q) {
        w(p, q) =
            (model.dipole(p, s).transpose() * kernel * model.dipole(s, q))
                .value();
      }
    }
    weights_[static_cast<size_t>(s)] = std::move(w);
  }
}

RpaSelfEnergy RpaSelfEnergy::zero(const MolecularModel& model) {
  RpaSelfEnergy sigma;
  sigma.n_ = model.size();
  sigma.mu_ = model.chemical_potential();
  sigma.scale_ = 0.0;
  return sigma;
}

RpaSelfEnergy RpaSelfEnergy::scaled(double s) const {
  RpaSelfEnergy copy = *this;
  copy.scale_ *= s;
  return copy;
}

Complex RpaSelfEnergy::eval_with_zeta(int p, int q, double omega,
                                      double zeta_hole,
                                      double zeta_particle) const {
  Complex acc(0.0, 0.0);
  for (size_t s = 0; s < weights_.size(); ++s) {
    const Complex w = weights_[s](p, q);
    if (w == Complex(0.0, 0.0)) continue;
    if (occupations_[s] == 1) {
      acc += w / Complex(energies_[s] - omega0_ - omega, zeta_hole * eta_);
    } else {
      acc += w / Complex(energies_[s] + omega0_ - omega, zeta_particle * eta_);
    }
  }
  return scale_ * acc;
}

Complex RpaSelfEnergy::eval(int p, int q, double omega) const {
  if (flavor_ == SigmaFlavor::TimeOrdered) {
    return eval_with_zeta(p, q, omega, +1.0, -1.0);
  }
  // Zero-temperature prescription: both poles shifted onto the retarded
  // branch above mu and the advanced branch below, so Im Sigma changes sign
  // exactly at the chemical potential.
  const double zeta = omega >= mu_ ? -1.0 : +1.0;
  return eval_with_zeta(p, q, omega, zeta, zeta);
}

Eigen::MatrixXcd RpaSelfEnergy::matrix(double omega) const {
  Eigen::MatrixXcd m(n_, n_);
  for (int p = 0; p < n_; ++p) {
    for (int q = 0; q < n_; ++q) {
      m(p, q) = eval(p, q, omega);
    }
  }
  return m;
}

Complex RpaSelfEnergy::retarded_diagonal(int p, double omega) const {
  return eval_with_zeta(p, p, omega, -1.0, -1.0);
}

std::vector<double> RpaSelfEnergy::pole_positions() const {
  std::vector<double> poles;
  poles.reserve(energies_.size());
  for (size_t s = 0; s < energies_.size(); ++s) {
    poles.push_back(occupations_[s] == 1 ? energies_[s] - omega0_
                                         : energies_[s] + omega0_);
  }
  return poles;
}

double level_shift(const RpaSelfEnergy& sigma, int p, double omega) {
  return sigma.eval(p, p, omega).real();
}

double level_width(const RpaSelfEnergy& sigma, int p, double omega) {
  return -2.0 * sigma.eval(p, p, omega).imag();
}

}  // namespace sers::greens
