#include <cmath>
#include <stdexcept>

#include "serskit/dipole.hpp"
#include "serskit/errors.hpp"
#include "serskit/types.hpp"

namespace sers {

namespace {
constexpr double kHermiticityTol = 1e-10;
}

MolecularModel::MolecularModel(std::vector<Orbital> orbitals,
                               std::vector<Vec3c> dipole,
                               double chemical_potential)
    : orbitals_(std::move(orbitals)),
      dipole_(std::move(dipole)),
      mu_(chemical_potential) {
  const size_t n = orbitals_.size();
  if (n == 0) {
    throw std::invalid_argument("molecular model has no orbitals");
  }
  if (dipole_.size() != n * n) {
    throw std::invalid_argument("dipole matrix does not match orbital count");
  }
  if (!std::isfinite(mu_)) {
    throw std::invalid_argument("chemical potential is not finite");
  }

  bool any_occupied = false;
  bool any_unoccupied = false;
  for (const Orbital& orb : orbitals_) {
    if (!std::isfinite(orb.energy)) {
      throw std::invalid_argument("orbital energy is not finite");
    }
    if (orb.occupation != 0 && orb.occupation != 1) {
      throw std::invalid_argument("occupations must be exactly 0 or 1");
    }
    if (orb.occupation == 1) {
      any_occupied = true;
      if (orb.energy > mu_) {
        throw std::invalid_argument(
            "occupied orbital lies above the chemical potential");
      }
    } else {
      any_unoccupied = true;
      if (orb.energy < mu_) {
        throw std::invalid_argument(
            "unoccupied orbital lies below the chemical potential");
      }
    }
  }
  if (!any_occupied || !any_unoccupied) {
    throw std::invalid_argument(
        "model needs at least one occupied and one unoccupied orbital");
  }

  for (size_t p = 0; p < n; ++p) {
    for (size_t q = p; q < n; ++q) {
      const Vec3c& dpq = dipole_[p * n + q];
      const Vec3c& dqp = dipole_[q * n + p];
      if (!dpq.allFinite() || !dqp.allFinite()) {
        throw std::invalid_argument("dipole matrix element is not finite");
      }
      if ((dpq - dqp.conjugate()).cwiseAbs().maxCoeff() > kHermiticityTol) {
        throw std::invalid_argument(
            "dipole matrix violates Hermiticity: <p|-ex|q> != conj(<q|-ex|p>)");
      }
    }
  }
}

bool MolecularModel::operator==(const MolecularModel& other) const {
  if (orbitals_ != other.orbitals_ || mu_ != other.mu_ ||
      dipole_.size() != other.dipole_.size()) {
    return false;
  }
  for (size_t i = 0; i < dipole_.size(); ++i) {
    if (dipole_[i] != other.dipole_[i]) return false;
  }
  return true;
}

std::vector<int> MolecularModel::holes() const {
  std::vector<int> idx;
  for (int p = 0; p < size(); ++p) {
    if (occupied(p)) idx.push_back(p);
  }
  return idx;
}

std::vector<int> MolecularModel::particles() const {
  std::vector<int> idx;
  for (int p = 0; p < size(); ++p) {
    if (!occupied(p)) idx.push_back(p);
  }
  return idx;
}

Eigen::Matrix3d dipole_tensor(const Vec3& separation) {
  const double r = separation.norm();
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::domain_error("dipole tensor needs a nonzero finite separation");
  }
  const Vec3 rhat = separation / r;
  return (3.0 * rhat * rhat.transpose() - Eigen::Matrix3d::Identity()) /
         (r * r * r);
}

double vibrational_matrix_element(const VibrationalMode& mode, int nu,
                                  int nu_prime) {
  if (nu < 0 || nu_prime < 0) {
    throw std::invalid_argument("vibrational quanta must be nonnegative");
  }
  const double scale = 2.0 * mode.reduced_mass * mode.omega;
  if (nu_prime == nu + 1) {
    return std::sqrt(static_cast<double>(nu + 1) / scale);
  }
  if (nu_prime == nu - 1) {
    return std::sqrt(static_cast<double>(nu) / scale);
  }
  return 0.0;
}

}  // namespace sers
