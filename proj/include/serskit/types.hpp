#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <variant>
#include <vector>

namespace sers {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Vec3c = Eigen::Vector3cd;
using Tensor3 = Eigen::Matrix3cd;

/// Energies and angular frequencies in Hartree atomic units
/// (hbar = e = m_e = 1, so the two are numerically identical).
using Frequency = double;

namespace constants {
inline constexpr double speed_of_light = 137.035999;  // atomic units
}

struct Orbital {
  double energy = 0.0;  // hartree
  int occupation = 0;   // 0 or 1 (zero temperature)

  bool operator==(const Orbital&) const = default;
};

/// Hartree-Fock input data for the molecule: orbital energies, occupations
/// and dipole matrix elements <p|-e x|q>. Immutable after construction;
/// the constructor enforces dipole Hermiticity, binary occupations and the
/// ordering occupied energies <= mu <= unoccupied energies.
class MolecularModel {
 public:
  MolecularModel(std::vector<Orbital> orbitals, std::vector<Vec3c> dipole,
                 double chemical_potential);

  int size() const { return static_cast<int>(orbitals_.size()); }
  double energy(int p) const { return orbitals_[static_cast<size_t>(p)].energy; }
  int occupation(int p) const { return orbitals_[static_cast<size_t>(p)].occupation; }
  bool occupied(int p) const { return occupation(p) == 1; }
  double chemical_potential() const { return mu_; }
  const std::vector<Orbital>& orbitals() const { return orbitals_; }

  /// <p|-e x|q>, row-major over (p, q).
  const Vec3c& dipole(int p, int q) const {
    return dipole_[static_cast<size_t>(p) * orbitals_.size() + static_cast<size_t>(q)];
  }

  std::vector<int> holes() const;
  std::vector<int> particles() const;

  bool operator==(const MolecularModel& other) const;

 private:
  std::vector<Orbital> orbitals_;
  std::vector<Vec3c> dipole_;  // size n*n
  double mu_ = 0.0;
};

/// One harmonic normal mode plus the two geometry-displaced electronic
/// models used for central finite differences of polarizabilities.
struct VibrationalMode {
  int index = 0;
  double omega = 0.0;         // hartree
  double reduced_mass = 0.0;  // m_e
  double delta = 0.0;         // mass-weighted displacement step
  MolecularModel displaced_plus;
  MolecularModel displaced_minus;
};

struct DrudeParameters {
  double omega0 = 0.0;  // bulk plasma frequency, hartree
  double gamma = 0.0;   // Drude damping, hartree
};

struct Voxel {
  Vec3 position = Vec3::Zero();  // relative to the particle center, a0
  double volume = 0.0;           // a0^3
};

struct AnalyticRpa {
  DrudeParameters drude;
};

struct VoxelizedParticle {
  DrudeParameters drude;
  std::vector<Voxel> voxels;
};

using ParticleModel = std::variant<AnalyticRpa, VoxelizedParticle>;

/// Molecule-particle separation x1 - x2 with the molecule at the origin.
struct Geometry {
  Vec3 separation = Vec3::Zero();  // a0
};

struct PlaneWave {
  Frequency frequency = 0.0;
  Vec3c polarization = Vec3c::UnitZ();  // unit vector
};

struct FieldConfig {
  PlaneWave incident;
  PlaneWave scattered;
  int photon_occupancy = 0;  // N' of the scattered mode
  double eta = 1e-3;         // finite stand-in for the positive infinitesimal
};

/// Common w_k w_k'^3 / c^4 (N' + 1) intensity-ratio prefactor.
inline double intensity_prefactor(const FieldConfig& field) {
  const double c = constants::speed_of_light;
  const double wk = field.incident.frequency;
  const double wkp = field.scattered.frequency;
  return wk * wkp * wkp * wkp / (c * c * c * c) *
         static_cast<double>(field.photon_occupancy + 1);
}

}  // namespace sers
