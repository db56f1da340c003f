#pragma once

#include <optional>
#include <vector>

#include "serskit/self_energy.hpp"
#include "serskit/types.hpp"

namespace sers::dda {

/// Discretized particle: absolute voxel positions (molecule at the origin)
/// with a shared Drude dielectric. Built from a VoxelizedParticle whose
/// voxel positions are relative to the particle center at -separation.
struct VoxelLattice {
  std::vector<Vec3> positions;
  std::vector<double> volumes;
  DrudeParameters drude;
  bool radiative_correction = true;

  static VoxelLattice from_particle(const VoxelizedParticle& particle,
                                    const Geometry& geometry);
  int size() const { return static_cast<int>(positions.size()); }
};

/// Per-voxel Clausius-Mossotti polarizability from the Drude dielectric,
/// with the optional radiative-reaction correction
/// alpha = alpha_CM / (1 - (2/3) i k^3 alpha_CM). Throws
/// ResonanceSingularityError at the eps = -2 voxel plasmon resonance.
Tensor3 voxel_polarizability(const DrudeParameters& drude, double volume,
                             double omega, bool radiative_correction = true);

/// Dense 3N x 3N coupling operator A_jk = alpha_j^-1 delta_jk - Lambda'_jk.
Eigen::MatrixXcd assemble_system(const VoxelLattice& lattice, double omega);

struct SolverOptions {
  /// Dense LU at or below this voxel count, matrix-free BiCGSTAB above.
  int dense_threshold = 2000;
  int max_iterations = 0;  // 0: default 10 sqrt(3N)
  double residual_tol = 1e-10;
};

/// Induced voxel dipoles for the stacked right-hand side E0_j + EM_j.
/// The returned solution satisfies |A p - B| / |B| < residual_tol.
std::vector<Vec3c> solve_induced_dipoles(const VoxelLattice& lattice,
                                         double omega,
                                         const std::vector<Vec3c>& e0_at_voxels,
                                         const std::vector<Vec3c>& em_at_voxels,
                                         const SolverOptions& opts = {});

/// Superposed near field sum_j Lambda_j . p_j at the molecular origin.
Vec3c particle_field_at_molecule(const VoxelLattice& lattice,
                                 const std::vector<Vec3c>& dipoles);

/// Reduced element of the dressed molecular polarization propagator,
///   delta_pr delta_sq / (w - e_p + e_s - D_pp + D_qq + (i/2)(G_pp + G_qq)),
/// with shifts and widths taken from the self-energy at the orbital
/// energies (slowly-varying approximation).
Complex interacting_polarization_propagator(const MolecularModel& model,
                                            const greens::RpaSelfEnergy& sigma,
                                            int p, int q, int r, int s,
                                            double omega);

/// First-order molecular dipole d^(1) = alpha(w) . E_total with the dressed
/// response kernel; a zero self-energy reduces it to the bare
/// molecular_polarizability contraction.
Vec3c molecular_induced_dipole(const MolecularModel& model,
                               const greens::RpaSelfEnergy& sigma,
                               const Vec3c& e_total, double omega, double eta);

struct ScfOptions {
  double mixing = 0.5;
  double tol = 1e-8;
  int max_iter = 100;
  SolverOptions solver;
};

struct ResponseState {
  std::vector<Vec3c> particle_dipoles;
  Vec3c molecular_dipole = Vec3c::Zero();
  int iterations = 0;
  double residual = 0.0;
};

/// Alternates the molecular response (driven by E0 + E_P) with the voxel
/// solve (driven by E0 + E_M) under linear mixing until the dipoles stop
/// changing. Throws NonConvergenceError with the residual history when the
/// coupled fixed point fails to contract within max_iter sweeps.
ResponseState self_consistent_solve(const MolecularModel& model,
                                    const greens::RpaSelfEnergy& sigma,
                                    const VoxelLattice& lattice, double omega,
                                    const Vec3c& e0, double eta,
                                    const ScfOptions& opts = {});

/// Lattice generators; voxel positions are relative to the particle center.
VoxelizedParticle make_block_lattice(const DrudeParameters& drude,
                                     const Eigen::Vector3i& counts,
                                     double spacing);
VoxelizedParticle make_sphere_lattice(const DrudeParameters& drude,
                                      double radius, double spacing);
VoxelizedParticle make_ellipsoid_lattice(const DrudeParameters& drude,
                                         const Vec3& semiaxes, double spacing);

}  // namespace sers::dda
