#include <cmath>
#include <sstream>
#include <stdexcept>

#include "serskit/dda.hpp"
#include "serskit/dipole.hpp"
#include "serskit/errors.hpp"

namespace sers::dda {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

constexpr double kTinyNorm = 1e-300;

Tensor3 outer(const Vec3c& a, const Vec3c& b) { return a * b.transpose(); }

Complex voxel_polarizability_scalar(const DrudeParameters& drude,
                                    double volume, double omega,
                                    bool radiative_correction) {
  if (!(volume > 0.0)) {
    throw std::invalid_argument("voxel volume must be positive");
  }
  // Clausius-Mossotti with the Drude eps(w) = 1 - W0^2/(w(w+ig)) folded in:
  // (eps-1)/(eps+2) = -W0^2 / (3 w(w+ig) - W0^2), stable at w = 0.
  const double w0sq = drude.omega0 * drude.omega0;
  const Complex drude_den =
      3.0 * omega * Complex(omega, drude.gamma) - w0sq;
  if (std::abs(drude_den) < 1e-12 * w0sq) {
    throw ResonanceSingularityError(
        "voxel hits the eps = -2 plasmon resonance (Frohlich condition)");
  }
  const double pi = 3.14159265358979323846;
  Complex alpha = (3.0 * volume / (4.0 * pi)) * (-w0sq) / drude_den;
  if (radiative_correction) {
    const double k = omega / constants::speed_of_light;
    alpha = alpha / (1.0 - Complex(0.0, 2.0 / 3.0) * k * k * k * alpha);
  }
  return alpha;
}

VectorXcd stack_fields(const std::vector<Vec3c>& e0,
                       const std::vector<Vec3c>& em) {
  VectorXcd b(3 * static_cast<int>(e0.size()));
  for (size_t j = 0; j < e0.size(); ++j) {
    b.segment<3>(3 * static_cast<Eigen::Index>(j)) = e0[j] + em[j];
  }
  return b;
}

std::vector<Vec3c> unstack(const VectorXcd& x) {
  std::vector<Vec3c> out(static_cast<size_t>(x.size() / 3));
  for (size_t j = 0; j < out.size(); ++j) {
    out[j] = x.segment<3>(3 * static_cast<Eigen::Index>(j));
  }
  return out;
}

/// y = A x without materializing A: per voxel alpha_j^-1 x_j minus the
/// pairwise dipole-field coupling.
VectorXcd apply_lattice_operator(const VoxelLattice& lattice,
                                 const std::vector<Complex>& alpha_inv,
                                 const VectorXcd& x) {
  const int n = lattice.size();
  VectorXcd y(3 * n);
  for (int j = 0; j < n; ++j) {
    Vec3c acc = alpha_inv[static_cast<size_t>(j)] * x.segment<3>(3 * j);
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      const Eigen::Matrix3d coupling =
          dipole_tensor(lattice.positions[static_cast<size_t>(j)] -
                        lattice.positions[static_cast<size_t>(k)]);
      acc -= coupling.cast<Complex>() * x.segment<3>(3 * k);
    }
    y.segment<3>(3 * j) = acc;
  }
  return y;
}

/// Matrix-free BiCGSTAB, right-preconditioned by the per-voxel
/// polarizability (so the preconditioned operator is 1 - coupling).
VectorXcd bicgstab_solve(const VoxelLattice& lattice,
                         const std::vector<Complex>& alpha_inv,
                         const VectorXcd& b, int max_iterations, double tol) {
  const auto precondition = [&](const VectorXcd& v) {
    VectorXcd out(v.size());
    for (int j = 0; j < lattice.size(); ++j) {
      out.segment<3>(3 * j) =
          v.segment<3>(3 * j) / alpha_inv[static_cast<size_t>(j)];
    }
    return out;
  };
  const auto apply = [&](const VectorXcd& v) {
    return apply_lattice_operator(lattice, alpha_inv, precondition(v));
  };

  const double bnorm = b.norm();
  VectorXcd y = VectorXcd::Zero(b.size());
  VectorXcd r = b;
  const VectorXcd rhat = r;
  Complex rho(1.0, 0.0), alpha(1.0, 0.0), w(1.0, 0.0);
  VectorXcd v = VectorXcd::Zero(b.size());
  VectorXcd p = VectorXcd::Zero(b.size());
  std::vector<double> history;

  for (int it = 0; it < max_iterations; ++it) {
    const Complex rho_new = rhat.dot(r);
    if (rho_new == Complex(0.0, 0.0)) break;
    const Complex beta = (rho_new / rho) * (alpha / w);
    p = r + beta * (p - w * v);
    v = apply(p);
    alpha = rho_new / rhat.dot(v);
    const VectorXcd s = r - alpha * v;
    if (s.norm() / bnorm < tol) {
      y += alpha * p;
      return precondition(y);
    }
    const VectorXcd t = apply(s);
    w = t.dot(s) / t.dot(t);
    y += alpha * p + w * s;
    r = s - w * t;
    history.push_back(r.norm() / bnorm);
    if (history.back() < tol) {
      return precondition(y);
    }
    rho = rho_new;
  }
  throw NonConvergenceError(
      "iterative voxel solver did not reach the requested residual", history);
}

std::vector<Complex> voxel_alpha_inverses(const VoxelLattice& lattice,
                                          double omega) {
  std::vector<Complex> inv;
  inv.reserve(static_cast<size_t>(lattice.size()));
  for (int j = 0; j < lattice.size(); ++j) {
    const Complex a = voxel_polarizability_scalar(
        lattice.drude, lattice.volumes[static_cast<size_t>(j)], omega,
        lattice.radiative_correction);
    if (!(std::abs(a) > 0.0) || !std::isfinite(std::abs(a))) {
      std::ostringstream msg;
      msg << "voxel polarizability is not invertible at voxel " << j;
      throw ResonanceSingularityError(msg.str());
    }
    inv.push_back(1.0 / a);
  }
  return inv;
}

/// Dressed pair denominator: retarded self-energy on the first index,
/// advanced on the second, at the orbital energies.
Complex pair_denominator(const MolecularModel& model,
                         const greens::RpaSelfEnergy& sigma, int p, int q,
                         double omega, double eta) {
  const Complex sp = sigma.retarded_diagonal(p, model.energy(p));
  const Complex sq = sigma.retarded_diagonal(q, model.energy(q));
  return Complex(omega - model.energy(p) + model.energy(q), eta) - sp +
         std::conj(sq);
}

Tensor3 dressed_polarizability(const MolecularModel& model,
                               const greens::RpaSelfEnergy& sigma, double omega,
                               double eta) {
  Tensor3 alpha = Tensor3::Zero();
  for (int p = 0; p < model.size(); ++p) {
    if (!model.occupied(p)) continue;
    for (int q = 0; q < model.size(); ++q) {
      const Complex d1 = pair_denominator(model, sigma, p, q, omega, eta);
      // Anti-resonant partner: roles of p and q swap in the kernel.
      const Complex d2 = -pair_denominator(model, sigma, q, p, omega, eta);
      alpha += outer(model.dipole(q, p), model.dipole(p, q)) / d1 +
               outer(model.dipole(p, q), model.dipole(q, p)) / d2;
    }
  }
  return alpha;
}

}  // namespace

VoxelLattice VoxelLattice::from_particle(const VoxelizedParticle& particle,
                                         const Geometry& geometry) {
  VoxelLattice lattice;
  lattice.drude = particle.drude;
  const Vec3 center = -geometry.separation;  // molecule at the origin
  for (const Voxel& v : particle.voxels) {
    const Vec3 pos = center + v.position;
    if (!(pos.norm() > 0.0)) {
      throw std::invalid_argument("a voxel coincides with the molecule");
    }
    lattice.positions.push_back(pos);
    lattice.volumes.push_back(v.volume);
  }
  return lattice;
}

Tensor3 voxel_polarizability(const DrudeParameters& drude, double volume,
                             double omega, bool radiative_correction) {
  return voxel_polarizability_scalar(drude, volume, omega,
                                     radiative_correction) *
         Tensor3::Identity();
}

MatrixXcd assemble_system(const VoxelLattice& lattice, double omega) {
  const int n = lattice.size();
  const std::vector<Complex> alpha_inv = voxel_alpha_inverses(lattice, omega);
  MatrixXcd a = MatrixXcd::Zero(3 * n, 3 * n);
  for (int j = 0; j < n; ++j) {
    a.block<3, 3>(3 * j, 3 * j) =
        alpha_inv[static_cast<size_t>(j)] * Tensor3::Identity();
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      a.block<3, 3>(3 * j, 3 * k) =
          -dipole_tensor(lattice.positions[static_cast<size_t>(j)] -
                         lattice.positions[static_cast<size_t>(k)])
               .cast<Complex>();
    }
  }
  return a;
}

std::vector<Vec3c> solve_induced_dipoles(const VoxelLattice& lattice,
                                         double omega,
                                         const std::vector<Vec3c>& e0_at_voxels,
                                         const std::vector<Vec3c>& em_at_voxels,
                                         const SolverOptions& opts) {
  const int n = lattice.size();
  if (static_cast<int>(e0_at_voxels.size()) != n ||
      static_cast<int>(em_at_voxels.size()) != n) {
    throw std::invalid_argument("field arrays must match the voxel count");
  }
  const VectorXcd b = stack_fields(e0_at_voxels, em_at_voxels);
  if (b.norm() == 0.0) {
    return std::vector<Vec3c>(static_cast<size_t>(n), Vec3c::Zero());
  }

  VectorXcd x;
  if (n <= opts.dense_threshold) {
    const MatrixXcd a = assemble_system(lattice, omega);
    x = a.partialPivLu().solve(b);
    const double residual = (a * x - b).norm() / b.norm();
    if (!(residual < opts.residual_tol) || !x.allFinite()) {
      throw ResonanceSingularityError(
          "voxel system is singular or ill-conditioned at this frequency");
    }
  } else {
    const std::vector<Complex> alpha_inv = voxel_alpha_inverses(lattice, omega);
    const int max_iterations =
        opts.max_iterations > 0
            ? opts.max_iterations
            : static_cast<int>(10.0 * std::sqrt(3.0 * n)) + 1;
    x = bicgstab_solve(lattice, alpha_inv, b, max_iterations,
                       0.05 * opts.residual_tol);
    const double residual =
        (apply_lattice_operator(lattice, alpha_inv, x) - b).norm() / b.norm();
    if (!(residual < opts.residual_tol)) {
      throw NonConvergenceError("iterative voxel solve missed its residual",
                                {residual});
    }
  }
  return unstack(x);
}

Vec3c particle_field_at_molecule(const VoxelLattice& lattice,
                                 const std::vector<Vec3c>& dipoles) {
  if (dipoles.size() != lattice.positions.size()) {
    throw std::invalid_argument("dipole array must match the voxel count");
  }
  Vec3c field = Vec3c::Zero();
  for (size_t j = 0; j < dipoles.size(); ++j) {
    field += dipole_tensor(lattice.positions[j]).cast<Complex>() * dipoles[j];
  }
  return field;
}

Complex interacting_polarization_propagator(const MolecularModel& model,
                                            const greens::RpaSelfEnergy& sigma, int p,
                                            int q, int r, int s,
                                            double omega) {
  if (p != r || s != q) return Complex(0.0, 0.0);
  return 1.0 / pair_denominator(model, sigma, p, q, omega, 0.0);
}

Vec3c molecular_induced_dipole(const MolecularModel& model,
                               const greens::RpaSelfEnergy& sigma,
                               const Vec3c& e_total, double omega, double eta) {
  return dressed_polarizability(model, sigma, omega, eta) * e_total;
}

ResponseState self_consistent_solve(const MolecularModel& model,
                                    const greens::RpaSelfEnergy& sigma,
                                    const VoxelLattice& lattice, double omega,
                                    const Vec3c& e0, double eta,
                                    const ScfOptions& opts) {
  if (!(opts.mixing > 0.0 && opts.mixing <= 1.0)) {
    throw std::invalid_argument("mixing must lie in (0, 1]");
  }
  if (!(opts.tol > 0.0)) {
    throw std::invalid_argument("tolerance must be positive");
  }

  const Tensor3 alpha_mol = dressed_polarizability(model, sigma, omega, eta);
  const int n = lattice.size();
  ResponseState state;
  if (n == 0) {
    state.molecular_dipole = alpha_mol * e0;
    state.iterations = 1;
    state.residual = 0.0;
    return state;
  }

  std::vector<Tensor3> lambda_j;
  lambda_j.reserve(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    lambda_j.push_back(
        dipole_tensor(lattice.positions[static_cast<size_t>(j)])
            .cast<Complex>());
  }

  // The dense operator is frequency-fixed inside the loop; factor it once.
  std::optional<Eigen::PartialPivLU<MatrixXcd>> lu;
  if (n <= opts.solver.dense_threshold) {
    lu.emplace(assemble_system(lattice, omega));
  }
  const std::vector<Vec3c> e0_at_voxels(static_cast<size_t>(n), e0);

  state.particle_dipoles.assign(static_cast<size_t>(n), Vec3c::Zero());
  Vec3c d = Vec3c::Zero();
  std::vector<double> history;
  const double m = opts.mixing;

  for (int it = 1; it <= opts.max_iter; ++it) {
    Vec3c e_particle = Vec3c::Zero();
    for (int j = 0; j < n; ++j) {
      e_particle += lambda_j[static_cast<size_t>(j)] *
                    state.particle_dipoles[static_cast<size_t>(j)];
    }
    const Vec3c d_new = (1.0 - m) * d + m * (alpha_mol * (e0 + e_particle));
    double change = (d_new - d).norm() / std::max(d_new.norm(), kTinyNorm);
    d = d_new;

    std::vector<Vec3c> em(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
      em[static_cast<size_t>(j)] = lambda_j[static_cast<size_t>(j)] * d;
    }
    std::vector<Vec3c> p_raw;
    if (lu) {
      const VectorXcd b = stack_fields(e0_at_voxels, em);
      const VectorXcd x = lu->solve(b);
      if (!x.allFinite()) {
        throw ResonanceSingularityError(
            "voxel system is singular inside the self-consistency loop");
      }
      p_raw = unstack(x);
    } else {
      p_raw = solve_induced_dipoles(lattice, omega, e0_at_voxels, em,
                                    opts.solver);
    }
    for (int j = 0; j < n; ++j) {
      const Vec3c mixed = (1.0 - m) * state.particle_dipoles[static_cast<size_t>(j)] +
                          m * p_raw[static_cast<size_t>(j)];
      change = std::max(change,
                        (mixed - state.particle_dipoles[static_cast<size_t>(j)])
                                .norm() /
                            std::max(mixed.norm(), kTinyNorm));
      state.particle_dipoles[static_cast<size_t>(j)] = mixed;
    }

    history.push_back(change);
    state.iterations = it;
    state.residual = change;
    state.molecular_dipole = d;
    if (change < opts.tol) {
      return state;
    }
  }
  throw NonConvergenceError(
      "molecule-particle self-consistency did not converge (strong-coupling "
      "regime)",
      history);
}

}  // namespace sers::dda
