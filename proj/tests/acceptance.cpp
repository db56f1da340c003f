// Acceptance suite: runs every stated criterion at its pinned tolerance and
// prints one PASS/FAIL line per criterion. Exit code is the failure count.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "serskit/classical.hpp"
#include "serskit/dda.hpp"
#include "serskit/dipole.hpp"
#include "serskit/errors.hpp"
#include "serskit/greens.hpp"
#include "serskit/model_io.hpp"
#include "serskit/runner.hpp"

using namespace sers;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool pass, double seconds,
            const std::string& detail = "") {
  std::printf("%s  [%2d] %s (%.2fs)%s%s\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), seconds,
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!pass) ++failures;
}

void criterion(int index, const std::string& name, double budget_seconds,
               const std::function<bool(std::string&)>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (pass && seconds >= budget_seconds) {
    pass = false;
    detail += " (over the runtime budget)";
  }
  report(index, name, pass, seconds, detail);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

MolecularModel random_model(int n_orbitals) {
  std::vector<Orbital> orbitals;
  const int holes = std::max(1, n_orbitals / 2);
  for (int i = 0; i < n_orbitals; ++i) {
    const bool occ = i < holes;
    orbitals.push_back(
        {occ ? oracles::uniform(-1.0, -0.2) : oracles::uniform(0.1, 1.0),
         occ ? 1 : 0});
  }
  const size_t n = static_cast<size_t>(n_orbitals);
  std::vector<Vec3c> dipole(n * n, Vec3c::Zero());
  for (size_t p = 0; p < n; ++p) {
    for (size_t q = p; q < n; ++q) {
      Vec3c d(oracles::random_complex(1.0), oracles::random_complex(1.0),
              oracles::random_complex(1.0));
      if (p == q) d = d.real().cast<Complex>();
      dipole[p * n + q] = d;
      dipole[q * n + p] = d.conjugate();
    }
  }
  return MolecularModel(std::move(orbitals), std::move(dipole), -0.1);
}

struct Demo {
  MolecularModel molecule;
  VibrationalMode mode;
  AnalyticRpa particle;
  Geometry geometry{Vec3(0.0, 0.0, 10.0)};
};

Demo load_demo(const fs::path& dir) {
  return Demo{load_molecular_model((dir / "molecule.json").string()),
              load_vibrational_mode((dir / "mode.json").string()),
              std::get<AnalyticRpa>(
                  load_particle_model((dir / "particle_rpa.json").string())),
              Geometry{Vec3(0.0, 0.0, 10.0)}};
}

FieldConfig field_at(double wk, double wkp, double eta = 1e-3) {
  FieldConfig f;
  f.incident = {wk, Vec3c::UnitZ()};
  f.scattered = {wkp, Vec3c::UnitZ()};
  f.eta = eta;
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path demo_dir = argc > 1 ? fs::path(argv[1]) : fs::path("demo");
  const Demo demo = load_demo(demo_dir);

  criterion(1, "classical fourth-power enhancement law", 1.0, [&](std::string& d) {
    int checked = 0;
    double worst = 0.0;
    while (checked < 1000) {
      const double am = oracles::uniform(-2.0, 2.0);  // real molecular alpha
      const Complex ap = oracles::random_complex(5.0);
      const double r = oracles::uniform(1.0, 8.0);
      const double w = 2.0 / (r * r * r);
      if (std::abs(am * ap) * w * w >= 1e-3) continue;
      const auto e = classical::enhancement_factor_zaxis(am, ap, r);
      if (e.approx == 0.0) continue;
      worst = std::max(worst, std::abs(e.full / e.approx - 1.0));
      ++checked;
    }
    d = "max |full/approx - 1| = " + std::to_string(worst);
    return worst < 5e-3;
  });

  criterion(2, "closed-form total polarizability vs 6x6 solve", 1.0,
            [&](std::string& d) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      classical::ClassicalSystem sys;
      sys.alpha_M = oracles::random_tensor(1.0);
      sys.alpha_P = oracles::random_tensor(1.0);
      Vec3 sep = oracles::random_vec3(2.0);
      if (sep.norm() < 1.0) sep += Vec3(0.0, 0.0, 2.0);
      sys.lambda = dipole_tensor(sep).cast<Complex>();
      const Tensor3 closed = classical::total_polarizability(sys);
      const Tensor3 direct =
          oracles::coupled_dipole_6x6(sys.alpha_M, sys.alpha_P, sys.lambda);
      worst = std::max(worst, (closed - direct).cwiseAbs().maxCoeff() /
                                  direct.cwiseAbs().maxCoeff());
    }
    d = "max relative deviation = " + std::to_string(worst);
    return worst < 1e-10;
  });

  criterion(3, "quantum enhancement reduces to the classical fourth power", 1.0,
            [&](std::string& d) {
    greens::QuantumOptions opts;
    opts.self_energy_scale = 0.0;  // image self-energy switched off
    const FieldConfig f = field_at(0.02, 0.02);
    const greens::RamanTransition t{0, 0, 0, 1};
    const std::vector<VibrationalMode> modes{demo.mode};
    const double raman =
        greens::normal_raman_intensity(demo.molecule, modes, t, f);
    const double sers =
        greens::sers_intensity(demo.molecule, demo.particle, demo.geometry,
                               modes, t, f, opts);
    const Complex ap = greens::rpa_polarizability(
        demo.particle.drude.omega0, demo.particle.drude.gamma, 0.02)(2, 2);
    const double r = demo.geometry.separation.norm();
    const double factor = std::norm(1.0 + (2.0 / (r * r * r)) * ap);
    const double expected = factor * factor;  // |1 + 2 aP / r^3|^4
    const double rel = std::abs(sers / raman / expected - 1.0);
    d = "relative mismatch = " + std::to_string(rel);
    return rel < 1e-2;
  });

  criterion(4, "decoupled sers equals normal Raman across a sweep", 1.0,
            [&](std::string& d) {
    const greens::RamanTransition t{0, 0, 0, 1};
    const std::vector<VibrationalMode> modes{demo.mode};
    int exact = 0;
    for (int i = 0; i < 200; ++i) {
      const double wk = 0.006 + 0.05 * i / 199.0;
      const FieldConfig f = field_at(wk, wk - demo.mode.omega);
      const double raman =
          greens::normal_raman_intensity(demo.molecule, modes, t, f);
      const double sers = greens::sers_intensity(
          demo.molecule, std::nullopt, demo.geometry, modes, t, f);
      if (sers == raman) ++exact;
    }
    d = std::to_string(exact) + "/200 points bit-identical";
    return exact == 200;
  });

  criterion(5, "Kramers-Kronig consistency of shift and width", 10.0,
            [&](std::string& d) {
    const double eta = 1e-3;
    const double omega0 = demo.particle.drude.omega0;
    const greens::RpaSelfEnergy sigma(demo.molecule, demo.geometry, omega0,
                                      eta);
    const double mu = demo.molecule.chemical_potential();
    const int npts = 4096;
    const double span = 20.0 * omega0;
    std::vector<double> grid(npts), gamma(npts);
    for (int i = 0; i < npts; ++i) {
      grid[static_cast<size_t>(i)] = -span + 2.0 * span * i / (npts - 1);
    }
    double worst = 0.0;
    for (int p = 0; p < demo.molecule.size(); ++p) {
      for (int i = 0; i < npts; ++i) {
        gamma[static_cast<size_t>(i)] =
            greens::level_width(sigma, p, grid[static_cast<size_t>(i)]);
      }
      const std::vector<double> shift =
          oracles::kk_shift_from_width(grid, gamma, mu);
      double peak = 0.0;
      for (int i = 0; i < npts; ++i) {
        peak = std::max(peak, std::abs(greens::level_shift(
                                  sigma, p, grid[static_cast<size_t>(i)])));
      }
      for (int i = 1; i + 1 < npts; ++i) {
        const double expected =
            greens::level_shift(sigma, p, grid[static_cast<size_t>(i)]);
        worst = std::max(worst,
                         std::abs(shift[static_cast<size_t>(i)] - expected) /
                             peak);
      }
    }
    d = "max |H[Gamma] - Delta| / max|Delta| = " + std::to_string(worst);
    return worst < 0.02;
  });

  criterion(6, "retarded sign rule across the chemical potential", 5.0,
            [&](std::string& d) {
    const double eta = 1e-3;
    double worst_above = -1.0, worst_below = 1.0;
    for (int trial = 0; trial < 10; ++trial) {
      const MolecularModel model = random_model(trial % 2 == 0 ? 2 : 10);
      const Geometry geom{oracles::random_vec3(2.0) + Vec3(0.0, 0.5, 2.5)};
      const greens::RpaSelfEnergy sigma(
          model, geom, oracles::uniform(0.1, 0.5), eta,
          greens::SigmaFlavor::Retarded, greens::SigmaForm::ExactContraction);
      const double mu = model.chemical_potential();
      const auto poles = sigma.pole_positions();
      for (int i = 0; i < 200; ++i) {
        const double omega = mu + oracles::uniform(-3.0, 3.0);
        bool near = false;
        for (const double pole : poles) {
          near = near || std::abs(omega - pole) < 10.0 * eta;
        }
        if (near) continue;
        for (int p = 0; p < model.size(); ++p) {
          const double im = sigma.eval(p, p, omega).imag();
          if (omega > mu + 10.0 * eta) worst_above = std::max(worst_above, im);
          if (omega < mu - 10.0 * eta) worst_below = std::min(worst_below, im);
        }
      }
    }
    d = "max Im above mu = " + std::to_string(worst_above) +
        ", min Im below mu = " + std::to_string(worst_below);
    return worst_above <= 1e-12 && worst_below >= -1e-12;
  });

  criterion(7, "self-energy closed form vs frequency quadrature", 10.0,
            [&](std::string& d) {
    std::vector<Vec3c> dipole(4, Vec3c::Zero());
    dipole[0] = Vec3c(0.2, 0.0, -0.1);
    dipole[1] = Vec3c(Complex(0.6, 0.2), Complex(-0.3, 0.0), Complex(1.0, 0.0));
    dipole[2] = dipole[1].conjugate();
    dipole[3] = Vec3c(-0.4, 0.3, 0.8);
    const MolecularModel model({{-0.5, 1}, {0.3, 0}}, dipole, 0.0);
    const Geometry geom{Vec3(1.0, -0.5, 3.5)};
    const double omega0 = 0.3, eta = 1e-3;
    const greens::RpaSelfEnergy sigma(model, geom, omega0, eta,
                                      greens::SigmaFlavor::TimeOrdered,
                                      greens::SigmaForm::ExactContraction);
    const Eigen::Matrix3d lambda = dipole_tensor(geom.separation);
    double worst = 0.0;
    for (const double omega : {-4.0, 3.0}) {
      for (int p = 0; p < 2; ++p) {
        for (int q = 0; q < 2; ++q) {
          const Complex closed = sigma.eval(p, q, omega);
          const Complex quad = oracles::self_energy_quadrature(
              model, lambda, omega0, p, q, omega, eta, 60.0);
          worst = std::max(worst, std::abs(closed - quad) / std::abs(closed));
        }
      }
    }
    d = "max relative deviation = " + std::to_string(worst);
    return worst < 1e-3;
  });

  criterion(8, "voxel solver: iterative vs dense and the one-voxel identity", 5.0,
            [&](std::string& d) {
    const DrudeParameters drude{0.2, 0.01};
    double worst = 0.0;
    for (const int n : {2, 5, 8}) {
      dda::VoxelLattice lattice;
      lattice.drude = drude;
      while (lattice.size() < n) {
        const Vec3 candidate =
            Vec3(10.0, 0.0, -25.0) + oracles::random_vec3(4.0 + 1.5 * n);
        bool ok = candidate.norm() > 1.0;
        for (const Vec3& p : lattice.positions) {
          ok = ok && (candidate - p).norm() > 3.0;
        }
        if (!ok) continue;
        lattice.positions.push_back(candidate);
        lattice.volumes.push_back(oracles::uniform(5.0, 40.0));
      }
      const std::vector<Vec3c> e0(static_cast<size_t>(n),
                                  Vec3c(0.2, 0.9, -0.4));
      const std::vector<Vec3c> em(static_cast<size_t>(n), Vec3c::Zero());
      const auto dense = dda::solve_induced_dipoles(lattice, 0.05, e0, em);
      dda::SolverOptions iterative;
      iterative.dense_threshold = 0;
      iterative.max_iterations = 400;
      const auto krylov =
          dda::solve_induced_dipoles(lattice, 0.05, e0, em, iterative);
      double num = 0.0, den = 0.0;
      for (int j = 0; j < n; ++j) {
        num += (dense[static_cast<size_t>(j)] - krylov[static_cast<size_t>(j)])
                   .squaredNorm();
        den += dense[static_cast<size_t>(j)].squaredNorm();
      }
      worst = std::max(worst, std::sqrt(num / den));
    }

    dda::VoxelLattice single;
    single.drude = drude;
    single.positions = {Vec3(0.0, 0.0, -10.0)};
    single.volumes = {20.0};
    const Vec3c e0(0.3, -0.2, 1.0);
    const auto p =
        dda::solve_induced_dipoles(single, 0.05, {e0}, {Vec3c::Zero()});
    const Vec3c expected = dda::voxel_polarizability(drude, 20.0, 0.05) * e0;
    const double identity = (p[0] - expected).norm() / expected.norm();
    d = "iterative worst = " + std::to_string(worst) +
        ", one-voxel deviation = " + std::to_string(identity);
    return worst < 1e-10 && identity < 1e-12;
  });

  criterion(9, "molecule-particle self-consistency fixed point", 2.0,
            [&](std::string& d) {
    const greens::RpaSelfEnergy zero =
        greens::RpaSelfEnergy::zero(demo.molecule);
    const double eta = 1e-3, omega = 0.02;
    const VoxelizedParticle particle{demo.particle.drude,
                                     {{Vec3::Zero(), 50.0}}};
    const dda::VoxelLattice lattice =
        dda::VoxelLattice::from_particle(particle, demo.geometry);
    const dda::ResponseState state = dda::self_consistent_solve(
        demo.molecule, zero, lattice, omega, Vec3c::UnitZ(), eta);

    classical::ClassicalSystem sys;
    sys.alpha_M = greens::molecular_polarizability(demo.molecule, omega, eta);
    sys.alpha_P =
        dda::voxel_polarizability(demo.particle.drude, 50.0, omega);
    sys.lambda = dipole_tensor(demo.geometry.separation).cast<Complex>();
    const Vec3c expected = classical::total_polarizability(sys) * Vec3c::UnitZ();
    const Vec3c total = state.molecular_dipole + state.particle_dipoles[0];
    const double rel = (total - expected).norm() / expected.norm();

    bool diverged = false;
    try {
      const Geometry close{Vec3(0.0, 0.0, 2.0)};
      const VoxelizedParticle big{DrudeParameters{0.5, 0.0},
                                  {{Vec3::Zero(), 30.0}}};
      dda::self_consistent_solve(demo.molecule, zero,
                                 dda::VoxelLattice::from_particle(big, close),
                                 0.1685, Vec3c::UnitZ(), eta);
    } catch (const NonConvergenceError&) {
      diverged = true;
    }
    d = "iterations = " + std::to_string(state.iterations) +
        ", closed-form deviation = " + std::to_string(rel) +
        ", divergent case raised = " + (diverged ? "yes" : "no");
    return state.iterations <= 100 && rel < 1e-8 && diverged;
  });

  criterion(10, "Raman selection rules and the harmonic matrix element", 1.0,
            [&](std::string& d) {
    const greens::RamanTransition t{0, 0, 0, 1};
    const std::vector<VibrationalMode> modes{demo.mode};
    const FieldConfig f = field_at(0.02, 0.016);
    bool zero_ok = true;
    for (const int dnu : {0, 2, 3, -2}) {
      greens::RamanTransition forbidden = t;
      forbidden.nu = 2;
      forbidden.nu_prime = 2 + dnu;
      if (forbidden.nu_prime < 0) continue;
      zero_ok = zero_ok &&
                greens::normal_raman_intensity(demo.molecule, modes, forbidden,
                                               f) == 0.0 &&
                greens::sers_intensity(demo.molecule, demo.particle,
                                       demo.geometry, modes, forbidden,
                                       f) == 0.0;
    }
    double worst = 0.0;
    for (const auto& [nu, nup] : std::vector<std::pair<int, int>>{
             {0, 1}, {1, 2}, {3, 2}, {5, 6}}) {
      const double closed = vibrational_matrix_element(demo.mode, nu, nup);
      const double quad = oracles::ho_matrix_element_quadrature(
          nu, nup, demo.mode.reduced_mass, demo.mode.omega);
      worst = std::max(worst, std::abs(closed - quad));
    }
    d = "forbidden channels vanish = " + std::string(zero_ok ? "yes" : "no") +
        ", worst oracle deviation = " + std::to_string(worst);
    return zero_ok && worst < 1e-8;
  });

  criterion(11, "symmetry suite", 1.0, [&](std::string& d) {
    double worst = 0.0;
    // alpha(omega)* = alpha(-omega) for real dipole matrices
    for (int i = 0; i < 50; ++i) {
      const double w = oracles::uniform(-1.0, 1.0);
      const Tensor3 a =
          greens::molecular_polarizability(demo.molecule, w, 1e-3);
      const Tensor3 b =
          greens::molecular_polarizability(demo.molecule, -w, 1e-3);
      worst = std::max(worst, (a.conjugate() - b).cwiseAbs().maxCoeff());
    }
    // dipole tensor: symmetric, traceless, cubic scaling
    for (int i = 0; i < 50; ++i) {
      Vec3 sep = oracles::random_vec3(4.0);
      if (sep.norm() < 0.5) sep += Vec3(1.0, 0.0, 1.0);
      const Eigen::Matrix3d lam = dipole_tensor(sep);
      worst = std::max(worst, (lam - lam.transpose()).cwiseAbs().maxCoeff() /
                                  lam.cwiseAbs().maxCoeff());
      worst = std::max(worst,
                       std::abs(lam.trace()) / lam.cwiseAbs().maxCoeff());
      const double c = oracles::uniform(0.5, 2.0);
      worst = std::max(
          worst, (dipole_tensor(c * sep) - lam / (c * c * c)).cwiseAbs()
                         .maxCoeff() /
                     lam.cwiseAbs().maxCoeff());
    }
    // (N' + 1) prefactor linearity
    const greens::RamanTransition t{0, 0, 0, 1};
    const std::vector<VibrationalMode> modes{demo.mode};
    FieldConfig f0 = field_at(0.02, 0.016);
    FieldConfig f5 = f0;
    f5.photon_occupancy = 5;
    const double ratio =
        greens::sers_intensity(demo.molecule, demo.particle, demo.geometry,
                               modes, t, f5) /
        greens::sers_intensity(demo.molecule, demo.particle, demo.geometry,
                               modes, t, f0);
    worst = std::max(worst, std::abs(ratio - 6.0) / 6.0);
    d = "worst symmetry deviation = " + std::to_string(worst);
    return worst < 1e-12;
  });

  criterion(12, "CLI determinism and config validation", 5.0, [&](std::string& d) {
    const fs::path scratch =
        fs::temp_directory_path() / "serskit_acceptance";
    fs::create_directories(scratch);
    bool deterministic = true;
    for (const auto& [mode, config] :
         std::vector<std::pair<std::string, std::string>>{
             {"classical", "config_classical.json"},
             {"quantum-rpa", "config_quantum_rpa.json"},
             {"quantum-dda", "config_quantum_dda.json"},
             {"self-energy", "config_self_energy.json"},
             {"dda-solve", "config_dda_solve.json"}}) {
      cli::RunConfig cfg = cli::load_run_config(
          (demo_dir / config).string(), cli::parse_mode(mode));
      cfg.threads = 2;
      cfg.output_path = (scratch / ("a_" + mode + ".csv")).string();
      if (cli::run(cfg) != 0 || !cli::validate(cfg).empty()) {
        deterministic = false;
        continue;
      }
      const std::string first = slurp(cfg.output_path);
      cfg.output_path = (scratch / ("b_" + mode + ".csv")).string();
      cli::run(cfg);
      deterministic = deterministic && first == slurp(cfg.output_path) &&
                      !first.empty();
    }

    // seeded violations must each produce a diagnostic
    cli::RunConfig good = cli::load_run_config(
        (demo_dir / "config_quantum_rpa.json").string(),
        cli::RunMode::QuantumRpa);
    int caught = 0;
    {
      cli::RunConfig bad = good;
      bad.molecule_path = (scratch / "missing.json").string();
      caught += cli::validate(bad).empty() ? 0 : 1;
    }
    {
      cli::RunConfig bad = good;
      bad.numeric.eta = -1.0;
      caught += cli::validate(bad).empty() ? 0 : 1;
    }
    {
      cli::RunConfig bad = good;
      bad.sweep = {0.5, 0.1, 4};
      caught += cli::validate(bad).empty() ? 0 : 1;
    }
    {
      cli::RunConfig bad = good;
      bad.transition.p = 99;
      caught += cli::validate(bad).empty() ? 0 : 1;
    }
    {
      const fs::path broken = scratch / "broken_molecule.json";
      std::ofstream out(broken);
      out << R"({"orbitals": [{"energy": -0.5, "occupation": 3},
                              {"energy": 0.1, "occupation": 0}],
                 "dipole": [], "chemical_potential": -0.2})";
      out.close();
      cli::RunConfig bad = good;
      bad.molecule_path = broken.string();
      caught += cli::validate(bad).empty() ? 0 : 1;
    }
    d = "deterministic = " + std::string(deterministic ? "yes" : "no") +
        ", diagnostics caught = " + std::to_string(caught) + "/5";
    return deterministic && caught == 5;
  });

  std::printf("%d of 12 acceptance criteria passed\n", 12 - failures);
  return failures;
}
