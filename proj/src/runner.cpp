#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "serskit/classical.hpp"
#include "serskit/dda.hpp"
#include "serskit/dipole.hpp"
#include "serskit/errors.hpp"
#include "serskit/greens.hpp"
#include "serskit/model_io.hpp"
#include "serskit/runner.hpp"

namespace sers::cli {

namespace {

using nlohmann::json;

struct LoadedInputs {
  MolecularModel molecule;
  std::optional<ParticleModel> particle;
  std::vector<VibrationalMode> modes;
};

std::string resolve_path(const std::filesystem::path& base,
                         const std::string& p) {
  const std::filesystem::path fp(p);
  return fp.is_absolute() ? fp.string() : (base / fp).string();
}

Vec3c parse_polarization(const json& j, const std::string& what) {
  Vec3 re = Vec3::Zero();
  Vec3 im = Vec3::Zero();
  if (j.is_array()) {
    if (j.size() != 3) throw ParseError(what + " must have 3 components");
    for (int i = 0; i < 3; ++i) re[i] = j[static_cast<size_t>(i)].get<double>();
  } else if (j.is_object()) {
    const json& jre = j.at("re");
    for (int i = 0; i < 3; ++i) re[i] = jre[static_cast<size_t>(i)].get<double>();
    if (j.contains("im")) {
      const json& jim = j.at("im");
      for (int i = 0; i < 3; ++i)
        im[i] = jim[static_cast<size_t>(i)].get<double>();
    }
  } else {
    throw ParseError(what + " must be an array or {re, im} object");
  }
  Vec3c pol = re + Complex(0.0, 1.0) * im;
  const double norm = pol.norm();
  if (norm > 0.0) pol /= norm;
  return pol;
}

LoadedInputs load_inputs(const RunConfig& config) {
  LoadedInputs in{load_molecular_model(config.molecule_path), std::nullopt, {}};
  if (config.particle_path) {
    in.particle = load_particle_model(*config.particle_path);
  }
  for (const std::string& path : config.mode_paths) {
    in.modes.push_back(load_vibrational_mode(path));
  }
  return in;
}

double stokes_shifted(const RunConfig& config, const LoadedInputs& in,
                      double omega_k) {
  if (config.stokes.explicit_omega_kp) {
    return *config.stokes.explicit_omega_kp;
  }
  if (in.modes.empty()) {
    return omega_k;
  }
  const auto& mode = in.modes.at(static_cast<size_t>(config.stokes.mode_index));
  return config.stokes.anti_stokes ? omega_k + mode.omega
                                   : omega_k - mode.omega;
}

FieldConfig make_field(const RunConfig& config, double omega_k,
                       double omega_kp) {
  if (!(omega_kp > 0.0)) {
    // no scattered photon below the vibrational quantum; keeps the
    // intensity-ratio columns nonnegative
    throw std::domain_error("scattered frequency is not positive");
  }
  FieldConfig field;
  field.incident = {omega_k, config.incident_polarization};
  field.scattered = {omega_kp, config.scattered_polarization};
  field.photon_occupancy = config.photon_occupancy;
  field.eta = config.numeric.eta;
  return field;
}

double frobenius(const Tensor3& m) { return m.norm(); }

SpectrumRow classical_row(const RunConfig& config, const LoadedInputs& in,
                          double omega_k) {
  SpectrumRow row;
  row.omega_k = omega_k;
  row.omega_kp = stokes_shifted(config, in, omega_k);
  const auto& mode =
      in.modes.at(static_cast<size_t>(config.stokes.mode_index));
  const FieldConfig field = make_field(config, omega_k, row.omega_kp);
  const double eta = config.numeric.eta;

  classical::ClassicalSystem sys;
  sys.alpha_M = greens::molecular_polarizability(in.molecule, omega_k, eta);
  if (in.particle) {
    const auto& rpa = std::get<AnalyticRpa>(*in.particle);
    sys.alpha_P =
        greens::rpa_polarizability(rpa.drude.omega0, rpa.drude.gamma, omega_k);
  }
  sys.lambda = dipole_tensor(config.geometry.separation).cast<Complex>();
  sys.dalpha_M_dQ =
      (greens::molecular_polarizability(mode.displaced_plus, omega_k, eta) -
       greens::molecular_polarizability(mode.displaced_minus, omega_k, eta)) /
      (2.0 * mode.delta);
  sys.delta_Q = vibrational_matrix_element(mode, config.transition.nu,
                                           config.transition.nu_prime);

  row.i_raman = classical::raman_intensity(sys.dalpha_M_dQ, sys.delta_Q, field);
  row.i_sers = classical::sers_intensity(sys, field);
  row.enhancement = row.i_raman > 0.0 ? row.i_sers / row.i_raman : 0.0;
  row.g_norm = frobenius(Tensor3::Identity() + sys.lambda * sys.alpha_P);
  row.gp_norm = frobenius(Tensor3::Identity() + sys.alpha_P * sys.lambda);
  return row;
}

SpectrumRow quantum_rpa_row(const RunConfig& config, const LoadedInputs& in,
                            double omega_k) {
  SpectrumRow row;
  row.omega_k = omega_k;
  row.omega_kp = stokes_shifted(config, in, omega_k);
  const FieldConfig field = make_field(config, omega_k, row.omega_kp);

  std::optional<AnalyticRpa> particle;
  if (in.particle) {
    particle = std::get<AnalyticRpa>(*in.particle);
  }
  row.i_raman = greens::normal_raman_intensity(in.molecule, in.modes,
                                               config.transition, field);
  row.i_sers =
      greens::sers_intensity(in.molecule, particle, config.geometry, in.modes,
                             config.transition, field, config.quantum);
  row.enhancement = row.i_raman > 0.0 ? row.i_sers / row.i_raman : 0.0;
  if (particle) {
    const auto particles = in.molecule.particles();
    const greens::EnhancementFactors f = greens::enhancement_factors(
        in.molecule, particle->drude, config.geometry, config.transition.q,
        particles.front(), omega_k, row.omega_kp, field.eta, config.quantum);
    row.g_norm = frobenius(f.g);
    row.gp_norm = frobenius(f.g_prime);
  } else {
    row.g_norm = frobenius(Tensor3::Identity());
    row.gp_norm = frobenius(Tensor3::Identity());
  }
  return row;
}

SpectrumRow quantum_dda_row(const RunConfig& config, const LoadedInputs& in,
                            double omega_k) {
  SpectrumRow row;
  row.omega_k = omega_k;
  row.omega_kp = stokes_shifted(config, in, omega_k);
  const FieldConfig field = make_field(config, omega_k, row.omega_kp);
  const double eta = config.numeric.eta;
  const auto& vox = std::get<VoxelizedParticle>(in.particle.value());
  const dda::VoxelLattice lattice =
      dda::VoxelLattice::from_particle(vox, config.geometry);

  dda::ScfOptions scf;
  scf.mixing = config.numeric.mixing;
  scf.tol = config.numeric.tol;
  scf.max_iter = config.numeric.max_iter;
  scf.solver.dense_threshold = config.numeric.solver_threshold;

  const Vec3c e0 = config.incident_polarization;
  // Total response D(w) = d_M + sum_j p_j of a displaced model, with the
  // image self-energy rebuilt on that model's orbitals.
  const auto total_response = [&](const MolecularModel& model) {
    const greens::RpaSelfEnergy sigma =
        greens::RpaSelfEnergy(model, config.geometry, vox.drude.omega0, eta,
                              config.quantum.flavor, config.quantum.form)
            .scaled(config.quantum.self_energy_scale);
    const dda::ResponseState state = dda::self_consistent_solve(
        model, sigma, lattice, omega_k, e0, eta, scf);
    Vec3c total = state.molecular_dipole;
    for (const Vec3c& p : state.particle_dipoles) total += p;
    row.iterations = std::max(row.iterations, state.iterations);
    return total;
  };

  Complex sers_amplitude(0.0, 0.0);
  Complex raman_amplitude(0.0, 0.0);
  for (const VibrationalMode& mode : in.modes) {
    const double melem = vibrational_matrix_element(
        mode, config.transition.nu, config.transition.nu_prime);
    if (melem == 0.0) continue;
    const double inv_step = 1.0 / (2.0 * mode.delta);
    const Vec3c dsers =
        (total_response(mode.displaced_plus) -
         total_response(mode.displaced_minus)) *
        inv_step;
    const Vec3c draman =
        (greens::molecular_polarizability(mode.displaced_plus, omega_k, eta) -
         greens::molecular_polarizability(mode.displaced_minus, omega_k, eta)) *
        inv_step * e0;
    sers_amplitude += melem * config.scattered_polarization.dot(dsers);
    raman_amplitude += melem * config.scattered_polarization.dot(draman);
  }
  const double prefactor = intensity_prefactor(field);
  row.i_sers = prefactor * std::norm(sers_amplitude);
  row.i_raman = prefactor * std::norm(raman_amplitude);
  row.enhancement = row.i_raman > 0.0 ? row.i_sers / row.i_raman : 0.0;
  return row;
}

SpectrumRow dda_solve_row(const RunConfig& config, const LoadedInputs& in,
                          double omega_k) {
  SpectrumRow row;
  row.omega_k = omega_k;
  row.omega_kp = stokes_shifted(config, in, omega_k);
  const auto& vox = std::get<VoxelizedParticle>(in.particle.value());
  const dda::VoxelLattice lattice =
      dda::VoxelLattice::from_particle(vox, config.geometry);
  dda::SolverOptions solver;
  solver.dense_threshold = config.numeric.solver_threshold;

  const std::vector<Vec3c> e0(static_cast<size_t>(lattice.size()),
                              config.incident_polarization);
  const std::vector<Vec3c> zeros(static_cast<size_t>(lattice.size()),
                                 Vec3c::Zero());
  const std::vector<Vec3c> dipoles =
      dda::solve_induced_dipoles(lattice, omega_k, e0, zeros, solver);
  Vec3c total = Vec3c::Zero();
  for (const Vec3c& p : dipoles) total += p;
  row.g_norm = total.norm();
  return row;
}

std::vector<SelfEnergyRow> self_energy_rows(const RunConfig& config,
                                            const LoadedInputs& in,
                                            double omega) {
  const DrudeParameters drude = std::visit(
      [](const auto& p) { return p.drude; }, in.particle.value());
  const greens::RpaSelfEnergy sigma =
      greens::RpaSelfEnergy(in.molecule, config.geometry, drude.omega0,
                            config.numeric.eta, config.quantum.flavor,
                            config.quantum.form)
          .scaled(config.quantum.self_energy_scale);
  std::vector<SelfEnergyRow> rows;
  for (int p = 0; p < in.molecule.size(); ++p) {
    if (config.sigma_orbital >= 0 && p != config.sigma_orbital) continue;
    SelfEnergyRow row;
    row.omega = omega;
    row.orbital = p;
    row.delta = greens::level_shift(sigma, p, omega);
    row.gamma = greens::level_width(sigma, p, omega);
    rows.push_back(row);
  }
  return rows;
}

std::string status_for_exception() {
  try {
    throw;
  } catch (const ResonanceSingularityError&) {
    return "resonance_singularity";
  } catch (const NonConvergenceError&) {
    return "non_convergence";
  } catch (const std::exception&) {
    return "error";
  }
}

greens::SigmaFlavor parse_flavor(const std::string& name) {
  if (name == "retarded") return greens::SigmaFlavor::Retarded;
  if (name == "time-ordered") return greens::SigmaFlavor::TimeOrdered;
  throw ParseError("unknown self-energy flavor: " + name);
}

greens::SigmaForm parse_form(const std::string& name) {
  if (name == "simplified") return greens::SigmaForm::Simplified;
  if (name == "exact") return greens::SigmaForm::ExactContraction;
  throw ParseError("unknown self-energy form: " + name);
}

}  // namespace

RunMode parse_mode(const std::string& name) {
  if (name == "classical") return RunMode::Classical;
  if (name == "quantum-rpa") return RunMode::QuantumRpa;
  if (name == "quantum-dda") return RunMode::QuantumDda;
  if (name == "self-energy") return RunMode::SelfEnergy;
  if (name == "dda-solve") return RunMode::DdaSolve;
  throw ParseError("unknown mode: " + name);
}

std::string mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::Classical: return "classical";
    case RunMode::QuantumRpa: return "quantum-rpa";
    case RunMode::QuantumDda: return "quantum-dda";
    case RunMode::SelfEnergy: return "self-energy";
    case RunMode::DdaSolve: return "dda-solve";
  }
  return "unknown";
}

RunConfig load_run_config(const std::string& path, RunMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }

  try {
    RunConfig config;
    config.mode = mode;
    const auto base = std::filesystem::path(path).parent_path();

    const json& inputs = j.at("inputs");
    config.molecule_path =
        resolve_path(base, inputs.at("molecule").get<std::string>());
    if (inputs.contains("particle")) {
      config.particle_path =
          resolve_path(base, inputs.at("particle").get<std::string>());
    }
    if (inputs.contains("modes")) {
      for (const json& jm : inputs.at("modes")) {
        config.mode_paths.push_back(resolve_path(base, jm.get<std::string>()));
      }
    }

    if (j.contains("geometry")) {
      const json& js = j.at("geometry").at("separation");
      config.geometry.separation = Vec3(js[0].get<double>(),
                                        js[1].get<double>(),
                                        js[2].get<double>());
    }

    const json& sweep = j.at("sweep");
    config.sweep.omega_min = sweep.at("omega_min").get<double>();
    config.sweep.omega_max = sweep.at("omega_max").get<double>();
    config.sweep.points = sweep.at("points").get<int>();

    if (j.contains("stokes")) {
      const json& st = j.at("stokes");
      config.stokes.mode_index = st.value("mode_index", 0);
      config.stokes.anti_stokes = st.value("anti_stokes", false);
      if (st.contains("omega_kp")) {
        config.stokes.explicit_omega_kp = st.at("omega_kp").get<double>();
      }
    }

    if (j.contains("field")) {
      const json& f = j.at("field");
      if (f.contains("incident_polarization")) {
        config.incident_polarization =
            parse_polarization(f.at("incident_polarization"),
                               "incident_polarization");
      }
      if (f.contains("scattered_polarization")) {
        config.scattered_polarization =
            parse_polarization(f.at("scattered_polarization"),
                               "scattered_polarization");
      }
      config.photon_occupancy = f.value("photon_occupancy", 0);
    }

    if (j.contains("transition")) {
      const json& t = j.at("transition");
      config.transition.p = t.value("p", 0);
      config.transition.q = t.value("q", 0);
      config.transition.nu = t.value("nu", 0);
      config.transition.nu_prime = t.value("nu_prime", 1);
    }

    if (j.contains("self_energy")) {
      const json& s = j.at("self_energy");
      config.quantum.flavor = parse_flavor(s.value("flavor", "retarded"));
      config.quantum.form = parse_form(s.value("form", "simplified"));
      config.quantum.self_energy_scale = s.value("scale", 1.0);
    }

    if (j.contains("numeric")) {
      const json& n = j.at("numeric");
      config.numeric.eta = n.value("eta", 1e-3);
      config.numeric.mixing = n.value("mixing", 0.5);
      config.numeric.tol = n.value("tol", 1e-8);
      config.numeric.max_iter = n.value("max_iter", 100);
      config.numeric.solver_threshold = n.value("solver_threshold", 2000);
    }

    config.sigma_orbital = j.value("orbital", -1);
    // Output paths stay relative to the working directory, not the config.
    config.output_path = j.value("output", std::string("spectrum.csv"));
    config.threads = j.value("threads", 0);
    return config;
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

std::vector<std::string> validate(const RunConfig& config) {
  std::vector<std::string> diags;
  const auto check = [&](bool ok, const std::string& msg) {
    if (!ok) diags.push_back(msg);
  };

  std::optional<LoadedInputs> inputs;
  try {
    inputs = load_inputs(config);
  } catch (const std::exception& e) {
    diags.push_back(std::string("inputs: ") + e.what());
  }

  check(config.numeric.eta > 0.0, "numeric.eta must be positive");
  check(config.numeric.mixing > 0.0 && config.numeric.mixing <= 1.0,
        "numeric.mixing must lie in (0, 1]");
  check(config.numeric.tol > 0.0, "numeric.tol must be positive");
  check(config.numeric.max_iter >= 1, "numeric.max_iter must be at least 1");
  check(config.sweep.points >= 1, "sweep.points must be at least 1");
  if (config.sweep.points > 1) {
    check(config.sweep.omega_min < config.sweep.omega_max,
          "sweep.omega_min must be below sweep.omega_max");
  }
  check(config.incident_polarization.norm() > 0.0,
        "incident polarization must be nonzero");
  check(config.scattered_polarization.norm() > 0.0,
        "scattered polarization must be nonzero");
  check(config.transition.nu >= 0 && config.transition.nu_prime >= 0,
        "vibrational quanta must be nonnegative");
  check(!config.output_path.empty(), "output path must not be empty");

  const bool needs_geometry = config.mode != RunMode::QuantumRpa ||
                              config.particle_path.has_value();
  if (needs_geometry) {
    check(config.geometry.separation.norm() > 0.0,
          "geometry.separation must be nonzero");
  }

  if (!inputs) return diags;

  const int n = inputs->molecule.size();
  check(config.transition.p >= 0 && config.transition.p < n,
        "transition.p indexes a missing orbital");
  check(config.transition.q >= 0 && config.transition.q < n,
        "transition.q indexes a missing orbital");
  if (config.sigma_orbital >= 0) {
    check(config.sigma_orbital < n, "orbital indexes a missing orbital");
  }

  const bool needs_modes = config.mode == RunMode::Classical ||
                           config.mode == RunMode::QuantumRpa ||
                           config.mode == RunMode::QuantumDda;
  if (needs_modes) {
    check(!inputs->modes.empty(), "this mode needs at least one vibrational mode");
    const bool index_needed = config.mode == RunMode::Classical ||
                              !config.stokes.explicit_omega_kp;
    if (!inputs->modes.empty() && index_needed) {
      check(config.stokes.mode_index >= 0 &&
                config.stokes.mode_index <
                    static_cast<int>(inputs->modes.size()),
            "stokes.mode_index indexes a missing mode");
    }
    for (const VibrationalMode& mode : inputs->modes) {
      check(mode.displaced_plus.size() == n &&
                mode.displaced_minus.size() == n,
            "displaced models must share the molecule's orbital count");
    }
  }

  switch (config.mode) {
    case RunMode::Classical:
    case RunMode::QuantumRpa:
      // particle optional: without one the sweep reduces to normal Raman
      if (inputs->particle) {
        check(std::holds_alternative<AnalyticRpa>(*inputs->particle),
              mode_name(config.mode) + " mode needs an analytic rpa particle");
      }
      break;
    case RunMode::QuantumDda:
    case RunMode::DdaSolve:
      check(inputs->particle.has_value() &&
                std::holds_alternative<VoxelizedParticle>(*inputs->particle),
            mode_name(config.mode) + " mode needs a voxelized particle");
      break;
    case RunMode::SelfEnergy:
      check(inputs->particle.has_value(),
            "self-energy mode needs a particle for the plasma frequency");
      break;
  }
  return diags;
}

SpectrumResult compute_spectrum(const RunConfig& config) {
  if (config.incident_polarization.norm() == 0.0 ||
      config.scattered_polarization.norm() == 0.0) {
    throw std::invalid_argument("polarizations must be nonzero");
  }
  const LoadedInputs inputs = load_inputs(config);

  const int points = config.sweep.points;
  std::vector<double> omegas(static_cast<size_t>(points));
  for (int i = 0; i < points; ++i) {
    omegas[static_cast<size_t>(i)] =
        points == 1 ? config.sweep.omega_min
                    : config.sweep.omega_min +
                          (config.sweep.omega_max - config.sweep.omega_min) *
                              i / (points - 1);
  }

  std::vector<SpectrumRow> rows(static_cast<size_t>(points));
  std::vector<std::vector<SelfEnergyRow>> sigma_rows(
      static_cast<size_t>(points));

  const auto compute_one = [&](int i) {
    const double omega = omegas[static_cast<size_t>(i)];
    try {
      switch (config.mode) {
        case RunMode::Classical:
          rows[static_cast<size_t>(i)] = classical_row(config, inputs, omega);
          break;
        case RunMode::QuantumRpa:
          rows[static_cast<size_t>(i)] = quantum_rpa_row(config, inputs, omega);
          break;
        case RunMode::QuantumDda:
          rows[static_cast<size_t>(i)] = quantum_dda_row(config, inputs, omega);
          break;
        case RunMode::DdaSolve:
          rows[static_cast<size_t>(i)] = dda_solve_row(config, inputs, omega);
          break;
        case RunMode::SelfEnergy:
          sigma_rows[static_cast<size_t>(i)] =
              self_energy_rows(config, inputs, omega);
          break;
      }
    } catch (...) {
      const std::string status = status_for_exception();
      SpectrumRow failed;
      failed.omega_k = omega;
      failed.omega_kp = omega;
      failed.status = status;
      rows[static_cast<size_t>(i)] = failed;
      if (config.mode == RunMode::SelfEnergy) {
        SelfEnergyRow srow;
        srow.omega = omega;
        srow.orbital = std::max(config.sigma_orbital, 0);
        srow.status = status;
        sigma_rows[static_cast<size_t>(i)] = {srow};
      }
    }
  };

  int nthreads = config.threads > 0
                     ? config.threads
                     : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::clamp(nthreads, 1, points);
  if (nthreads == 1) {
    for (int i = 0; i < points; ++i) compute_one(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) {
      workers.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < points; i = next.fetch_add(1)) {
          compute_one(i);
        }
      });
    }
    for (std::thread& w : workers) w.join();
  }

  SpectrumResult result;
  result.rows = std::move(rows);
  for (auto& block : sigma_rows) {
    result.sigma_rows.insert(result.sigma_rows.end(), block.begin(),
                             block.end());
  }
  return result;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

}  // namespace

void write_result_csv(const RunConfig& config, const SpectrumResult& result,
                      const std::string& path) {
  std::string body;
  if (config.mode == RunMode::SelfEnergy) {
    body += kSelfEnergyCsvHeader;
    body += '\n';
    for (const SelfEnergyRow& row : result.sigma_rows) {
      body += format_double(row.omega) + "," + std::to_string(row.orbital) +
              "," + format_double(row.delta) + "," + format_double(row.gamma) +
              "," + row.status + "\n";
    }
  } else {
    body += kSpectrumCsvHeader;
    body += '\n';
    for (const SpectrumRow& row : result.rows) {
      body += format_double(row.omega_k) + "," + format_double(row.omega_kp) +
              "," + format_double(row.i_raman) + "," +
              format_double(row.i_sers) + "," +
              format_double(row.enhancement) + "," +
              format_double(row.g_norm) + "," + format_double(row.gp_norm) +
              "," + std::to_string(row.iterations) + "," + row.status + "\n";
    }
  }

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << body;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

int run(const RunConfig& config) {
  const SpectrumResult result = compute_spectrum(config);
  write_result_csv(config, result, config.output_path);

  bool any_ok = false;
  if (config.mode == RunMode::SelfEnergy) {
    for (const SelfEnergyRow& row : result.sigma_rows) {
      any_ok = any_ok || row.status == "ok";
    }
  } else {
    for (const SpectrumRow& row : result.rows) {
      any_ok = any_ok || row.status == "ok";
    }
  }
  return any_ok ? 0 : 1;
}

}  // namespace sers::cli
