#pragma once

#include <optional>
#include <string>
#include <vector>

#include "serskit/greens.hpp"
#include "serskit/types.hpp"

namespace sers::cli {

enum class RunMode { Classical, QuantumRpa, QuantumDda, SelfEnergy, DdaSolve };

/// Maps the CLI subcommand spelling (classical, quantum-rpa, quantum-dda,
/// self-energy, dda-solve) to a mode; throws ParseError on anything else.
RunMode parse_mode(const std::string& name);
std::string mode_name(RunMode mode);

struct SweepSpec {
  double omega_min = 0.0;
  double omega_max = 0.0;
  int points = 1;
};

struct StokesSpec {
  int mode_index = 0;
  bool anti_stokes = false;
  std::optional<double> explicit_omega_kp;  // overrides the mode shift
};

struct NumericOptions {
  double eta = 1e-3;
  double mixing = 0.5;
  double tol = 1e-8;
  int max_iter = 100;
  int solver_threshold = 2000;
};

struct RunConfig {
  RunMode mode = RunMode::Classical;
  std::string molecule_path;
  std::optional<std::string> particle_path;
  std::vector<std::string> mode_paths;
  Geometry geometry;
  SweepSpec sweep;
  StokesSpec stokes;
  Vec3c incident_polarization = Vec3c::UnitZ();
  Vec3c scattered_polarization = Vec3c::UnitZ();
  int photon_occupancy = 0;
  greens::RamanTransition transition;
  greens::QuantumOptions quantum;
  int sigma_orbital = -1;  // self-energy mode; -1 means every orbital
  std::string output_path = "spectrum.csv";
  NumericOptions numeric;
  int threads = 0;  // 0: available parallelism
};

/// Reads the UTF-8 JSON run configuration; relative input paths resolve
/// against the config file's directory. Throws ParseError on malformed input.
RunConfig load_run_config(const std::string& path, RunMode mode);

/// Static diagnostics over the config and every referenced file; an empty
/// list means the config is runnable.
std::vector<std::string> validate(const RunConfig& config);

inline constexpr const char* kSpectrumCsvHeader =
    "omega_k,omega_kp,i_raman,i_sers,enhancement,g_norm,gp_norm,iterations,status";
inline constexpr const char* kSelfEnergyCsvHeader =
    "omega,orbital,delta,gamma,status";

struct SpectrumRow {
  double omega_k = 0.0;
  double omega_kp = 0.0;
  double i_raman = 0.0;
  double i_sers = 0.0;
  double enhancement = 0.0;
  double g_norm = 0.0;
  double gp_norm = 0.0;
  int iterations = 0;
  std::string status = "ok";
};

struct SelfEnergyRow {
  double omega = 0.0;
  int orbital = 0;
  double delta = 0.0;
  double gamma = 0.0;
  std::string status = "ok";
};

struct SpectrumResult {
  std::vector<SpectrumRow> rows;
  std::vector<SelfEnergyRow> sigma_rows;  // self-energy mode only
};

/// Runs the sweep over a worker pool; rows come back in omega order and a
/// failure at one frequency only flags that row's status.
SpectrumResult compute_spectrum(const RunConfig& config);

/// Atomic CSV write (temp file + rename), fixed schema per mode.
void write_result_csv(const RunConfig& config, const SpectrumResult& result,
                      const std::string& path);

/// Full pipeline: compute + write. Exit status 0 on success, 1 when every
/// row failed.
int run(const RunConfig& config);

}  // namespace sers::cli
