#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "serskit/dda.hpp"
#include "serskit/errors.hpp"
#include "serskit/model_io.hpp"

namespace sers {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Vec3 parse_vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError(what + " must be a 3-element array");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

MolecularModel model_from_json(const json& j) {
  try {
    std::vector<Orbital> orbitals;
    for (const json& jo : j.at("orbitals")) {
      Orbital orb;
      orb.energy = jo.at("energy").get<double>();
      orb.occupation = jo.at("occupation").get<int>();
      orbitals.push_back(orb);
    }
    const size_t n = orbitals.size();
    std::vector<Vec3c> dipole(n * n, Vec3c::Zero());
    std::set<std::pair<size_t, size_t>> given;
    for (const json& jd : j.at("dipole")) {
      const size_t p = jd.at("p").get<size_t>();
      const size_t q = jd.at("q").get<size_t>();
      if (p >= n || q >= n) {
        throw ParseError("dipole entry indexes a missing orbital");
      }
      const Vec3 re = parse_vec3(jd.at("re"), "dipole re");
      Vec3 im = Vec3::Zero();
      if (jd.contains("im")) im = parse_vec3(jd.at("im"), "dipole im");
      dipole[p * n + q] = re + Complex(0.0, 1.0) * im;
      given.insert({p, q});
    }
    // Hermitian completion for entries whose mirror was not given explicitly.
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = 0; q < n; ++q) {
        if (given.count({p, q}) && !given.count({q, p})) {
          dipole[q * n + p] = dipole[p * n + q].conjugate();
        }
      }
    }
    return MolecularModel(std::move(orbitals), std::move(dipole),
                          j.at("chemical_potential").get<double>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("molecular model: ") + e.what());
  }
}

DrudeParameters drude_from_json(const json& j) {
  DrudeParameters d;
  d.omega0 = j.at("omega0").get<double>();
  d.gamma = j.value("gamma", 0.0);
  if (!(d.omega0 > 0.0)) {
    throw std::invalid_argument("plasma frequency omega0 must be positive");
  }
  if (d.gamma < 0.0) {
    throw std::invalid_argument("Drude damping gamma must be nonnegative");
  }
  return d;
}

VoxelizedParticle voxelized_from_json(const json& j) {
  VoxelizedParticle particle;
  particle.drude = drude_from_json(j.at("drude"));
  if (j.contains("generator")) {
    const json& g = j.at("generator");
    const std::string shape = g.at("shape").get<std::string>();
    const double spacing = g.at("spacing").get<double>();
    if (shape == "block") {
      const json& c = g.at("counts");
      particle = dda::make_block_lattice(
          particle.drude,
          Eigen::Vector3i(c[0].get<int>(), c[1].get<int>(), c[2].get<int>()),
          spacing);
    } else if (shape == "sphere") {
      particle = dda::make_sphere_lattice(particle.drude,
                                          g.at("radius").get<double>(), spacing);
    } else if (shape == "ellipsoid") {
      particle = dda::make_ellipsoid_lattice(
          particle.drude, parse_vec3(g.at("semiaxes"), "semiaxes"), spacing);
    } else {
      throw ParseError("unknown lattice generator shape: " + shape);
    }
    return particle;
  }
  for (const json& jv : j.at("voxels")) {
    Voxel v;
    v.position = parse_vec3(jv.at("pos"), "voxel pos");
    v.volume = jv.at("vol").get<double>();
    if (!(v.volume > 0.0)) {
      throw std::invalid_argument("voxel volume must be positive");
    }
    particle.voxels.push_back(v);
  }
  if (particle.voxels.empty()) {
    throw std::invalid_argument("voxelized particle has no voxels");
  }
  for (size_t a = 0; a < particle.voxels.size(); ++a) {
    for (size_t b = a + 1; b < particle.voxels.size(); ++b) {
      if ((particle.voxels[a].position - particle.voxels[b].position).norm() ==
          0.0) {
        throw std::invalid_argument("voxel positions must be pairwise distinct");
      }
    }
  }
  return particle;
}

}  // namespace

MolecularModel parse_molecular_model(const std::string& text) {
  return model_from_json(parse_json(text, "molecular model"));
}

MolecularModel load_molecular_model(const std::string& path) {
  return parse_molecular_model(read_file(path));
}

VibrationalMode load_vibrational_mode(const std::string& path) {
  const json j = parse_json(read_file(path), "vibrational mode");
  try {
    const auto dir = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path fp(p);
      return fp.is_absolute() ? fp.string() : (dir / fp).string();
    };
    VibrationalMode mode{
        j.value("index", 0),
        j.at("omega").get<double>(),
        j.at("reduced_mass").get<double>(),
        j.at("delta").get<double>(),
        load_molecular_model(resolve(j.at("model_plus").get<std::string>())),
        load_molecular_model(resolve(j.at("model_minus").get<std::string>()))};
    if (!(mode.omega > 0.0) || !(mode.reduced_mass > 0.0) ||
        !(mode.delta > 0.0)) {
      throw std::invalid_argument(
          "mode frequency, reduced mass and displacement must be positive");
    }
    if (mode.displaced_plus.size() != mode.displaced_minus.size()) {
      throw std::invalid_argument(
          "displaced models must share the orbital count");
    }
    return mode;
  } catch (const json::exception& e) {
    throw ParseError(std::string("vibrational mode: ") + e.what());
  }
}

ParticleModel parse_particle_model(const std::string& text) {
  const json j = parse_json(text, "particle model");
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "rpa") {
      return AnalyticRpa{drude_from_json(j)};
    }
    if (type == "voxelized") {
      return voxelized_from_json(j);
    }
    throw ParseError("unknown particle type: " + type);
  } catch (const json::exception& e) {
    throw ParseError(std::string("particle model: ") + e.what());
  }
}

ParticleModel load_particle_model(const std::string& path) {
  return parse_particle_model(read_file(path));
}

std::string serialize_molecular_model(const MolecularModel& model) {
  json j;
  j["orbitals"] = json::array();
  for (const Orbital& orb : model.orbitals()) {
    j["orbitals"].push_back({{"energy", orb.energy},
                             {"occupation", orb.occupation}});
  }
  j["chemical_potential"] = model.chemical_potential();
  j["dipole"] = json::array();
  for (int p = 0; p < model.size(); ++p) {
    for (int q = p; q < model.size(); ++q) {
      const Vec3c& d = model.dipole(p, q);
      if (d.isZero(0.0)) continue;
      json entry = {{"p", p},
                    {"q", q},
                    {"re", {d[0].real(), d[1].real(), d[2].real()}}};
      if (!d.imag().isZero(0.0)) {
        entry["im"] = {d[0].imag(), d[1].imag(), d[2].imag()};
      }
      j["dipole"].push_back(entry);
    }
  }
  return j.dump(2);
}

std::string serialize_particle_model(const ParticleModel& particle) {
  json j;
  if (const auto* rpa = std::get_if<AnalyticRpa>(&particle)) {
    j["type"] = "rpa";
    j["omega0"] = rpa->drude.omega0;
    j["gamma"] = rpa->drude.gamma;
  } else {
    const auto& vox = std::get<VoxelizedParticle>(particle);
    j["type"] = "voxelized";
    j["drude"] = {{"omega0", vox.drude.omega0}, {"gamma", vox.drude.gamma}};
    j["voxels"] = json::array();
    for (const Voxel& v : vox.voxels) {
      j["voxels"].push_back(
          {{"pos", {v.position[0], v.position[1], v.position[2]}},
           {"vol", v.volume}});
    }
  }
  return j.dump(2);
}

void save_molecular_model(const MolecularModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize_molecular_model(model) << '\n';
}

void save_particle_model(const ParticleModel& particle, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize_particle_model(particle) << '\n';
}

}  // namespace sers
