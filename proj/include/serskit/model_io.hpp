#pragma once

#include <string>

#include "serskit/types.hpp"

namespace sers {

/// JSON ingestion for the three model file formats. Loaders validate all
/// type invariants and throw ParseError / std::invalid_argument on bad input.
MolecularModel load_molecular_model(const std::string& path);
VibrationalMode load_vibrational_mode(const std::string& path);
ParticleModel load_particle_model(const std::string& path);

std::string serialize_molecular_model(const MolecularModel& model);
std::string serialize_particle_model(const ParticleModel& particle);

MolecularModel parse_molecular_model(const std::string& text);
ParticleModel parse_particle_model(const std::string& text);

void save_molecular_model(const MolecularModel& model, const std::string& path);
void save_particle_model(const ParticleModel& particle, const std::string& path);

}  // namespace sers
