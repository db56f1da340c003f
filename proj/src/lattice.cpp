#include <cmath>
#include <stdexcept>

#include "serskit/dda.hpp"

namespace sers::dda {

namespace {

void check_spacing(double spacing) {
  if (!(spacing > 0.0)) {
    throw std::invalid_argument("lattice spacing must be positive");
  }
}

}  // namespace

VoxelizedParticle make_block_lattice(const DrudeParameters& drude,
                                     const Eigen::Vector3i& counts,
                                     double spacing) {
  check_spacing(spacing);
  if (counts.minCoeff() < 1) {
    throw std::invalid_argument("block lattice needs positive voxel counts");
  }
  VoxelizedParticle particle{drude, {}};
  const double vol = spacing * spacing * spacing;
  for (int i = 0; i < counts[0]; ++i) {
    for (int j = 0; j < counts[1]; ++j) {
      for (int k = 0; k < counts[2]; ++k) {
        const Vec3 pos(spacing * (i - 0.5 * (counts[0] - 1)),
                       spacing * (j - 0.5 * (counts[1] - 1)),
                       spacing * (k - 0.5 * (counts[2] - 1)));
        particle.voxels.push_back({pos, vol});
      }
    }
  }
  return particle;
}

VoxelizedParticle make_sphere_lattice(const DrudeParameters& drude,
                                      double radius, double spacing) {
  check_spacing(spacing);
  if (!(radius > 0.0)) {
    throw std::invalid_argument("sphere radius must be positive");
  }
  VoxelizedParticle particle{drude, {}};
  const double vol = spacing * spacing * spacing;
  const int m = static_cast<int>(std::floor(radius / spacing));
  for (int i = -m; i <= m; ++i) {
    for (int j = -m; j <= m; ++j) {
      for (int k = -m; k <= m; ++k) {
        const Vec3 pos(spacing * i, spacing * j, spacing * k);
        if (pos.norm() <= radius) {
          particle.voxels.push_back({pos, vol});
        }
      }
    }
  }
  if (particle.voxels.empty()) {
    particle.voxels.push_back({Vec3::Zero(), vol});
  }
  return particle;
}

VoxelizedParticle make_ellipsoid_lattice(const DrudeParameters& drude,
                                         const Vec3& semiaxes, double spacing) {
  check_spacing(spacing);
  if (!(semiaxes.minCoeff() > 0.0)) {
    throw std::invalid_argument("ellipsoid semiaxes must be positive");
  }
  VoxelizedParticle particle{drude, {}};
  const double vol = spacing * spacing * spacing;
  const Eigen::Vector3i m =
      (semiaxes / spacing).array().floor().cast<int>().matrix();
  for (int i = -m[0]; i <= m[0]; ++i) {
    for (int j = -m[1]; j <= m[1]; ++j) {
      for (int k = -m[2]; k <= m[2]; ++k) {
        const Vec3 pos(spacing * i, spacing * j, spacing * k);
        const Vec3 scaled = pos.cwiseQuotient(semiaxes);
        if (scaled.squaredNorm() <= 1.0) {
          particle.voxels.push_back({pos, vol});
        }
      }
    }
  }
  if (particle.voxels.empty()) {
    particle.voxels.push_back({Vec3::Zero(), vol});
  }
  return particle;
}

}  // namespace sers::dda
