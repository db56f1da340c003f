#pragma once

#include "serskit/types.hpp"

namespace sers {

/// Near-field dipole interaction tensor (3 r^ r^ - 1)/r^3 for the given
/// separation vector. Symmetric, traceless, and even in the sign of the
/// separation. Throws std::domain_error for zero separation.
Eigen::Matrix3d dipole_tensor(const Vec3& separation);

/// Harmonic-oscillator matrix element <nu'|(Q - Q0)|nu>. Nonzero only for
/// nu' = nu +- 1.
double vibrational_matrix_element(const VibrationalMode& mode, int nu, int nu_prime);

}  // namespace sers
