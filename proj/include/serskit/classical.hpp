#pragma once

#include "serskit/types.hpp"

namespace sers::classical {

/// Two coupled point dipoles: molecule (alpha_M) and particle (alpha_P)
/// interacting through the dipole tensor lambda, with the molecular
/// polarizability carrying a vibrational derivative.
struct ClassicalSystem {
  Tensor3 alpha_M = Tensor3::Zero();
  Tensor3 alpha_P = Tensor3::Zero();
  Tensor3 lambda = Tensor3::Zero();
  Tensor3 dalpha_M_dQ = Tensor3::Zero();
  double delta_Q = 0.0;
};

/// Closed-form total polarizability of the self-consistently coupled pair,
///   (1 - aM L aP L)^-1 aM (1 + L aP) + (1 - aP L aM L)^-1 aP (1 + L aM).
/// Throws ResonanceSingularityError when an image matrix is singular
/// (condition number above 1e12), naming the offending factor.
Tensor3 total_polarizability(const ClassicalSystem& sys);

/// deltaQ * d(alpha_tot)/dQ by analytic differentiation of the closed form
/// (product/inverse rule applied to dalpha_M_dQ), not by re-differencing.
Tensor3 sers_polarizability(const ClassicalSystem& sys);

/// I_SERS/I0 for the coupled system.
double sers_intensity(const ClassicalSystem& sys, const FieldConfig& field);

/// Normal Raman intensity ratio I_Raman/I0 of the bare molecule, i.e. the
/// particle-free reduction of sers_intensity.
double raman_intensity(const Tensor3& dalpha_M_dQ, double delta_Q,
                       const FieldConfig& field);

/// Aligned isotropic z-axis enhancement: the exact quotient form and its
/// fourth-power approximation |1 + 2 alpha_P / r^3|^4.
struct EnhancementSplit {
  double full = 0.0;
  double approx = 0.0;
};
EnhancementSplit enhancement_factor_zaxis(Complex alpha_M, Complex alpha_P, double r);

}  // namespace sers::classical
