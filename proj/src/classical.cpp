#include <cmath>
#include <stdexcept>
#include <string>

#include "serskit/classical.hpp"
#include "serskit/errors.hpp"

namespace sers::classical {

namespace {

constexpr double kMaxCondition = 1e12;

Tensor3 checked_inverse(const Tensor3& m, const char* label) {
  if (!m.allFinite()) {
    throw ResonanceSingularityError(std::string("image matrix ") + label +
                                    " has non-finite entries");
  }
  Eigen::JacobiSVD<Tensor3> svd(m);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smin > 0.0) || smax / smin > kMaxCondition) {
    throw ResonanceSingularityError(
        std::string("image matrix ") + label +
        " is singular at this frequency (resonance pole)");
  }
  return m.inverse();
}

}  // namespace

Tensor3 total_polarizability(const ClassicalSystem& sys) {
  const Tensor3 one = Tensor3::Identity();
  const Tensor3& aM = sys.alpha_M;
  const Tensor3& aP = sys.alpha_P;
  const Tensor3& L = sys.lambda;

  const Tensor3 imageM = one - aM * L * aP * L;
  const Tensor3 imageP = one - aP * L * aM * L;
  return checked_inverse(imageM, "(1 - aM.L.aP.L)") * aM * (one + L * aP) +
         checked_inverse(imageP, "(1 - aP.L.aM.L)") * aP * (one + L * aM);
}

Tensor3 sers_polarizability(const ClassicalSystem& sys) {
  const Tensor3 one = Tensor3::Identity();
  const Tensor3& aM = sys.alpha_M;
  const Tensor3& aP = sys.alpha_P;
  const Tensor3& L = sys.lambda;
  const Tensor3& dM = sys.dalpha_M_dQ;

  const Tensor3 invM = checked_inverse(one - aM * L * aP * L, "(1 - aM.L.aP.L)");
  const Tensor3 invP = checked_inverse(one - aP * L * aM * L, "(1 - aP.L.aM.L)");

  // d/dQ of invM . aM . (1 + L aP): the image matrix differentiates through
  // its inverse, d(A^-1) = -A^-1 dA A^-1 with dA = -dM.L.aP.L.
  const Tensor3 termM = invM * (dM * L * aP * L) * invM * (aM * (one + L * aP)) +
                        invM * (dM * (one + L * aP));
  const Tensor3 termP = invP * (aP * L * dM * L) * invP * (aP * (one + L * aM)) +
                        invP * (aP * L * dM);
  return sys.delta_Q * (termM + termP);
}

double sers_intensity(const ClassicalSystem& sys, const FieldConfig& field) {
  const Tensor3 alpha_sers = sers_polarizability(sys);
  const Complex amplitude =
      field.scattered.polarization.dot(alpha_sers * field.incident.polarization);
  return intensity_prefactor(field) * std::norm(amplitude);
}

double raman_intensity(const Tensor3& dalpha_M_dQ, double delta_Q,
                       const FieldConfig& field) {
  const Complex amplitude = field.scattered.polarization.dot(
      (delta_Q * dalpha_M_dQ) * field.incident.polarization);
  return intensity_prefactor(field) * std::norm(amplitude);
}

EnhancementSplit enhancement_factor_zaxis(Complex alpha_M, Complex alpha_P,
                                          double r) {
  if (!(r > 0.0)) {
    throw std::domain_error("enhancement factor needs r > 0");
  }
  const double w = 2.0 / (r * r * r);
  const Complex numerator = 1.0 + w * alpha_P;
  const Complex denominator = 1.0 - alpha_P * alpha_M * w * w;
  if (std::abs(denominator) < 1e-12) {
    throw ResonanceSingularityError(
        "aligned image denominator 1 - aP aM (2/r^3)^2 is singular");
  }
  const Complex quotient = (numerator * numerator) / (denominator * denominator);
  return {std::norm(quotient), std::norm(numerator * numerator)};
}

}  // namespace sers::classical
