#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "srforce/constants.hpp"
#include "srforce/permittivity.hpp"

namespace srf {

struct LifshitzSettings {
  double T = 300.0;            // K
  double rel_tol = 1e-8;       // Matsubara truncation target
  int max_matsubara = 10000;
  double quad_rel_tol = 1e-9;  // per-frequency k integral

  void validate() const;
};

/// The Matsubara sum did not reach the requested accuracy.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double partial_value, int terms)
      : std::runtime_error(what), partial_value_(partial_value), terms_(terms) {}
  double partial_value() const noexcept { return partial_value_; }
  int terms() const noexcept { return terms_; }

 private:
  double partial_value_;
  int terms_;
};

template <typename Scalar>
struct Reflection {
  Scalar te;
  Scalar tm;
};

/// Imaginary-frequency Fresnel coefficients of a vacuum/metal interface for
/// transverse wave number k (1/m), written in a cancellation-free form.
template <typename Scalar>
Reflection<Scalar> fresnel_coeffs(Scalar eps, Scalar xi, Scalar k) {
  using std::sqrt;
  if (!(eps >= Scalar(1)) || !(k >= Scalar(0)) || !(xi >= Scalar(0)) || (k == Scalar(0) && xi == Scalar(0)))
    throw std::domain_error("fresnel_coeffs: need eps >= 1, k >= 0, xi >= 0, (k, xi) != 0");
  const Scalar q2 = xi * xi / Scalar(constants::c * constants::c);
  const Scalar kappa = sqrt(k * k + q2);
  const Scalar kappa_m = sqrt(k * k + eps * q2);
  const Scalar em1 = eps - Scalar(1);
  // kappa - kappa_m = -(eps - 1) q2 / (kappa + kappa_m)
  const Scalar te = -em1 * q2 / ((kappa + kappa_m) * (kappa + kappa_m));
  // eps^2 kappa^2 - kappa_m^2 = (eps - 1) ((eps + 1) kappa^2 - q2)
  const Scalar denom = eps * kappa + kappa_m;
  const Scalar tm = em1 * ((eps + Scalar(1)) * kappa * kappa - q2) / (denom * denom);
  return {te, tm};
}

struct CasimirEnergy {
  double energy_per_area;  // J/m^2, <= 0
  int terms_used;          // Matsubara frequencies including n = 0
  double est_rel_err;
};

/// Lifshitz free energy per unit area between two identical half-spaces at
/// separation d. The n = 0 term is the Drude zero-frequency limit
/// (r_TM = 1, r_TE = 0) evaluated analytically.
CasimirEnergy lifshitz_energy(const PermittivityModel& model, double d, const LifshitzSettings& s);

/// Zero-frequency term alone, -k_B T zeta(3) / (16 pi d^2).
double lifshitz_zero_frequency_energy(double d, double T);

struct CasimirForceResult {
  double d;
  double energy_per_area;  // J/m^2
  double force;            // N, negative = attractive
  int terms_used;
  double est_rel_err;
};

/// Sphere-plane force by the proximity force approximation, 2 pi R E(d).
/// Requires d < R / 100.
CasimirForceResult pfa_force(const Geometry& g, const PermittivityModel& model, double d, const LifshitzSettings& s);

struct SecondDerivative {
  double value;
  double est_error;
};

/// Five-point central second difference of f at x with step h. The error
/// estimate is the gap to the three-point stencil on the same samples.
template <typename F>
SecondDerivative central_second_derivative(F&& f, double x, double h) {
  if (!(h >= 1e-12)) throw std::domain_error("central_second_derivative: step underflow (h < 1e-12 m)");
  const double fm2 = f(x - 2 * h), fm1 = f(x - h), f0 = f(x), fp1 = f(x + h), fp2 = f(x + 2 * h);
  const double five = (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h);
  const double three = (fp1 - 2 * f0 + fm1) / (h * h);
  return {five, std::abs(five - three)};
}

/// d^2 F / d d^2 of the PFA force (N/m^2) with step 1e-2 d. Same sign as F.
SecondDerivative force_second_derivative(const Geometry& g, const PermittivityModel& model, double d,
                                         const LifshitzSettings& s);

/// PFA force plus the separation-fluctuation term F'' delta^2 / 2.
double corrected_casimir_force(const Geometry& g, const PermittivityModel& model, double d,
                               const CorrectionParams& c, const LifshitzSettings& s);

/// Force and curvature from one five-point stencil, for callers that need
/// corrections at several delta values.
struct CasimirProfile {
  double force;
  SecondDerivative curvature;

  double corrected(double delta) const { return force + curvature.value * delta * delta / 2; }
};

CasimirProfile casimir_profile(const Geometry& g, const PermittivityModel& model, double d, const LifshitzSettings& s);

}  // namespace srf
