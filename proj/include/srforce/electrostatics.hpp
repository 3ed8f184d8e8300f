#pragma once

#include <numbers>
#include <stdexcept>

#include "srforce/constants.hpp"

namespace srf {

struct VoltageState {
  double V = 0.0;      // applied bias (V)
  double V_m = 0.0;    // minimizing potential (V)
  double V_rms = 0.0;  // patch rms amplitude (V)
};

/// pi eps0 R / d, the sphere-plane capacitance gradient per volt squared.
template <typename Scalar>
Scalar sphere_plane_coupling(const Geometry& g, Scalar d) {
  return Scalar(std::numbers::pi * constants::eps0 * g.R) / d;
}

/// Bias plus patch force, pi eps0 R [(V - V_m)^2 + V_rms^2] / d. Attractive,
/// reported positive.
inline double electrostatic_force(const Geometry& g, const VoltageState& v, double d) {
  if (!(d > 0.0)) throw std::domain_error("electrostatic_force: d must be positive");
  if (!(v.V_rms >= 0.0)) throw std::invalid_argument("electrostatic_force: V_rms must be non-negative");
  const double dv = v.V - v.V_m;
  return sphere_plane_coupling(g, d) * (dv * dv + v.V_rms * v.V_rms);
}

/// 1 + (delta/d)^2, applied to both the calibrated separation and the patch force.
template <typename Scalar>
Scalar fluctuation_factor(Scalar d, double delta) {
  const Scalar r = Scalar(delta) / d;
  return Scalar(1) + r * r;
}

inline double corrected_separation(double d_raw, const CorrectionParams& c) {
  c.validate();
  if (!(d_raw > c.delta)) throw std::domain_error("corrected_separation: d_raw must exceed delta");
  return d_raw * fluctuation_factor(d_raw, c.delta);
}

/// Patch force per unit V_rms^2 including the fluctuation factor. This is the
/// column the two-parameter fit regresses on.
template <typename Scalar>
Scalar patch_force_per_volt2(const Geometry& g, Scalar d, const CorrectionParams& c) {
  return sphere_plane_coupling(g, d) * fluctuation_factor(d, c.delta);
}

inline double corrected_patch_force(const Geometry& g, double v_rms, double d, const CorrectionParams& c) {
  c.validate();
  if (!(d > c.delta)) throw std::domain_error("corrected_patch_force: d must exceed delta");
  return patch_force_per_volt2(g, d, c) * v_rms * v_rms;
}

}  // namespace srf
