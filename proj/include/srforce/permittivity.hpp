#pragma once

#include <filesystem>
#include <stdexcept>
#include <variant>
#include <vector>

#include "srforce/constants.hpp"

namespace srf {

struct DrudeParams {
  double omega_p;  // plasma frequency (rad/s)
  double gamma;    // relaxation rate (rad/s)

  /// Gold: 7.54 eV plasma frequency, 0.051 eV relaxation.
  static DrudeParams gold();
  static DrudeParams from_eV(double omega_p_eV, double gamma_eV);
  void validate() const;
};

/// Drude permittivity on the imaginary axis, 1 + wp^2 / (xi (xi + gamma)).
template <typename Scalar>
Scalar drude_eps_imag_axis(Scalar omega_p, Scalar gamma, Scalar xi) {
  return Scalar(1) + omega_p * omega_p / (xi * (xi + gamma));
}

/// Drude absorption on the real axis, wp^2 gamma / (w (w^2 + gamma^2)).
template <typename Scalar>
Scalar drude_eps_imag_part(Scalar omega_p, Scalar gamma, Scalar omega) {
  return omega_p * omega_p * gamma / (omega * (omega * omega + gamma * gamma));
}

double eps_drude(const DrudeParams& p, double xi);

struct OpticalSample {
  double omega;     // rad/s
  double eps_imag;  // Im eps(omega)
};

/// Tabulated absorption data Im eps(omega), log-log interpolated between samples.
class OpticalTable {
 public:
  explicit OpticalTable(std::vector<OpticalSample> samples);

  /// Reads a CSV with header `omega_rad_s,eps_imag`; `#` starts a comment line.
  static OpticalTable from_csv(const std::filesystem::path& path);

  const std::vector<OpticalSample>& samples() const noexcept { return samples_; }
  double omega_min() const noexcept { return samples_.front().omega; }
  double omega_max() const noexcept { return samples_.back().omega; }

  /// Interpolated Im eps at omega inside [omega_min, omega_max].
  double eps_imag(double omega) const;

 private:
  std::vector<OpticalSample> samples_;
};

struct TabulatedModel {
  OpticalTable table;
  DrudeParams tail;  // supplies Im eps outside the tabulated range
};

struct PermittivityModel {
  std::variant<DrudeParams, TabulatedModel> variant;

  static PermittivityModel drude(DrudeParams p) { return {p}; }
  static PermittivityModel tabulated(OpticalTable t, DrudeParams tail) {
    return {TabulatedModel{std::move(t), tail}};
  }
};

/// eps(i xi) from the Kramers-Kronig transform of the table (plus Drude tails).
/// Relative quadrature tolerance 1e-6.
double eps_tabulated(const TabulatedModel& m, double xi);
double eps_tabulated(const PermittivityModel& m, double xi);

double eps_at(const PermittivityModel& m, double xi);

}  // namespace srf
