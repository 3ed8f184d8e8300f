#pragma once

#include <limits>
#include <numbers>
#include <vector>

namespace srf {

// CODATA 2018. SI throughout; eV and GeV only where noted.
struct PhysicalConstants {
  static constexpr double hbar = 1.054571817e-34;     // J s
  static constexpr double c = 299792458.0;            // m/s
  static constexpr double k_B = 1.380649e-23;         // J/K
  static constexpr double eps0 = 8.8541878128e-12;    // F/m
  static constexpr double G = 6.67430e-11;            // m^3/(kg s^2)
  static constexpr double eV_to_J = 1.602176634e-19;  // J/eV
  static constexpr double M_P = 1.220890e19;          // GeV
  static constexpr double M_N = 1.0;                  // GeV
};

using constants = PhysicalConstants;

inline constexpr double zeta3 = 1.2020569031595942854;

inline constexpr double micrometre = 1e-6;
inline constexpr double nanometre = 1e-9;
inline constexpr double piconewton = 1e-12;

/// Sphere-plane geometry. Only the lens radius of curvature enters the PFA.
struct Geometry {
  double R = 0.156;
};

inline constexpr double semi_infinite = std::numeric_limits<double>::infinity();

struct Layer {
  double thickness;  // m, or semi_infinite for the substrate
  double density;    // kg/m^3
};

/// Material layers of one plate, vacuum-facing layer first. Exactly the last
/// layer is semi-infinite.
class PlateStack {
 public:
  explicit PlateStack(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const noexcept { return layers_; }

  /// Sum of thickness * density over the finite layers (kg/m^2).
  double finite_areal_density() const noexcept;

  /// Au 700 A / Ti 100 A / glass, the coated plates used for the measurement.
  static PlateStack gold_titanium_glass();

 private:
  std::vector<Layer> layers_;
};

inline double g_per_cm3(double rho) { return rho * 1e3; }

struct CorrectionParams {
  double delta = 40e-9;        // rms separation fluctuation (m)
  double sigma_delta = 20e-9;  // 1 sigma uncertainty on delta (m)

  void validate() const;
};

/// Photon energy (eV) to angular frequency (rad/s).
double energy_to_angular_frequency(double energy_eV);

enum class MassConvention { H_BAR, PLANCK_H };

/// Boson mass (eV) whose Compton wavelength is `lambda` (m).
double lambda_to_mass(double lambda, MassConvention convention);

}  // namespace srf
