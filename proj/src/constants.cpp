#include "srforce/constants.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace srf {

PlateStack::PlateStack(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("PlateStack: no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const bool last = i + 1 == layers_.size();
    if (!(l.density > 0.0) || !std::isfinite(l.density))
      throw std::invalid_argument("PlateStack: layer densities must be positive");
    if (last && !std::isinf(l.thickness))
      throw std::invalid_argument("PlateStack: last layer must be semi-infinite");
    if (!last && !(l.thickness > 0.0 && std::isfinite(l.thickness)))
      throw std::invalid_argument("PlateStack: finite layers need positive thickness");
  }
}

double PlateStack::finite_areal_density() const noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) sum += layers_[i].thickness * layers_[i].density;
  return sum;
}

PlateStack PlateStack::gold_titanium_glass() {
  return PlateStack({{70e-9, g_per_cm3(19.0)}, {10e-9, g_per_cm3(4.5)}, {semi_infinite, g_per_cm3(2.6)}});
}

void CorrectionParams::validate() const {
  if (!(delta >= 0.0) || !(sigma_delta >= 0.0))
    throw std::invalid_argument("CorrectionParams: delta and sigma_delta must be non-negative");
}

double energy_to_angular_frequency(double energy_eV) {
  if (!(energy_eV >= 0.0)) throw std::domain_error("energy_to_angular_frequency: negative energy");
  return energy_eV * constants::eV_to_J / constants::hbar;
}

double lambda_to_mass(double lambda, MassConvention convention) {
  if (!(lambda > 0.0)) throw std::domain_error("lambda_to_mass: lambda must be positive");
  const double hbar_c_eVm = constants::hbar * constants::c / constants::eV_to_J;
  const double m = hbar_c_eVm / lambda;
  return convention == MassConvention::PLANCK_H ? 2.0 * std::numbers::pi * m : m;
}

}  // namespace srf
