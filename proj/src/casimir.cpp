#include "srforce/casimir.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "srforce/quadrature.hpp"

namespace srf {

namespace {

constexpr double pi = std::numbers::pi;

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const auto half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

// k integral of one Matsubara frequency, in y = 2 kappa d:
//   int_0^inf k dk sum_p ln(1 - r_p^2 e^{-2 kappa d})
//     = 1/(4 d^2) int_{2 xi d / c}^inf y sum_p ln(1 - r_p^2 e^{-y}) dy
quad::Result<double> matsubara_k_integral(double eps, double xi, double d, double quad_rel_tol) {
  const double q = xi / constants::c;
  const double y0 = 2.0 * q * d;
  auto integrand = [&](double y) {
    const double kappa = y / (2.0 * d);
    const double k = std::sqrt(std::max(kappa * kappa - q * q, 0.0));
    const auto r = fresnel_coeffs(eps, xi, k);
    const double damp = std::exp(-y);
    return y * (std::log1p(-r.te * r.te * damp) + std::log1p(-r.tm * r.tm * damp));
  };
  auto res = quad::integrate_decaying(integrand, y0, 1.0, quad_rel_tol);
  const double scale = 1.0 / (4.0 * d * d);
  res.value *= scale;
  res.abs_error *= scale;
  return res;
}

}  // namespace

void LifshitzSettings::validate() const {
  if (!(T > 0.0)) throw std::invalid_argument("LifshitzSettings: T must be positive");
  if (!(rel_tol > 0.0 && rel_tol < 1e-3)) throw std::invalid_argument("LifshitzSettings: rel_tol must lie in (0, 1e-3)");
  if (max_matsubara < 10) throw std::invalid_argument("LifshitzSettings: max_matsubara must be >= 10");
  if (!(quad_rel_tol > 0.0)) throw std::invalid_argument("LifshitzSettings: quad_rel_tol must be positive");
}

double lifshitz_zero_frequency_energy(double d, double T) {
  return -constants::k_B * T * zeta3 / (16.0 * pi * d * d);
}

CasimirEnergy lifshitz_energy(const PermittivityModel& model, double d, const LifshitzSettings& s) {
  s.validate();
  if (!(d > 0.0)) throw std::domain_error("lifshitz_energy: d must be positive");

  const double kT = constants::k_B * s.T;
  const double xi1 = 2.0 * pi * kT / constants::hbar;
  const double prefactor = kT / (2.0 * pi);

  std::vector<double> terms;
  terms.reserve(64);
  terms.push_back(lifshitz_zero_frequency_energy(d, s.T));
  double running = terms.front();
  double quad_err = 0.0;
  double tail_rel = std::numeric_limits<double>::infinity();
  int passes = 0;

  for (int n = 1; n < s.max_matsubara; ++n) {
    const double xi = n * xi1;
    const double eps = eps_at(model, xi);
    const auto k_int = matsubara_k_integral(eps, xi, d, s.quad_rel_tol);
    const double term = prefactor * k_int.value;
    quad_err += prefactor * k_int.abs_error;
    terms.push_back(term);
    running += term;

    // Geometric estimate of everything beyond n, from the ratio of the last two terms.
    if (n >= 2) {
      const double prev = terms[terms.size() - 2];
      const double ratio = prev != 0.0 ? term / prev : 0.0;
      const double tail = (ratio >= 0.0 && ratio < 1.0) ? std::abs(term) * ratio / (1.0 - ratio)
                                                        : std::numeric_limits<double>::infinity();
      tail_rel = running != 0.0 ? tail / std::abs(running) : (tail == 0.0 ? 0.0 : tail);
      passes = tail_rel < s.rel_tol ? passes + 1 : 0;
      if (passes >= 3) {
        const double e = pairwise_sum(terms);
        const double rel = tail_rel + (e != 0.0 ? quad_err / std::abs(e) : 0.0);
        return {e, static_cast<int>(terms.size()), rel};
      }
    }
  }
  throw ConvergenceError("lifshitz_energy: Matsubara sum not converged within max_matsubara terms",
                         pairwise_sum(terms), static_cast<int>(terms.size()));
}

CasimirForceResult pfa_force(const Geometry& g, const PermittivityModel& model, double d, const LifshitzSettings& s) {
  if (!(g.R > 0.0)) throw std::invalid_argument("pfa_force: R must be positive");
  if (!(d > 0.0)) throw std::domain_error("pfa_force: d must be positive");
  if (!(d < g.R / 100.0)) throw std::domain_error("pfa_force: proximity force approximation needs d < R/100");
  const auto e = lifshitz_energy(model, d, s);
  return {d, e.energy_per_area, 2.0 * pi * g.R * e.energy_per_area, e.terms_used, e.est_rel_err};
}

SecondDerivative force_second_derivative(const Geometry& g, const PermittivityModel& model, double d,
                                         const LifshitzSettings& s) {
  if (!(d > 0.0)) throw std::domain_error("force_second_derivative: d must be positive");
  return central_second_derivative([&](double x) { return pfa_force(g, model, x, s).force; }, d, 1e-2 * d);
}

CasimirProfile casimir_profile(const Geometry& g, const PermittivityModel& model, double d, const LifshitzSettings& s) {
  if (!(d > 0.0)) throw std::domain_error("casimir_profile: d must be positive");
  double center = 0.0;
  auto f = [&](double x) {
    const double force = pfa_force(g, model, x, s).force;
    if (x == d) center = force;
    return force;
  };
  const auto curvature = central_second_derivative(f, d, 1e-2 * d);
  return {center, curvature};
}

double corrected_casimir_force(const Geometry& g, const PermittivityModel& model, double d,
                               const CorrectionParams& c, const LifshitzSettings& s) {
  c.validate();
  if (!(d > c.delta)) throw std::domain_error("corrected_casimir_force: d must exceed delta");
  if (c.delta == 0.0) return pfa_force(g, model, d, s).force;
  return casimir_profile(g, model, d, s).corrected(c.delta);
}

}  // namespace srf
