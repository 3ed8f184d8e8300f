#include "srforce/yukawa.hpp"

#include <algorithm>
#include <stdexcept>

#include "srforce/quadrature.hpp"

namespace srf {

namespace {

constexpr double pi = std::numbers::pi;

double slab_depth_factor(double thickness, double lambda) {
  return std::isinf(thickness) ? 1.0 : -std::expm1(-thickness / lambda);
}

}  // namespace

double effective_density(const PlateStack& stack, double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("effective_density: lambda must be positive");
  const auto& layers = stack.layers();
  double rho = layers.front().density;
  double depth = 0.0;
  for (std::size_t i = 1; i < layers.size(); ++i) {
    depth += layers[i - 1].thickness;
    rho += (layers[i].density - layers[i - 1].density) * std::exp(-depth / lambda);
  }
  return rho;
}

double yukawa_force_layered(const Geometry& g, const PlateStack& s1, const PlateStack& s2, const YukawaParams& p,
                            double d) {
  if (!(d > 0.0)) throw std::domain_error("yukawa_force_layered: d must be positive");
  if (!(p.lambda > 0.0)) throw std::domain_error("yukawa_force_layered: lambda must be positive");
  if (!(p.lambda <= g.R / 100.0)) throw std::domain_error("yukawa_force_layered: closed form needs lambda <= R/100");
  return yukawa_pfa_kernel(g.R, p.alpha, p.lambda, effective_density(s1, p.lambda), effective_density(s2, p.lambda),
                           d);
}

namespace detail {

// Exact infinite-slab force minus the contribution of the region outside the
// rim. Along direction phi the rim lies at in-plane distance rho_W(phi) and
// the radial and depth integrals of the excluded region are elementary,
// leaving lambda * int_0^{2 pi} [e^{-S(z)/lambda} - e^{-S(z+t)/lambda}] dphi
// with S(h) = sqrt(h^2 + rho_W^2).
double point_slab_force(const SlabBody& slab, double lambda, double z, double q, double tol) {
  const double full = 2.0 * pi * lambda * std::exp(-z / lambda) * slab_depth_factor(slab.thickness, lambda);
  if (std::isinf(slab.half_width)) return full;
  const double W = slab.half_width;
  auto outside = [&](double phi) {
    const double s = std::sin(phi);
    const double rho_w = -q * std::cos(phi) + std::sqrt(W * W - q * q * s * s);
    const double top = std::exp(-std::hypot(z, rho_w) / lambda);
    const double bottom = std::isinf(slab.thickness) ? 0.0 : std::exp(-std::hypot(z + slab.thickness, rho_w) / lambda);
    return top - bottom;
  };
  // Symmetric in phi -> -phi.
  const double excluded = 2.0 * lambda * quad::gauss_kronrod(outside, 0.0, pi, tol, 1e-300).value;
  return full - excluded;
}

}  // namespace detail

NumericForce yukawa_force_numeric(const SphereBody& sphere, const SlabBody& slab, const YukawaParams& p, double d,
                                  double tol) {
  if (!(sphere.radius > 0.0 && sphere.density > 0.0 && slab.thickness > 0.0 && slab.density > 0.0 &&
        slab.half_width > 0.0 && p.lambda > 0.0 && d > 0.0))
    throw std::domain_error("yukawa_force_numeric: all dimensions must be positive");
  if (!(tol >= 1e-6 && tol <= 1e-2)) throw std::domain_error("yukawa_force_numeric: tol must lie in [1e-6, 1e-2]");
  if (!(slab.half_width > sphere.radius))
    throw std::domain_error("yukawa_force_numeric: slab must extend beyond the sphere");

  const double R = sphere.radius;
  const double lambda = p.lambda;
  const double scale = constants::G * p.alpha * sphere.density * slab.density;
  if (p.alpha == 0.0) return {0.0, 0.0, true};

  // Slice the sphere at height s above its lowest point; slice radius a(s).
  auto slice_area = [&](double s) { return pi * std::max(2.0 * R * s - s * s, 0.0); };
  const std::vector<double> breaks = {lambda, 10.0 * lambda, 40.0 * lambda};
  const double inner_tol = tol / 10.0;

  double value = 0.0;
  double abs_err = 0.0;
  bool converged = true;
  if (std::isinf(slab.half_width)) {
    auto integrand = [&](double s) {
      return slice_area(s) * detail::point_slab_force(slab, lambda, d + s, 0.0, inner_tol);
    };
    const auto r = quad::gauss_kronrod_split(integrand, 0.0, 2.0 * R, breaks, inner_tol);
    value = r.value;
    abs_err = r.abs_error;
    converged = r.converged;
  } else {
    auto slice = [&](double s) {
      const double a = std::sqrt(std::max(2.0 * R * s - s * s, 0.0));
      if (a == 0.0) return 0.0;
      auto ring = [&](double q) { return 2.0 * pi * q * detail::point_slab_force(slab, lambda, d + s, q, inner_tol); };
      return quad::gauss_kronrod(ring, 0.0, a, inner_tol, 1e-300).value;
    };
    const auto r = quad::gauss_kronrod_split(slice, 0.0, 2.0 * R, breaks, inner_tol);
    value = r.value;
    abs_err = r.abs_error;
    converged = r.converged;
  }
  const double rel = value != 0.0 ? abs_err / std::abs(value) + inner_tol : 0.0;
  return {scale * value, rel, converged && rel <= tol};
}

}  // namespace srf
