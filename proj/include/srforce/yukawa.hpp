#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "srforce/constants.hpp"

namespace srf {

struct YukawaParams {
  double alpha;   // strength relative to Newtonian gravity
  double lambda;  // range (m)
};

/// Depth-weighted density of a layered plate seen by a Yukawa force of range
/// lambda: rho_1 + sum_{i>=2} (rho_i - rho_{i-1}) exp(-h_{i-1}/lambda), with
/// h_i the depth of the bottom of layer i.
double effective_density(const PlateStack& stack, double lambda);

/// 4 pi^2 G R alpha lambda^3 exp(-d/lambda) rho_1 rho_2, with no validity gate.
template <typename Scalar>
Scalar yukawa_pfa_kernel(Scalar R, Scalar alpha, Scalar lambda, Scalar rho1, Scalar rho2, Scalar d) {
  using std::exp;
  constexpr double pi = std::numbers::pi;
  return Scalar(4 * pi * pi * constants::G) * R * alpha * lambda * lambda * lambda * exp(-d / lambda) * rho1 * rho2;
}

/// Yukawa force between the coated lens (stack s1) and flat (stack s2).
/// Attractive for alpha > 0, reported positive. Requires lambda <= R/100.
double yukawa_force_layered(const Geometry& g, const PlateStack& s1, const PlateStack& s2, const YukawaParams& p,
                            double d);

struct SphereBody {
  double radius;   // m
  double density;  // kg/m^3
};

struct SlabBody {
  double thickness;                                          // m, may be infinite
  double density;                                            // kg/m^3
  double half_width = std::numeric_limits<double>::infinity();  // lateral radius (m)
};

struct NumericForce {
  double value;
  double est_rel_err;
  bool converged;
};

/// Yukawa force between a homogeneous sphere and a homogeneous slab by direct
/// quadrature over the sphere volume, using the exact point-slab force and,
/// for a finite slab, an angular integral over the region beyond its rim.
/// tol in [1e-6, 1e-2].
NumericForce yukawa_force_numeric(const SphereBody& sphere, const SlabBody& slab, const YukawaParams& p, double d,
                                  double tol);

namespace detail {
/// Normal force on a unit mass at height z above the top face of the slab and
/// lateral offset q from its axis, in units of G alpha rho_slab.
double point_slab_force(const SlabBody& slab, double lambda, double z, double q, double tol);
}  // namespace detail

}  // namespace srf
