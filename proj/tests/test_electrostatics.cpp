#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "srforce/electrostatics.hpp"

using namespace srf;

TEST(ElectrostaticForce, Values) {
  const Geometry g{0.156};
  EXPECT_EQ(electrostatic_force(g, {0.02, 0.02, 0.0}, 1e-6), 0.0);
  EXPECT_NEAR(electrostatic_force(g, {0.0, 0.0, 0.01}, 1e-6), 4.34e-10, 0.005e-10);
  const double f1 = electrostatic_force(g, {0.0, 0.0, 0.01}, 2e-6);
  const double f2 = electrostatic_force(g, {0.0, 0.0, 0.02}, 2e-6);
  EXPECT_NEAR(f2 / f1, 4.0, 1e-14);
  EXPECT_THROW(electrostatic_force(g, {}, 0.0), std::domain_error);
}

TEST(ElectrostaticForce, MinimizedAtContactPotential) {
  const Geometry g;
  for (double d : {0.7e-6, 2e-6, 7e-6}) {
    const double vm = 0.02;
    double best_v = 0, best_f = INFINITY;
    for (int i = -200; i <= 200; ++i) {
      const double v = vm + i * 1e-4;
      const double f = electrostatic_force(g, {v, vm, 0.012}, d);
      if (f < best_f) {
        best_f = f;
        best_v = v;
      }
    }
    EXPECT_NEAR(best_v, vm, 1e-12);
  }
}

TEST(ElectrostaticForce, PatchTermScalesAsInverseDistance) {
  const Geometry g;
  const double ref = electrostatic_force(g, {0, 0, 0.015}, 0.7e-6) * 0.7e-6;
  for (int i = 0; i < 20; ++i) {
    const double d = 0.7e-6 * std::pow(10.0, i / 19.0);
    EXPECT_NEAR(electrostatic_force(g, {0, 0, 0.015}, d) * d / ref, 1.0, 1e-14);
  }
}

TEST(CorrectedSeparation, Values) {
  EXPECT_DOUBLE_EQ(corrected_separation(1e-6, {0.0, 0.0}), 1e-6);
  EXPECT_NEAR(corrected_separation(1e-6, {40e-9, 0.0}), 1.0016e-6, 1e-15);
  EXPECT_NEAR(corrected_separation(0.7e-6, {40e-9, 0.0}), 0.70229e-6, 1e-11);
  EXPECT_THROW(corrected_separation(40e-9, {40e-9, 0.0}), std::domain_error);
}

TEST(CorrectedPatchForce, Values) {
  const Geometry g;
  const double bare = std::numbers::pi * constants::eps0 * g.R * 0.015 * 0.015 / 1e-6;
  EXPECT_DOUBLE_EQ(corrected_patch_force(g, 0.015, 1e-6, {0.0, 0.0}), bare);
  EXPECT_NEAR(corrected_patch_force(g, 0.015, 1e-6, {40e-9, 0.0}) / bare, 1.0016, 1e-12);
  EXPECT_EQ(corrected_patch_force(g, 0.0, 1e-6, {40e-9, 0.0}), 0.0);
  EXPECT_THROW(corrected_patch_force(g, 0.01, 30e-9, {40e-9, 0.0}), std::domain_error);
}

TEST(FluctuationFactor, AtLeastOneAndTendsToOne) {
  double prev = INFINITY;
  for (int i = 0; i < 40; ++i) {
    const double d = 50e-9 * std::pow(1.4, i);
    const double f = fluctuation_factor(d, 40e-9);
    EXPECT_GE(f, 1.0);
    EXPECT_LT(f, prev);
    prev = f;
  }
  EXPECT_NEAR(fluctuation_factor(1.0, 40e-9), 1.0, 1e-14);
}
