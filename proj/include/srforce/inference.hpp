#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "srforce/constants.hpp"

namespace srf {

struct MeasurementRecord {
  double d;      // corrected separation (m)
  double force;  // N, attractive positive
  double sigma;  // 1 sigma total uncertainty (N)
};

/// Force-vs-separation data as aligned columns.
struct Dataset {
  Eigen::VectorXd d;
  Eigen::VectorXd force;
  Eigen::VectorXd sigma;

  Eigen::Index size() const noexcept { return d.size(); }
  MeasurementRecord record(Eigen::Index i) const { return {d[i], force[i], sigma[i]}; }
  static Dataset from_records(std::span<const MeasurementRecord> records);
  void validate() const;
};

struct FitResult {
  double v_rms_sq;      // V^2
  double offset;        // N
  Eigen::Matrix2d cov;  // over (v_rms_sq, offset)
  double chi2;
  int dof;
  double reduced_chi2;
  bool negative_v_rms_sq;  // unconstrained solution fell below zero

  double v_rms() const;
  double sigma_v_rms_sq() const { return std::sqrt(cov(0, 0)); }
  double sigma_offset() const { return std::sqrt(cov(1, 1)); }
};

/// Nuisance columns of the force model: the fluctuation-corrected patch force
/// per V^2 and a constant offset.
Eigen::MatrixXd nuisance_design(const Eigen::VectorXd& d, const Geometry& g, const CorrectionParams& c);

/// Weighted linear least squares of
///   F(d) = theory(d) + v_rms_sq * pi eps0 R (1 + (delta/d)^2) / d + offset
/// with weights 1/sigma^2. `theory` is the corrected Casimir force at each d
/// (attractive positive).
FitResult fit_two_param(const Dataset& data, const Eigen::VectorXd& theory, const Geometry& g,
                        const CorrectionParams& c);

Eigen::VectorXd fitted_model(const Dataset& data, const FitResult& fit, const Eigen::VectorXd& theory,
                             const Geometry& g, const CorrectionParams& c);

struct Residuals {
  Eigen::VectorXd d;
  Eigen::VectorXd r;
  Eigen::VectorXd sigma;
};

Residuals residuals(const Dataset& data, const FitResult& fit, const Eigen::VectorXd& theory, const Geometry& g,
                    const CorrectionParams& c);

struct AlphaEstimate {
  double alpha_hat;
  double sigma_alpha;
};

/// One-parameter weighted regression of the residuals on `templ` (the Yukawa
/// force at alpha = 1).
AlphaEstimate alpha_estimate(const Residuals& res, const Eigen::VectorXd& templ);

/// One-sided 95% upper limit, max(alpha_hat, 0) + 1.645 sigma_alpha.
double alpha_limit_95(double alpha_hat, double sigma_alpha);

inline constexpr double one_sided_z95 = 1.645;

struct ExclusionPoint {
  double lambda;
  double alpha_hat;
  double sigma_alpha;
  double alpha_95;
};

enum class TemplateMode {
  // Template with its projection on the nuisance columns removed; equivalent
  // to the alpha of a joint three-parameter fit.
  Projected,
  // Template used as is.
  Raw,
};

struct ExclusionOptions {
  TemplateMode mode = TemplateMode::Projected;
  // Refit (v_rms_sq, offset, alpha) jointly on the residuals.
  bool joint = false;
};

struct SkippedLambda {
  double lambda;
  std::string reason;
};

struct ExclusionCurve {
  std::vector<ExclusionPoint> points;
  std::vector<SkippedLambda> skipped;
};

/// Log-spaced grid of `count` ranges in [lo, hi].
std::vector<double> log_grid(double lo, double hi, int count);

ExclusionCurve exclusion_curve(const Residuals& res, std::span<const double> lambdas, const PlateStack& s1,
                               const PlateStack& s2, const Geometry& g, const CorrectionParams& c,
                               const ExclusionOptions& opts = {});

/// Yukawa force at alpha = 1 at each separation.
Eigen::VectorXd yukawa_template(const Eigen::VectorXd& d, double lambda, const PlateStack& s1, const PlateStack& s2,
                                const Geometry& g);

/// (4+n)-dimensional Planck scale (GeV) for a boson of the given mass (eV),
/// sqrt(m M_P).
double mstar_from_mass(double mass_eV, double planck_mass_GeV = constants::M_P);

/// Planck scale bound implied by excluding ranges up to lambda_max.
double mstar_limit(double lambda_max, MassConvention convention, double planck_mass_GeV = constants::M_P);

}  // namespace srf
