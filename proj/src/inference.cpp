#include "srforce/inference.hpp"

#include <cmath>
#include <stdexcept>

#include "srforce/electrostatics.hpp"
#include "srforce/yukawa.hpp"

namespace srf {

namespace {

struct LsqSolution {
  Eigen::VectorXd params;
  Eigen::MatrixXd cov;
};

// Weighted least squares with column equilibration; rank-deficient designs
// are rejected.
LsqSolution weighted_lsq(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const Eigen::VectorXd& sigma) {
  const Eigen::VectorXd w = sigma.cwiseInverse();
  Eigen::MatrixXd Aw = w.asDiagonal() * A;
  const Eigen::VectorXd yw = w.cwiseProduct(y);
  Eigen::VectorXd scale = Aw.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (!(scale[j] > 0.0) || !std::isfinite(scale[j])) throw std::domain_error("weighted_lsq: empty design column");
  }
  Aw = Aw * scale.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Aw);
  qr.setThreshold(1e-10);
  if (qr.rank() < Aw.cols()) throw std::domain_error("weighted_lsq: singular design matrix");
  const Eigen::VectorXd p_scaled = qr.solve(yw);
  const Eigen::MatrixXd normal_inv = (Aw.transpose() * Aw).ldlt().solve(
      Eigen::MatrixXd::Identity(Aw.cols(), Aw.cols()));
  const Eigen::VectorXd inv_scale = scale.cwiseInverse();
  LsqSolution out;
  out.params = inv_scale.cwiseProduct(p_scaled);
  out.cov = inv_scale.asDiagonal() * normal_inv * inv_scale.asDiagonal();
  out.cov = (out.cov + out.cov.transpose()) / 2;
  return out;
}

}  // namespace

Dataset Dataset::from_records(std::span<const MeasurementRecord> records) {
  Dataset out;
  const auto n = static_cast<Eigen::Index>(records.size());
  out.d.resize(n);
  out.force.resize(n);
  out.sigma.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.d[i] = records[i].d;
    out.force[i] = records[i].force;
    out.sigma[i] = records[i].sigma;
  }
  return out;
}

void Dataset::validate() const {
  if (force.size() != d.size() || sigma.size() != d.size()) throw std::invalid_argument("Dataset: column length mismatch");
  if (!(d.array() > 0.0).all()) throw std::invalid_argument("Dataset: separations must be positive");
  if (!(sigma.array() > 0.0).all()) throw std::invalid_argument("Dataset: uncertainties must be positive");
}

double FitResult::v_rms() const { return std::sqrt(std::max(v_rms_sq, 0.0)); }

Eigen::MatrixXd nuisance_design(const Eigen::VectorXd& d, const Geometry& g, const CorrectionParams& c) {
  Eigen::MatrixXd A(d.size(), 2);
  A.col(0) = d.unaryExpr([&](double x) { return patch_force_per_volt2(g, x, c); });
  A.col(1).setOnes();
  return A;
}

FitResult fit_two_param(const Dataset& data, const Eigen::VectorXd& theory, const Geometry& g,
                        const CorrectionParams& c) {
  data.validate();
  if (data.size() < 3) throw std::invalid_argument("fit_two_param: need at least 3 points");
  if (theory.size() != data.size()) throw std::invalid_argument("fit_two_param: theory length mismatch");
  if (!theory.allFinite()) throw std::invalid_argument("fit_two_param: theory not finite");

  const Eigen::MatrixXd A = nuisance_design(data.d, g, c);
  const Eigen::VectorXd y = data.force - theory;
  const auto sol = weighted_lsq(A, y, data.sigma);

  FitResult fit;
  fit.v_rms_sq = sol.params[0];
  fit.offset = sol.params[1];
  fit.cov = sol.cov;
  fit.chi2 = ((y - A * sol.params).cwiseQuotient(data.sigma)).squaredNorm();
  fit.dof = static_cast<int>(data.size()) - 2;
  fit.reduced_chi2 = fit.chi2 / fit.dof;
  fit.negative_v_rms_sq = fit.v_rms_sq < 0.0;
  return fit;
}

Eigen::VectorXd fitted_model(const Dataset& data, const FitResult& fit, const Eigen::VectorXd& theory,
                             const Geometry& g, const CorrectionParams& c) {
  const Eigen::Vector2d p(fit.v_rms_sq, fit.offset);
  return theory + nuisance_design(data.d, g, c) * p;
}

Residuals residuals(const Dataset& data, const FitResult& fit, const Eigen::VectorXd& theory, const Geometry& g,
                    const CorrectionParams& c) {
  return {data.d, data.force - fitted_model(data, fit, theory, g, c), data.sigma};
}

AlphaEstimate alpha_estimate(const Residuals& res, const Eigen::VectorXd& templ) {
  if (templ.size() != res.r.size()) throw std::invalid_argument("alpha_estimate: template length mismatch");
  const Eigen::VectorXd w = res.sigma.array().square().inverse();
  const double norm = (templ.array().square() * w.array()).sum();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw std::domain_error("alpha_estimate: template norm vanishes");
  const double proj = (templ.array() * res.r.array() * w.array()).sum();
  return {proj / norm, 1.0 / std::sqrt(norm)};
}

double alpha_limit_95(double alpha_hat, double sigma_alpha) {
  if (!(sigma_alpha > 0.0)) throw std::domain_error("alpha_limit_95: sigma_alpha must be positive");
  return std::max(alpha_hat, 0.0) + one_sided_z95 * sigma_alpha;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi > lo) || count < 2) throw std::invalid_argument("log_grid: need 0 < lo < hi and count >= 2");
  std::vector<double> out(static_cast<std::size_t>(count));
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  out.back() = hi;
  return out;
}

Eigen::VectorXd yukawa_template(const Eigen::VectorXd& d, double lambda, const PlateStack& s1, const PlateStack& s2,
                                const Geometry& g) {
  const YukawaParams unit{1.0, lambda};
  return d.unaryExpr([&](double x) { return yukawa_force_layered(g, s1, s2, unit, x); });
}

ExclusionCurve exclusion_curve(const Residuals& res, std::span<const double> lambdas, const PlateStack& s1,
                               const PlateStack& s2, const Geometry& g, const CorrectionParams& c,
                               const ExclusionOptions& opts) {
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] >= 1e-7 * (1 - 1e-12) && lambdas[i] <= 1e-5 * (1 + 1e-12)))
      throw std::invalid_argument("exclusion_curve: lambda grid must lie within [0.1, 10] um");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("exclusion_curve: lambda grid not sorted");
  }
  const Eigen::MatrixXd A = nuisance_design(res.d, g, c);

  ExclusionCurve out;
  for (double lambda : lambdas) {
    try {
      const Eigen::VectorXd t = yukawa_template(res.d, lambda, s1, s2, g);
      AlphaEstimate est{};
      if (opts.joint) {
        Eigen::MatrixXd B(A.rows(), 3);
        B << A, t;
        const auto sol = weighted_lsq(B, res.r, res.sigma);
        est = {sol.params[2], std::sqrt(sol.cov(2, 2))};
      } else if (opts.mode == TemplateMode::Projected) {
        const auto sol = weighted_lsq(A, t, res.sigma);
        const Eigen::VectorXd t_perp = t - A * sol.params;
        const double full = t.cwiseQuotient(res.sigma).norm();
        if (!(t_perp.cwiseQuotient(res.sigma).norm() > 1e-10 * full))
          throw std::domain_error("template indistinguishable from the nuisance model");
        est = alpha_estimate(res, t_perp);
      } else {
        est = alpha_estimate(res, t);
      }
      out.points.push_back({lambda, est.alpha_hat, est.sigma_alpha, alpha_limit_95(est.alpha_hat, est.sigma_alpha)});
    } catch (const std::domain_error& e) {
      out.skipped.push_back({lambda, e.what()});
    }
  }
  return out;
}

double mstar_from_mass(double mass_eV, double planck_mass_GeV) {
  if (!(mass_eV >= 0.0)) throw std::domain_error("mstar_from_mass: mass must be non-negative");
  return std::sqrt(mass_eV * 1e-9 * planck_mass_GeV);
}

double mstar_limit(double lambda_max, MassConvention convention, double planck_mass_GeV) {
  return mstar_from_mass(lambda_to_mass(lambda_max, convention), planck_mass_GeV);
}

}  // namespace srf
