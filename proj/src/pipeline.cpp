#include "srforce/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "srforce/electrostatics.hpp"
#include "srforce/yukawa.hpp"

#ifndef SRFORCE_VERSION
#define SRFORCE_VERSION "dev"
#endif

namespace srf {

std::string tool_version() { return SRFORCE_VERSION; }

namespace {

struct Accumulator {
  double w = 0, wf = 0, wd = 0, wd_raw = 0;
  int n = 0;
};

}  // namespace

BinnedDataset bin_dataset(const RawDataset& raw, std::span<const double> edges, const CorrectionParams& c,
                          const CorrectionModel& model, double d_uncertainty) {
  c.validate();
  if (raw.size() == 0) throw std::invalid_argument("bin_dataset: no data");
  if (edges.size() == 1) throw std::invalid_argument("bin_dataset: need at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw std::invalid_argument("bin_dataset: edges must be strictly increasing");

  const bool per_point = edges.empty();
  const std::size_t nbins = per_point ? static_cast<std::size_t>(raw.size()) : edges.size() - 1;
  std::vector<Accumulator> acc(nbins);
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    std::size_t bin = 0;
    if (per_point) {
      bin = static_cast<std::size_t>(i);
    } else {
      const double x = raw.d_raw[i];
      if (x < edges.front() || x > edges.back()) continue;
      bin = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin()) - 1;
      bin = std::min(bin, nbins - 1);  // right edge belongs to the last bin
    }
    const double w = 1.0 / (raw.sigma[i] * raw.sigma[i]);
    auto& a = acc[bin];
    a.w += w;
    a.wf += w * raw.force[i];
    a.wd += w * corrected_separation(raw.d_raw[i], c);
    a.wd_raw += w * raw.d_raw[i];
    ++a.n;
  }

  BinnedDataset out;
  std::vector<MeasurementRecord> records;
  for (std::size_t b = 0; b < nbins; ++b) {
    const auto& a = acc[b];
    if (a.n == 0) {
      out.dropped.push_back({edges[b], edges[b + 1], "empty bin dropped"});
      continue;
    }
    const double d_raw = a.wd_raw / a.w;
    const double stat2 = 1.0 / a.w;
    double delta_part = 0.0, shift_part = 0.0;
    if (model) {
      if (c.sigma_delta > 0.0) {
        const double lo = std::max(c.delta - c.sigma_delta, 0.0);
        delta_part = 0.5 * std::abs(model(d_raw, c.delta + c.sigma_delta) - model(d_raw, lo));
      }
      if (d_uncertainty > 0.0)
        shift_part = 0.5 * std::abs(model(d_raw + d_uncertainty, c.delta) - model(d_raw - d_uncertainty, c.delta));
    }
    records.push_back({a.wd / a.w, a.wf / a.w, std::sqrt(stat2 + delta_part * delta_part + shift_part * shift_part)});
    out.counts.push_back(a.n);
  }
  if (records.empty()) throw std::invalid_argument("bin_dataset: every bin is empty");
  out.data = Dataset::from_records(records);
  return out;
}

CorrectionModel casimir_correction_model(const AnalysisConfig& cfg) {
  auto model = std::make_shared<PermittivityModel>(cfg.permittivity());
  return [model, g = cfg.geometry, s = cfg.lifshitz, sigma_delta = cfg.correction.sigma_delta](double d_raw, double delta) {
    const CorrectionParams c{delta, sigma_delta};
    return -corrected_casimir_force(g, *model, corrected_separation(d_raw, c), c, s);
  };
}

RawDataset synthesize(const AnalysisConfig& cfg, std::uint64_t seed) {
  if (!cfg.synthetic) throw std::invalid_argument("synthesize: config has no synthetic block");
  const auto& spec = *cfg.synthetic;
  const auto model = cfg.permittivity();
  const auto grid = log_grid(spec.d_min, spec.d_max, spec.points);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  RawDataset raw;
  const auto n = static_cast<Eigen::Index>(grid.size());
  raw.d_raw.resize(n);
  raw.force.resize(n);
  raw.sigma.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d_raw = grid[static_cast<std::size_t>(i)];
    const double d = corrected_separation(d_raw, cfg.correction);
    double f = -corrected_casimir_force(cfg.geometry, model, d, cfg.correction, cfg.lifshitz) +
               corrected_patch_force(cfg.geometry, spec.v_rms, d, cfg.correction) + spec.offset;
    if (spec.inject_alpha != 0.0)
      f += yukawa_force_layered(cfg.geometry, cfg.sphere_stack, cfg.plate_stack, {spec.inject_alpha, spec.inject_lambda},
                                d);
    const double sigma = std::hypot(spec.noise_abs, spec.noise_rel * f);
    if (!(sigma > 0.0)) throw std::invalid_argument("synthesize: noise model gives zero uncertainty");
    const double z = normal(rng);
    raw.d_raw[i] = d_raw;
    raw.force[i] = spec.add_noise ? f + sigma * z : f;
    raw.sigma[i] = sigma;
  }
  return raw;
}

namespace {

using nlohmann::json;

std::string fit_json(const FitResult& fit, const Provenance& p) {
  const double pn = piconewton;
  json j;
  j["v_rms_mV"] = fit.v_rms() * 1e3;
  j["v_rms_sq_V2"] = fit.v_rms_sq;
  j["offset_pN"] = fit.offset / pn;
  j["cov"] = {{fit.cov(0, 0), fit.cov(0, 1) / pn}, {fit.cov(1, 0) / pn, fit.cov(1, 1) / (pn * pn)}};
  j["cov_parameters"] = {"v_rms_sq_V2", "offset_pN"};
  j["chi2"] = fit.chi2;
  j["dof"] = fit.dof;
  j["reduced_chi2"] = fit.reduced_chi2;
  j["negative_v_rms_sq"] = fit.negative_v_rms_sq;
  j["provenance"] = {{"config_hash", p.config_hash},
                     {"seed", p.seed},
                     {"version", p.version},
                     {"input_hash", p.input_hash},
                     {"notes", "Newtonian gravity between the plates (~20 pN, nearly constant) is absorbed by the fitted "
                               "offset"}};
  return j.dump(2) + "\n";
}

std::string theory_curve_csv(const AnalysisConfig& cfg, const PermittivityModel& model, const Dataset& data,
                             const FitResult& fit, const std::string& provenance) {
  const double lo = data.d.minCoeff();
  const double hi = data.d.maxCoeff();
  std::vector<double> grid = hi > lo ? log_grid(lo, hi, 60) : std::vector<double>{lo};
  std::string out = provenance + "d_um,casimir_pN,casimir_patch_pN,model_pN\n";
  char buf[160];
  for (double d : grid) {
    const double casimir = -corrected_casimir_force(cfg.geometry, model, d, cfg.correction, cfg.lifshitz);
    const double patch = fit.v_rms_sq * patch_force_per_volt2(cfg.geometry, d, cfg.correction);
    std::snprintf(buf, sizeof buf, "%.5g,%.6g,%.6g,%.6g\n", d / micrometre, casimir / piconewton,
                  (casimir + patch) / piconewton, (casimir + patch + fit.offset) / piconewton);
    out += buf;
  }
  return out;
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a_hex(ss.str());
}

}  // namespace

Report run_analysis(const AnalysisConfig& cfg, AnalysisStage stage) {
  cfg.validate();
  Report report;
  report.provenance = {config_hash(cfg), cfg.seed, tool_version(), {}};

  RawDataset raw;
  if (cfg.input) {
    raw = read_force_csv(*cfg.input);
    report.provenance.input_hash = file_hash(*cfg.input);
  } else if (cfg.synthetic) {
    raw = synthesize(cfg, cfg.seed);
  } else {
    throw std::invalid_argument("run_analysis: no input file and no synthetic block");
  }

  const auto model = cfg.permittivity();
  const auto binned = bin_dataset(raw, cfg.bin_edges, cfg.correction, casimir_correction_model(cfg), cfg.d_uncertainty);
  report.data = binned.data;
  report.dropped_bins = binned.dropped;
  report.theory = report.data.d.unaryExpr(
      [&](double d) { return -corrected_casimir_force(cfg.geometry, model, d, cfg.correction, cfg.lifshitz); });
  report.fit = fit_two_param(report.data, report.theory, cfg.geometry, cfg.correction);
  report.residuals = residuals(report.data, report.fit, report.theory, cfg.geometry, cfg.correction);

  if (stage == AnalysisStage::Exclude) {
    const auto lambdas = log_grid(cfg.lambda_grid.min, cfg.lambda_grid.max, cfg.lambda_grid.count);
    ExclusionOptions opts;
    opts.joint = cfg.joint_fit;
    report.exclusion = exclusion_curve(report.residuals, lambdas, cfg.sphere_stack, cfg.plate_stack, cfg.geometry,
                                       cfg.correction, opts);
  }

  const auto prov = provenance_line(report.provenance);
  std::vector<std::pair<std::filesystem::path, std::string>> outputs;
  outputs.emplace_back(cfg.output_dir / "fit.json", fit_json(report.fit, report.provenance));
  outputs.emplace_back(cfg.output_dir / "residuals.csv", format_residuals_csv(report.residuals, prov));
  outputs.emplace_back(cfg.output_dir / "theory_curve.csv",
                       theory_curve_csv(cfg, model, report.data, report.fit, prov));
  if (report.exclusion)
    outputs.emplace_back(cfg.output_dir / "exclusion.csv", format_exclusion_csv(*report.exclusion, prov));

  try {
    std::filesystem::create_directories(cfg.output_dir);
    for (const auto& [path, content] : outputs) {
      write_file_atomic(path, content);
      report.files.push_back(path);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& f : report.files) std::filesystem::remove(f, ec);
    throw;
  }
  return report;
}

}  // namespace srf
