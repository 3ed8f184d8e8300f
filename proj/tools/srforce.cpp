// Command-line front end: Casimir tables, synthetic data, fits, exclusion
// limits and the Planck-scale bound.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "srforce/casimir.hpp"
#include "srforce/inference.hpp"
#include "srforce/pipeline.hpp"

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string input;
};

srf::AnalysisConfig resolve_config(const GlobalOptions& g) {
  srf::AnalysisConfig cfg = g.config.empty() ? srf::AnalysisConfig{} : srf::load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out.empty()) cfg.output_dir = g.out;
  if (!g.input.empty()) cfg.input = g.input;
  return cfg;
}

int run_casimir(const srf::AnalysisConfig& cfg, double d_min_um, double d_max_um, int points) {
  cfg.validate();
  const auto model = cfg.permittivity();
  const auto grid = points > 1 ? srf::log_grid(d_min_um * srf::micrometre, d_max_um * srf::micrometre, points)
                               : std::vector<double>{d_min_um * srf::micrometre};
  std::printf("d_um,energy_J_m2,force_pN,corrected_force_pN\n");
  for (double d : grid) {
    const auto profile = srf::casimir_profile(cfg.geometry, model, d, cfg.lifshitz);
    const auto plain = srf::pfa_force(cfg.geometry, model, d, cfg.lifshitz);
    std::printf("%.5g,%.6g,%.6g,%.6g\n", d / srf::micrometre, plain.energy_per_area, -plain.force / srf::piconewton,
                -profile.corrected(cfg.correction.delta) / srf::piconewton);
  }
  return 0;
}

int run_synth(srf::AnalysisConfig cfg) {
  if (!cfg.synthetic) cfg.synthetic = srf::SyntheticSpec{};
  cfg.input.reset();
  cfg.validate();
  const auto raw = srf::synthesize(cfg, cfg.seed);
  const srf::Provenance prov{srf::config_hash(cfg), cfg.seed, srf::tool_version(), {}};
  std::filesystem::create_directories(cfg.output_dir);
  const auto path = cfg.output_dir / "synthetic.csv";
  srf::write_file_atomic(path, srf::format_force_csv(raw, srf::provenance_line(prov)));
  std::cout << path.string() << "\n";
  return 0;
}

int run_pipeline(const srf::AnalysisConfig& cfg, srf::AnalysisStage stage) {
  const auto report = srf::run_analysis(cfg, stage);
  const auto& fit = report.fit;
  std::printf("V_rms = %.4g mV, offset = %.4g pN, reduced chi2 = %.4g (dof %d)\n", fit.v_rms() * 1e3,
              fit.offset / srf::piconewton, fit.reduced_chi2, fit.dof);
  if (fit.negative_v_rms_sq) std::fprintf(stderr, "warning: fitted V_rms^2 is negative\n");
  for (const auto& w : report.dropped_bins)
    std::fprintf(stderr, "warning: bin [%.5g, %.5g] um: %s\n", w.lo / srf::micrometre, w.hi / srf::micrometre,
                 w.message.c_str());
  if (report.exclusion)
    for (const auto& s : report.exclusion->skipped)
      std::fprintf(stderr, "warning: lambda %.5g um skipped: %s\n", s.lambda / srf::micrometre, s.reason.c_str());
  for (const auto& f : report.files) std::cout << f.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Short-range force analysis: Casimir + patch model fits and Yukawa exclusion limits"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config, "JSON analysis config (defaults: gold plates, R = 15.6 cm, T = 300 K)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", global.seed, "Random seed (overrides the config)");
  app.add_option("--out", global.out, "Output directory (overrides the config)");
  app.add_option("--input", global.input, "Force data CSV d_um,force_pN,sigma_pN[,vm_mV] (overrides the config)")
      ->check(CLI::ExistingFile);

  auto* casimir = app.add_subcommand("casimir", "Print the sphere-plane Casimir force on a separation grid");
  double d_min_um = 0.7, d_max_um = 7.0;
  int points = 20;
  casimir->add_option("--d-min-um", d_min_um, "Smallest separation (um)")->capture_default_str();
  casimir->add_option("--d-max-um", d_max_um, "Largest separation (um)")->capture_default_str();
  casimir->add_option("--points", points, "Number of log-spaced separations")->capture_default_str();

  app.add_subcommand("synth", "Write a synthetic dataset to OUT/synthetic.csv");
  app.add_subcommand("fit", "Bin, fit V_rms^2 and offset; write fit.json, residuals.csv, theory_curve.csv");
  app.add_subcommand("exclude", "Fit and derive 95% Yukawa limits; additionally write exclusion.csv");

  auto* mstar = app.add_subcommand("mstar", "Planck-scale bound M* = sqrt(m M_P) from a range or a boson mass");
  std::optional<double> lambda_um, mass_eV;
  std::string convention = "planck_h";
  auto* lam_opt = mstar->add_option("--lambda-um", lambda_um, "Excluded range bound (um)");
  auto* mass_opt = mstar->add_option("--mass-eV", mass_eV, "Boson mass (eV)");
  lam_opt->excludes(mass_opt);
  mstar->add_option("--convention", convention, "Mass convention for --lambda-um: planck_h (hc/lambda) or hbar")
      ->check(CLI::IsMember({"planck_h", "hbar"}))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = resolve_config(global);
    if (app.got_subcommand(casimir)) return run_casimir(cfg, d_min_um, d_max_um, points);
    if (app.got_subcommand("synth")) return run_synth(cfg);
    if (app.got_subcommand("fit")) return run_pipeline(cfg, srf::AnalysisStage::Fit);
    if (app.got_subcommand("exclude")) return run_pipeline(cfg, srf::AnalysisStage::Exclude);
    if (app.got_subcommand(mstar)) {
      double m = 0.0;
      if (mass_eV) {
        m = *mass_eV;
      } else if (lambda_um) {
        m = srf::lambda_to_mass(*lambda_um * srf::micrometre,
                                convention == "hbar" ? srf::MassConvention::H_BAR : srf::MassConvention::PLANCK_H);
      } else {
        std::fprintf(stderr, "error: mstar needs --lambda-um or --mass-eV\n");
        return 2;
      }
      std::printf("mass_eV,mstar_TeV\n%.6g,%.6g\n", m, srf::mstar_from_mass(m) / 1e3);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
