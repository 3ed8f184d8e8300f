#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "srforce/electrostatics.hpp"
#include "srforce/pipeline.hpp"
#include "srforce/yukawa.hpp"

using namespace srf;
namespace fs = std::filesystem;

namespace {

constexpr double um = 1e-6;
constexpr double pN = 1e-12;

RawDataset raw_of(std::vector<double> d, std::vector<double> f, std::vector<double> s) {
  RawDataset r;
  r.d_raw = Eigen::Map<Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
  r.force = Eigen::Map<Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
  r.sigma = Eigen::Map<Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  return r;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("srforce_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Closed-loop configuration: no separation systematics, so the bin sigma is
// the noise alone.
AnalysisConfig closed_loop(const fs::path& out) {
  AnalysisConfig cfg;
  cfg.correction.sigma_delta = 0.0;
  cfg.d_uncertainty = 0.0;
  cfg.bin_edges.clear();
  cfg.synthetic = SyntheticSpec{};
  cfg.output_dir = out;
  cfg.lambda_grid.count = 8;
  cfg.seed = 7;
  return cfg;
}

std::string run_cli(const std::string& args, int* status = nullptr) {
  const std::string cmd = std::string(SRFORCE_CLI) + " " + args + " 2>&1";
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  std::string out;
  std::array<char, 512> buf{};
  while (fgets(buf.data(), buf.size(), pipe.get())) out += buf.data();
  const int rc = pclose(pipe.release());
  if (status) *status = WEXITSTATUS(rc);
  return out;
}

}  // namespace

TEST(BinDataset, PerPointPassthrough) {
  const auto raw = raw_of({1 * um, 2 * um, 3 * um}, {5 * pN, 3 * pN, 1 * pN}, {1 * pN, 2 * pN, 3 * pN});
  const CorrectionParams c{40e-9, 0.0};
  const auto b = bin_dataset(raw, {}, c);
  ASSERT_EQ(b.data.size(), 3);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(b.data.force[i], raw.force[i]);
    EXPECT_DOUBLE_EQ(b.data.sigma[i], raw.sigma[i]);
    EXPECT_DOUBLE_EQ(b.data.d[i], corrected_separation(raw.d_raw[i], c));
  }
}

TEST(BinDataset, AveragesAndShrinks) {
  const CorrectionParams c{0.0, 0.0};
  const std::vector<double> edges = {0.5 * um, 1.5 * um};
  const auto two = bin_dataset(raw_of({0.9 * um, 1.1 * um}, {4 * pN, 6 * pN}, {2 * pN, 2 * pN}), edges, c);
  ASSERT_EQ(two.data.size(), 1);
  EXPECT_NEAR(two.data.force[0], 5 * pN, 1e-24);
  EXPECT_NEAR(two.data.d[0], um, 1e-18);
  EXPECT_NEAR(two.data.sigma[0], 2 * pN / std::sqrt(2.0), 1e-24);

  for (int n : {1, 4, 16, 64}) {
    std::vector<double> d(n, um), f(n, pN), s(n, 3 * pN);
    const auto b = bin_dataset(raw_of(d, f, s), edges, c);
    EXPECT_NEAR(b.data.sigma[0], 3 * pN / std::sqrt(n), 1e-26);
    EXPECT_EQ(b.counts[0], n);
  }
}

TEST(BinDataset, DropsEmptyBinsAndOutliers) {
  const CorrectionParams c{0.0, 0.0};
  const std::vector<double> edges = {1 * um, 2 * um, 3 * um, 4 * um};
  const auto b = bin_dataset(raw_of({1.5 * um, 3.5 * um, 9 * um}, {1, 2, 3}, {1, 1, 1}), edges, c);
  ASSERT_EQ(b.data.size(), 2);
  ASSERT_EQ(b.dropped.size(), 1u);
  EXPECT_DOUBLE_EQ(b.dropped[0].lo, 2 * um);
  EXPECT_THROW(bin_dataset(raw_of({9 * um}, {1}, {1}), edges, c), std::invalid_argument);
  const std::vector<double> bad = {2 * um, 1 * um};
  EXPECT_THROW(bin_dataset(raw_of({1.5 * um}, {1}, {1}), bad, c), std::invalid_argument);
}

TEST(BinDataset, ModelSystematics) {
  const CorrectionParams c{40e-9, 20e-9};
  auto model = [](double d, double delta) { return 1e-30 / std::pow(d, 3) * (1 + 6 * delta * delta / (d * d)); };
  const auto raw = raw_of({um}, {pN}, {pN});
  const auto b = bin_dataset(raw, {}, c, model, 10e-9);
  const double dp = 0.5 * std::abs(model(um, 60e-9) - model(um, 20e-9));
  const double sp = 0.5 * std::abs(model(um + 10e-9, 40e-9) - model(um - 10e-9, 40e-9));
  EXPECT_NEAR(b.data.sigma[0], std::sqrt(pN * pN + dp * dp + sp * sp), 1e-9 * pN);
}

TEST(Synthesize, DeterministicAndSeedSensitive) {
  auto cfg = closed_loop(scratch("synth"));
  const auto a = synthesize(cfg, 3);
  const auto b = synthesize(cfg, 3);
  const auto c = synthesize(cfg, 4);
  EXPECT_EQ(a.force, b.force);
  EXPECT_NE(a.force, c.force);
  EXPECT_EQ(a.size(), 50);
  EXPECT_NEAR(a.d_raw[0], 0.7 * um, 1e-18);
  EXPECT_NEAR(a.d_raw[49], 7 * um, 1e-18);
}

TEST(Synthesize, InjectionAddsYukawaForce) {
  auto cfg = closed_loop(scratch("inject"));
  cfg.synthetic->add_noise = false;
  const auto base = synthesize(cfg, 1);
  cfg.synthetic->inject_alpha = 1e10;
  const auto with = synthesize(cfg, 1);
  const double d = corrected_separation(base.d_raw[10], cfg.correction);
  const auto s = PlateStack::gold_titanium_glass();
  EXPECT_NEAR(with.force[10] - base.force[10], yukawa_force_layered(cfg.geometry, s, s, {1e10, um}, d), 1e-25);
  // ~21 pN at 1 um
  const double at_1um = yukawa_force_layered(cfg.geometry, s, s, {1e10, um}, um);
  EXPECT_NEAR(at_1um / pN, 21.0, 0.1);
}

TEST(RunAnalysis, ClosedLoopRecoversParameters) {
  const auto out = scratch("closed");
  auto cfg = closed_loop(out);
  cfg.synthetic->add_noise = false;
  const auto r = run_analysis(cfg, AnalysisStage::Exclude);
  EXPECT_NEAR(r.fit.v_rms(), 0.015, 1e-8);
  EXPECT_NEAR(r.fit.offset / pN, 30.0, 1e-5);
  EXPECT_LT(r.fit.chi2, 1e-10);
  ASSERT_TRUE(r.exclusion.has_value());
  EXPECT_EQ(r.exclusion->points.size(), 8u);
  for (const char* f : {"fit.json", "residuals.csv", "theory_curve.csv", "exclusion.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;

  // data = model + residuals
  const Eigen::VectorXd model = fitted_model(r.data, r.fit, r.theory, cfg.geometry, cfg.correction);
  EXPECT_LT((model + r.residuals.r - r.data.force).cwiseAbs().maxCoeff(), 1e-9 * pN);
}

TEST(RunAnalysis, NoisyFitIsConsistent) {
  auto cfg = closed_loop(scratch("noisy"));
  const auto r = run_analysis(cfg, AnalysisStage::Fit);
  EXPECT_FALSE(r.exclusion.has_value());
  EXPECT_LT(std::abs(r.fit.v_rms_sq - 0.015 * 0.015), 4 * r.fit.sigma_v_rms_sq());
  EXPECT_LT(std::abs(r.fit.offset - 30 * pN), 4 * r.fit.sigma_offset());
  EXPECT_FALSE(fs::exists(cfg.output_dir / "exclusion.csv"));
}

TEST(RunAnalysis, EveryOutputCarriesProvenance) {
  const auto out = scratch("prov");
  auto cfg = closed_loop(out);
  const auto r = run_analysis(cfg);
  const auto hash = config_hash(cfg);
  EXPECT_EQ(r.provenance.config_hash, hash);
  for (const char* f : {"residuals.csv", "theory_curve.csv", "exclusion.csv"})
    EXPECT_NE(slurp(out / f).find("config_hash=" + hash), std::string::npos) << f;
  const auto j = nlohmann::json::parse(slurp(out / "fit.json"));
  EXPECT_EQ(j["provenance"]["config_hash"], hash);
  EXPECT_EQ(j["provenance"]["seed"], 7);
  EXPECT_EQ(j["dof"], 48);
}

TEST(RunAnalysis, ReadsInputFileAndRoundTrips) {
  const auto out = scratch("input");
  auto cfg = closed_loop(out);
  const auto raw = synthesize(cfg, 11);
  const auto path = out / "in.csv";
  write_file_atomic(path, format_force_csv(raw, "# test input\n"));
  const auto back = read_force_csv(path);
  ASSERT_EQ(back.size(), raw.size());
  EXPECT_LT(((back.force - raw.force).cwiseAbs().array() / raw.force.cwiseAbs().array()).maxCoeff(), 1e-5);

  cfg.input = path;
  const auto r = run_analysis(cfg, AnalysisStage::Fit);
  EXPECT_FALSE(r.provenance.input_hash.empty());
  EXPECT_EQ(r.data.size(), 50);
}

TEST(RunAnalysis, BadInputLeavesNothingBehind) {
  const auto out = scratch("bad");
  auto cfg = closed_loop(out / "results");
  const auto empty = out / "empty.csv";
  std::ofstream(empty) << "d_um,force_pN,sigma_pN\n";
  cfg.input = empty;
  EXPECT_THROW(run_analysis(cfg), std::exception);
  EXPECT_FALSE(fs::exists(out / "results" / "fit.json"));

  const auto garbled = out / "garbled.csv";
  std::ofstream(garbled) << "d_um,force_pN,sigma_pN\n1.0,abc,1\n";
  cfg.input = garbled;
  EXPECT_THROW(run_analysis(cfg), std::exception);
  EXPECT_FALSE(fs::exists(out / "results" / "fit.json"));
}

TEST(Config, RejectsUnknownKeys) {
  EXPECT_THROW(config_from_json(R"({"geometry": {"R_m": 0.1}, "colour": 1})"), std::invalid_argument);
  EXPECT_THROW(config_from_json(R"({"geometry": {"radius": 0.1}})"), std::invalid_argument);
  EXPECT_THROW(config_from_json(R"({"synthetic": {"v_rms_V": 0.01, "extra": 2}})"), std::invalid_argument);
  EXPECT_NO_THROW(config_from_json("{}"));
}

TEST(Config, RoundTripAndHash) {
  const auto cfg = config_from_json(R"({
    "geometry": {"R_m": 0.2},
    "plate_stack": [{"thickness_m": 1e-7, "density_g_cm3": 19.3}, {"thickness_m": null, "density_g_cm3": 2.2}],
    "temperature_K": 290,
    "seed": 5,
    "synthetic": {"points": 30}
  })");
  EXPECT_DOUBLE_EQ(cfg.geometry.R, 0.2);
  EXPECT_DOUBLE_EQ(cfg.lifshitz.T, 290.0);
  EXPECT_DOUBLE_EQ(cfg.plate_stack.layers()[0].density, 19300.0);
  EXPECT_TRUE(std::isinf(cfg.plate_stack.layers()[1].thickness));
  ASSERT_TRUE(cfg.synthetic.has_value());
  EXPECT_EQ(cfg.synthetic->points, 30);

  const auto again = config_from_json(config_to_json(cfg));
  EXPECT_EQ(config_hash(again), config_hash(cfg));
  auto moved = cfg;
  moved.output_dir = "/elsewhere";
  EXPECT_EQ(config_hash(moved), config_hash(cfg));
  auto changed = cfg;
  changed.seed = 6;
  EXPECT_NE(config_hash(changed), config_hash(cfg));
}

TEST(Config, ValidationErrors) {
  EXPECT_THROW(config_from_json(R"({"geometry": {"R_m": -1}})").validate(), std::invalid_argument);
  EXPECT_THROW(config_from_json(R"({"lambda_grid": {"min_m": 1e-8}})").validate(), std::invalid_argument);
  EXPECT_THROW(config_from_json("{ not json"), std::exception);
}

TEST(Provenance, HashIsFnv1a) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Cli, HelpAndErrors) {
  int status = -1;
  const auto help = run_cli("--help", &status);
  EXPECT_EQ(status, 0);
  for (const char* sub : {"casimir", "synth", "fit", "exclude", "mstar"}) EXPECT_NE(help.find(sub), std::string::npos);
  run_cli("fit --config /nonexistent/config.json", &status);
  EXPECT_NE(status, 0);
}

TEST(Cli, PlanckScale) {
  int status = -1;
  const auto out = run_cli("mstar --mass-eV 0.5", &status);
  EXPECT_EQ(status, 0);
  EXPECT_NE(out.find("78.1"), std::string::npos) << out;
}

TEST(Cli, CasimirTable) {
  int status = -1;
  const auto out = run_cli("casimir --d-min-um 3 --d-max-um 3 --points 1", &status);
  EXPECT_EQ(status, 0);
  EXPECT_NE(out.find("12.1854"), std::string::npos) << out;
}

TEST(Cli, SynthIsDeterministic) {
  const auto a = scratch("cli_a");
  const auto b = scratch("cli_b");
  int s1 = -1, s2 = -1;
  run_cli("--seed 9 --out " + a.string() + " synth", &s1);
  run_cli("--seed 9 --out " + b.string() + " synth", &s2);
  ASSERT_EQ(s1, 0);
  ASSERT_EQ(s2, 0);
  EXPECT_EQ(slurp(a / "synthetic.csv"), slurp(b / "synthetic.csv"));
  EXPECT_NE(slurp(a / "synthetic.csv").find("seed=9"), std::string::npos);
}

TEST(Cli, FitFromSynthesizedFile) {
  const auto dir = scratch("cli_fit");
  int status = -1;
  run_cli("--seed 2 --out " + dir.string() + " synth", &status);
  ASSERT_EQ(status, 0);
  const auto out = run_cli("--input " + (dir / "synthetic.csv").string() + " --out " + dir.string() + " fit", &status);
  EXPECT_EQ(status, 0) << out;
  EXPECT_TRUE(fs::exists(dir / "fit.json"));
  EXPECT_NE(out.find("V_rms"), std::string::npos);
}
