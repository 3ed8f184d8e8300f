#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srforce/casimir.hpp"
#include "srforce/constants.hpp"
#include "srforce/inference.hpp"
#include "srforce/permittivity.hpp"

namespace srf {

struct SyntheticSpec {
  double v_rms = 0.015;        // V
  double offset = 30e-12;      // N
  double noise_abs = 5e-12;    // N, per point
  double noise_rel = 0.0;      // fraction of the model force, added in quadrature
  double d_min = 0.7e-6;       // m (raw separation)
  double d_max = 7e-6;
  int points = 50;
  bool add_noise = true;
  double inject_alpha = 0.0;
  double inject_lambda = 1e-6;  // m
};

struct LambdaGridSpec {
  double min = 0.1e-6;
  double max = 10e-6;
  int count = 40;
};

struct AnalysisConfig {
  Geometry geometry;
  PlateStack sphere_stack = PlateStack::gold_titanium_glass();
  PlateStack plate_stack = PlateStack::gold_titanium_glass();
  double omega_p_eV = 7.54;
  double gamma_eV = 0.051;
  std::optional<std::filesystem::path> optical_table;
  LifshitzSettings lifshitz;
  CorrectionParams correction;
  double d_uncertainty = 10e-9;  // statistical error of the separation (m)
  std::vector<double> bin_edges = default_bin_edges();
  LambdaGridSpec lambda_grid;
  std::optional<std::filesystem::path> input;
  std::filesystem::path output_dir = ".";
  std::uint64_t seed = 0;
  bool joint_fit = false;
  std::optional<SyntheticSpec> synthetic;

  /// 20 log-spaced bins over [0.7, 7] um.
  static std::vector<double> default_bin_edges();

  /// Throws std::invalid_argument on the first violated invariant.
  void validate() const;

  PermittivityModel permittivity() const;
};

/// Parses the JSON config. Every key is optional; unknown keys are rejected.
AnalysisConfig config_from_json(const std::string& text);
AnalysisConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the effective config (defaults filled in).
std::string config_to_json(const AnalysisConfig& cfg);

/// Hash of the canonical config, excluding the output directory (hex).
std::string config_hash(const AnalysisConfig& cfg);

/// Raw force-vs-separation points before correction and binning.
struct RawDataset {
  Eigen::VectorXd d_raw;  // m
  Eigen::VectorXd force;  // N
  Eigen::VectorXd sigma;  // N (statistical)
  Eigen::VectorXd vm;     // V; empty when the input had no vm_mV column

  Eigen::Index size() const noexcept { return d_raw.size(); }
};

/// Theory force (attractive positive) at raw separation d_raw for a given
/// fluctuation amplitude delta, used for the correction uncertainties.
using CorrectionModel = std::function<double(double d_raw, double delta)>;

struct BinWarning {
  double lo, hi;
  std::string message;
};

struct BinnedDataset {
  Dataset data;
  std::vector<int> counts;
  std::vector<BinWarning> dropped;
};

/// Inverse-variance weighted bin averages with corrected separations. Bin
/// sigma adds in quadrature: the weighted statistical error, half the model
/// spread for delta +- sigma_delta, and half the model change for a +-
/// d_uncertainty shift of the separation. Without a model only the first
/// applies. Empty `edges` keeps every point as its own bin.
BinnedDataset bin_dataset(const RawDataset& raw, std::span<const double> edges, const CorrectionParams& c,
                          const CorrectionModel& model = {}, double d_uncertainty = 0.0);

/// Corrected Casimir force (attractive positive) at raw separation d_raw.
CorrectionModel casimir_correction_model(const AnalysisConfig& cfg);

RawDataset synthesize(const AnalysisConfig& cfg, std::uint64_t seed);

enum class AnalysisStage { Fit, Exclude };

struct Provenance {
  std::string config_hash;
  std::uint64_t seed;
  std::string version;
  std::string input_hash;  // empty for synthesized input
};

struct Report {
  FitResult fit;
  Dataset data;
  Eigen::VectorXd theory;  // corrected Casimir at data.d
  Residuals residuals;
  std::optional<ExclusionCurve> exclusion;
  std::vector<BinWarning> dropped_bins;
  Provenance provenance;
  std::vector<std::filesystem::path> files;
};

/// Full flow: ingest (or synthesize), bin, fit, residuals, and for the
/// Exclude stage the exclusion curve. Writes fit.json, residuals.csv,
/// theory_curve.csv and (Exclude) exclusion.csv into cfg.output_dir. On error
/// nothing is left behind and the exception propagates.
Report run_analysis(const AnalysisConfig& cfg, AnalysisStage stage = AnalysisStage::Exclude);

std::string tool_version();

// CSV and report I/O.
RawDataset read_force_csv(const std::filesystem::path& path);
std::string format_force_csv(const RawDataset& raw, const std::string& provenance_line);
std::string format_residuals_csv(const Residuals& res, const std::string& provenance_line);
std::string format_exclusion_csv(const ExclusionCurve& curve, const std::string& provenance_line);
std::string provenance_line(const Provenance& p);
std::string fnv1a_hex(std::string_view bytes);

/// Writes via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace srf
