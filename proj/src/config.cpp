#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "srforce/pipeline.hpp"

namespace srf {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_if(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

PlateStack stack_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw std::invalid_argument("config: " + where + " must be an array of layers");
  std::vector<Layer> layers;
  for (const auto& item : arr) {
    reject_unknown(item, {"thickness_m", "density_g_cm3"}, where);
    const auto& t = item.at("thickness_m");
    layers.push_back({t.is_null() ? semi_infinite : t.get<double>(), g_per_cm3(item.at("density_g_cm3").get<double>())});
  }
  return PlateStack(std::move(layers));
}

json stack_to_json(const PlateStack& s) {
  json arr = json::array();
  for (const auto& l : s.layers()) {
    json t = std::isinf(l.thickness) ? json(nullptr) : json(l.thickness);
    arr.push_back({{"thickness_m", t}, {"density_g_cm3", l.density / 1e3}});
  }
  return arr;
}

std::optional<std::filesystem::path> optional_path(const json& v) {
  if (v.is_null()) return std::nullopt;
  const auto s = v.get<std::string>();
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

}  // namespace

std::vector<double> AnalysisConfig::default_bin_edges() { return log_grid(0.7e-6, 7e-6, 21); }

PermittivityModel AnalysisConfig::permittivity() const {
  const auto drude = DrudeParams::from_eV(omega_p_eV, gamma_eV);
  if (optical_table) return PermittivityModel::tabulated(OpticalTable::from_csv(*optical_table), drude);
  return PermittivityModel::drude(drude);
}

void AnalysisConfig::validate() const {
  if (!(geometry.R > 0.0)) throw std::invalid_argument("config: R must be positive");
  DrudeParams::from_eV(omega_p_eV, gamma_eV);
  lifshitz.validate();
  correction.validate();
  if (!(d_uncertainty >= 0.0)) throw std::invalid_argument("config: d_uncertainty_m must be non-negative");
  for (std::size_t i = 0; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > 0.0)) throw std::invalid_argument("config: bin edges must be positive");
    if (i > 0 && !(bin_edges[i] > bin_edges[i - 1]))
      throw std::invalid_argument("config: bin edges must be strictly increasing");
  }
  if (bin_edges.size() == 1) throw std::invalid_argument("config: need at least two bin edges (or none)");
  if (!(lambda_grid.min > 0.0 && lambda_grid.max > lambda_grid.min && lambda_grid.count >= 2))
    throw std::invalid_argument("config: invalid lambda_grid");
  if (lambda_grid.min < 1e-7 * (1 - 1e-12) || lambda_grid.max > 1e-5 * (1 + 1e-12))
    throw std::invalid_argument("config: lambda_grid must lie within [0.1, 10] um");
  if (optical_table && !std::filesystem::exists(*optical_table))
    throw std::invalid_argument("config: optical table not found: " + optical_table->string());
  if (input && !std::filesystem::exists(*input))
    throw std::invalid_argument("config: input not found: " + input->string());
  if (synthetic) {
    const auto& s = *synthetic;
    if (!(s.v_rms >= 0.0 && s.noise_abs >= 0.0 && s.noise_rel >= 0.0))
      throw std::invalid_argument("config: synthetic amplitudes must be non-negative");
    if (!(s.d_min > correction.delta && s.d_max > s.d_min) || s.points < 3)
      throw std::invalid_argument("config: synthetic separation grid invalid");
    if (!(s.inject_lambda > 0.0)) throw std::invalid_argument("config: synthetic inject_lambda_m must be positive");
  }
}

AnalysisConfig config_from_json(const std::string& text) {
  const json j = json::parse(text);
  reject_unknown(j, {"geometry", "sphere_stack", "plate_stack", "drude", "optical_table", "temperature_K", "lifshitz",
                     "correction", "bin_edges_m", "lambda_grid", "input", "output_dir", "seed", "joint_fit",
                     "synthetic"},
                 "top level");
  AnalysisConfig cfg;
  if (j.contains("geometry")) {
    reject_unknown(j["geometry"], {"R_m"}, "geometry");
    read_if(j["geometry"], "R_m", cfg.geometry.R);
  }
  if (j.contains("sphere_stack")) cfg.sphere_stack = stack_from_json(j["sphere_stack"], "sphere_stack");
  if (j.contains("plate_stack")) cfg.plate_stack = stack_from_json(j["plate_stack"], "plate_stack");
  if (j.contains("drude")) {
    reject_unknown(j["drude"], {"omega_p_eV", "gamma_eV"}, "drude");
    read_if(j["drude"], "omega_p_eV", cfg.omega_p_eV);
    read_if(j["drude"], "gamma_eV", cfg.gamma_eV);
  }
  if (j.contains("optical_table")) cfg.optical_table = optional_path(j["optical_table"]);
  read_if(j, "temperature_K", cfg.lifshitz.T);
  if (j.contains("lifshitz")) {
    const auto& l = j["lifshitz"];
    reject_unknown(l, {"rel_tol", "max_matsubara", "quad_rel_tol"}, "lifshitz");
    read_if(l, "rel_tol", cfg.lifshitz.rel_tol);
    read_if(l, "max_matsubara", cfg.lifshitz.max_matsubara);
    read_if(l, "quad_rel_tol", cfg.lifshitz.quad_rel_tol);
  }
  if (j.contains("correction")) {
    const auto& c = j["correction"];
    reject_unknown(c, {"delta_m", "sigma_delta_m", "d_uncertainty_m"}, "correction");
    read_if(c, "delta_m", cfg.correction.delta);
    read_if(c, "sigma_delta_m", cfg.correction.sigma_delta);
    read_if(c, "d_uncertainty_m", cfg.d_uncertainty);
  }
  read_if(j, "bin_edges_m", cfg.bin_edges);
  if (j.contains("lambda_grid")) {
    const auto& g = j["lambda_grid"];
    reject_unknown(g, {"min_m", "max_m", "count"}, "lambda_grid");
    read_if(g, "min_m", cfg.lambda_grid.min);
    read_if(g, "max_m", cfg.lambda_grid.max);
    read_if(g, "count", cfg.lambda_grid.count);
  }
  if (j.contains("input")) cfg.input = optional_path(j["input"]);
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
  read_if(j, "seed", cfg.seed);
  read_if(j, "joint_fit", cfg.joint_fit);
  if (j.contains("synthetic") && !j["synthetic"].is_null()) {
    const auto& s = j["synthetic"];
    reject_unknown(s, {"v_rms_V", "offset_N", "noise_abs_N", "noise_rel", "d_min_m", "d_max_m", "points", "add_noise",
                       "inject_alpha", "inject_lambda_m"},
                   "synthetic");
    SyntheticSpec spec;
    read_if(s, "v_rms_V", spec.v_rms);
    read_if(s, "offset_N", spec.offset);
    read_if(s, "noise_abs_N", spec.noise_abs);
    read_if(s, "noise_rel", spec.noise_rel);
    read_if(s, "d_min_m", spec.d_min);
    read_if(s, "d_max_m", spec.d_max);
    read_if(s, "points", spec.points);
    read_if(s, "add_noise", spec.add_noise);
    read_if(s, "inject_alpha", spec.inject_alpha);
    read_if(s, "inject_lambda_m", spec.inject_lambda);
    cfg.synthetic = spec;
  }
  return cfg;
}

AnalysisConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return config_from_json(ss.str());
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
}

namespace {

json config_json(const AnalysisConfig& cfg, bool with_output) {
  json j;
  j["geometry"] = {{"R_m", cfg.geometry.R}};
  j["sphere_stack"] = stack_to_json(cfg.sphere_stack);
  j["plate_stack"] = stack_to_json(cfg.plate_stack);
  j["drude"] = {{"omega_p_eV", cfg.omega_p_eV}, {"gamma_eV", cfg.gamma_eV}};
  j["optical_table"] = cfg.optical_table ? json(cfg.optical_table->string()) : json(nullptr);
  j["temperature_K"] = cfg.lifshitz.T;
  j["lifshitz"] = {{"rel_tol", cfg.lifshitz.rel_tol},
                   {"max_matsubara", cfg.lifshitz.max_matsubara},
                   {"quad_rel_tol", cfg.lifshitz.quad_rel_tol}};
  j["correction"] = {{"delta_m", cfg.correction.delta},
                     {"sigma_delta_m", cfg.correction.sigma_delta},
                     {"d_uncertainty_m", cfg.d_uncertainty}};
  j["bin_edges_m"] = cfg.bin_edges;
  j["lambda_grid"] = {{"min_m", cfg.lambda_grid.min}, {"max_m", cfg.lambda_grid.max}, {"count", cfg.lambda_grid.count}};
  // Input files are identified by their content hash, not their location.
  if (with_output)
    j["input"] = cfg.input ? json(cfg.input->string()) : json(nullptr);
  else
    j["input"] = cfg.input.has_value();
  if (with_output) j["output_dir"] = cfg.output_dir.string();
  j["seed"] = cfg.seed;
  j["joint_fit"] = cfg.joint_fit;
  if (cfg.synthetic) {
    const auto& s = *cfg.synthetic;
    j["synthetic"] = {{"v_rms_V", s.v_rms},         {"offset_N", s.offset},       {"noise_abs_N", s.noise_abs},
                      {"noise_rel", s.noise_rel},   {"d_min_m", s.d_min},         {"d_max_m", s.d_max},
                      {"points", s.points},         {"add_noise", s.add_noise},   {"inject_alpha", s.inject_alpha},
                      {"inject_lambda_m", s.inject_lambda}};
  } else {
    j["synthetic"] = nullptr;
  }
  return j;
}

}  // namespace

std::string config_to_json(const AnalysisConfig& cfg) { return config_json(cfg, true).dump(2); }

std::string config_hash(const AnalysisConfig& cfg) { return fnv1a_hex(config_json(cfg, false).dump()); }

}  // namespace srf
