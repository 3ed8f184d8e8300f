#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "srforce/pipeline.hpp"

namespace srf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  return out;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Separations in um with 5 significant digits, forces in pN with 6.
std::string um(double metres) { return fmt("%.5g", metres / micrometre); }
std::string pN(double newtons) { return fmt("%.6g", newtons / piconewton); }

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string provenance_line(const Provenance& p) {
  std::string line = "# srforce " + p.version + " config_hash=" + p.config_hash + " seed=" + std::to_string(p.seed);
  if (!p.input_hash.empty()) line += " input_hash=" + p.input_hash;
  return line + "\n";
}

RawDataset read_force_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file " + path.string());
  std::string line;
  std::vector<std::string> header;
  std::vector<std::array<double, 4>> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line);
    if (header.empty()) {
      header = fields;
      const bool base = header.size() >= 3 && header[0] == "d_um" && header[1] == "force_pN" && header[2] == "sigma_pN";
      const bool vm_ok = header.size() == 3 || (header.size() == 4 && header[3] == "vm_mV");
      if (!base || !vm_ok)
        throw std::runtime_error(path.string() + ": expected header 'd_um,force_pN,sigma_pN[,vm_mV]'");
      continue;
    }
    if (fields.size() != header.size())
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": wrong number of fields");
    std::array<double, 4> row{0, 0, 0, 0};
    for (std::size_t i = 0; i < fields.size(); ++i) {
      try {
        std::size_t used = 0;
        row[i] = std::stod(fields[i], &used);
        if (used != fields[i].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": malformed number '" + fields[i] + "'");
      }
    }
    if (!(row[0] > 0.0) || !(row[2] > 0.0))
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": d_um and sigma_pN must be positive");
    rows.push_back(row);
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": no data rows");

  RawDataset raw;
  const auto n = static_cast<Eigen::Index>(rows.size());
  raw.d_raw.resize(n);
  raw.force.resize(n);
  raw.sigma.resize(n);
  if (header.size() == 4) raw.vm.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    raw.d_raw[i] = r[0] * micrometre;
    raw.force[i] = r[1] * piconewton;
    raw.sigma[i] = r[2] * piconewton;
    if (header.size() == 4) raw.vm[i] = r[3] * 1e-3;
  }
  return raw;
}

std::string format_force_csv(const RawDataset& raw, const std::string& provenance) {
  std::string out = provenance + "d_um,force_pN,sigma_pN\n";
  for (Eigen::Index i = 0; i < raw.size(); ++i)
    out += um(raw.d_raw[i]) + "," + pN(raw.force[i]) + "," + pN(raw.sigma[i]) + "\n";
  return out;
}

std::string format_residuals_csv(const Residuals& res, const std::string& provenance) {
  std::string out = provenance + "d_um,residual_pN,sigma_pN\n";
  for (Eigen::Index i = 0; i < res.d.size(); ++i)
    out += um(res.d[i]) + "," + pN(res.r[i]) + "," + pN(res.sigma[i]) + "\n";
  return out;
}

std::string format_exclusion_csv(const ExclusionCurve& curve, const std::string& provenance) {
  std::string out = provenance;
  for (const auto& s : curve.skipped) out += "# skipped lambda_um=" + um(s.lambda) + ": " + s.reason + "\n";
  out += "lambda_um,alpha_hat,sigma_alpha,alpha_95\n";
  for (const auto& p : curve.points)
    out += um(p.lambda) + "," + fmt("%.6g", p.alpha_hat) + "," + fmt("%.6g", p.sigma_alpha) + "," +
           fmt("%.6g", p.alpha_95) + "\n";
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot rename into " + path.string());
  }
}

}  // namespace srf
