#include "srforce/permittivity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "srforce/quadrature.hpp"

namespace srf {

namespace {

constexpr double kk_rel_tol = 1e-6;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

DrudeParams DrudeParams::gold() { return from_eV(7.54, 0.051); }

DrudeParams DrudeParams::from_eV(double omega_p_eV, double gamma_eV) {
  DrudeParams p{energy_to_angular_frequency(omega_p_eV), energy_to_angular_frequency(gamma_eV)};
  p.validate();
  return p;
}

void DrudeParams::validate() const {
  if (!(omega_p > 0.0)) throw std::invalid_argument("DrudeParams: omega_p must be positive");
  if (!(gamma >= 0.0)) throw std::invalid_argument("DrudeParams: gamma must be non-negative");
}

double eps_drude(const DrudeParams& p, double xi) {
  if (!(xi > 0.0)) throw std::domain_error("eps_drude: xi must be positive");
  return drude_eps_imag_axis(p.omega_p, p.gamma, xi);
}

OpticalTable::OpticalTable(std::vector<OpticalSample> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) throw std::invalid_argument("OpticalTable: need at least 2 samples");
  if (!(samples_.front().omega > 0.0)) throw std::invalid_argument("OpticalTable: omega must be positive");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!(samples_[i].eps_imag >= 0.0) || !std::isfinite(samples_[i].eps_imag))
      throw std::invalid_argument("OpticalTable: eps_imag must be finite and non-negative");
    if (i > 0 && !(samples_[i].omega > samples_[i - 1].omega))
      throw std::invalid_argument("OpticalTable: omega must be strictly increasing");
  }
}

OpticalTable OpticalTable::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open optical table " + path.string());
  std::vector<OpticalSample> samples;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "omega_rad_s,eps_imag")
        throw std::runtime_error(path.string() + ": expected header 'omega_rad_s,eps_imag'");
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    OpticalSample s{};
    char comma = 0;
    if (!(row >> s.omega >> comma >> s.eps_imag) || comma != ',')
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    samples.push_back(s);
  }
  if (!header_seen) throw std::runtime_error(path.string() + ": empty optical table");
  return OpticalTable(std::move(samples));
}

double OpticalTable::eps_imag(double omega) const {
  if (omega <= omega_min()) return samples_.front().eps_imag;
  if (omega >= omega_max()) return samples_.back().eps_imag;
  auto hi = std::upper_bound(samples_.begin(), samples_.end(), omega,
                             [](double w, const OpticalSample& s) { return w < s.omega; });
  const auto& b = *hi;
  const auto& a = *(hi - 1);
  if (a.eps_imag > 0.0 && b.eps_imag > 0.0) {
    const double t = std::log(omega / a.omega) / std::log(b.omega / a.omega);
    return a.eps_imag * std::pow(b.eps_imag / a.eps_imag, t);
  }
  const double t = (omega - a.omega) / (b.omega - a.omega);
  return a.eps_imag + t * (b.eps_imag - a.eps_imag);
}

// eps(i xi) - 1 = (2/pi) int_0^inf w eps''(w) / (w^2 + xi^2) dw, split into the
// Drude segment below the table, the table itself (in log w), and the Drude
// segment above the table (in u = 1/w).
double eps_tabulated(const TabulatedModel& m, double xi) {
  if (!(xi > 0.0)) throw std::domain_error("eps_tabulated: xi must be positive");
  const double wp2 = m.tail.omega_p * m.tail.omega_p;
  const double g = m.tail.gamma;
  const double xi2 = xi * xi;
  const double w_lo = m.table.omega_min();
  const double w_hi = m.table.omega_max();

  double total = 0.0;
  if (g > 0.0) {
    auto low = [&](double w) { return wp2 * g / ((w * w + g * g) * (w * w + xi2)); };
    total += quad::gauss_kronrod_split(low, 0.0, w_lo, {g, xi}, kk_rel_tol).value;

    auto high = [&](double u) { return wp2 * g * u * u / ((1.0 + g * g * u * u) * (1.0 + xi2 * u * u)); };
    total += quad::gauss_kronrod_split(high, 0.0, 1.0 / w_hi, {1.0 / xi, 1.0 / g}, kk_rel_tol).value;
  }

  const auto& samples = m.table.samples();
  const double s_xi = std::log(xi);
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const auto& a = samples[i];
    const auto& b = samples[i + 1];
    if (a.eps_imag == 0.0 && b.eps_imag == 0.0) continue;
    auto mid = [&](double s) {
      const double w = std::exp(s);
      return w * w * m.table.eps_imag(w) / (w * w + xi2);
    };
    total += quad::gauss_kronrod_split(mid, std::log(a.omega), std::log(b.omega), {s_xi}, kk_rel_tol).value;
  }
  return 1.0 + 2.0 / std::numbers::pi * total;
}

double eps_tabulated(const PermittivityModel& m, double xi) {
  const auto* tab = std::get_if<TabulatedModel>(&m.variant);
  if (!tab) throw std::invalid_argument("eps_tabulated: model has no optical table");
  return eps_tabulated(*tab, xi);
}

double eps_at(const PermittivityModel& m, double xi) {
  return std::visit(
      [xi](const auto& v) -> double {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, DrudeParams>)
          return eps_drude(v, xi);
        else
          return eps_tabulated(v, xi);
      },
      m.variant);
}

}  // namespace srf
