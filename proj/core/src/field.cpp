#include "cavitydtc/field.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "cavitydtc/errors.hpp"
#include "cavitydtc/params.hpp"

namespace cavitydtc {

Grid make_grid(int n_cells, int points_per_cell) {
  if (n_cells < 1) throw ConfigError("grid: need at least one wavelength");
  if (points_per_cell < 8 || points_per_cell % 2 != 0) {
    throw ConfigError("grid: points per wavelength must be even and >= 8");
  }
  Grid g;
  g.n_cells = n_cells;
  g.n_points = static_cast<std::size_t>(n_cells) * static_cast<std::size_t>(points_per_cell);
  g.length = static_cast<double>(n_cells);
  g.spacing = 1.0 / static_cast<double>(points_per_cell);
  g.positions.resize(g.n_points);
  g.wavenumbers.resize(g.n_points);
  const auto n = static_cast<long>(g.n_points);
  for (long j = 0; j < n; ++j) {
    g.positions[j] = static_cast<double>(j - n / 2) * g.spacing;
    const long m = j < n / 2 ? j : j - n;
    g.wavenumbers[j] = 2.0 * kPi * static_cast<double>(m) / g.length;
  }
  return g;
}

CField uniform_state(const Grid& grid) {
  CField s;
  s.psi.assign(grid.n_points, cplx(1.0 / std::sqrt(grid.length), 0.0));
  return s;
}

double norm(const CField& state, const Grid& grid) {
  double acc = 0.0;
  for (const auto& v : state.psi) acc += std::norm(v);
  return acc * grid.spacing;
}

bool is_finite(const CField& state) {
  if (!std::isfinite(state.alpha.real()) || !std::isfinite(state.alpha.imag())) return false;
  for (const auto& v : state.psi) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

double order_parameter(const CField& state, const Grid& grid) {
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    acc += std::cos(kWaveNumber * grid.positions[j]) * std::norm(state.psi[j]);
  }
  return acc * grid.spacing;
}

double bunching(const CField& state, const Grid& grid) {
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    const double c = std::cos(kWaveNumber * grid.positions[j]);
    acc += c * c * std::norm(state.psi[j]);
  }
  return acc * grid.spacing;
}

CField translate_half_period(const CField& state, const Grid& grid) {
  const std::size_t shift = grid.points_per_cell() / 2;
  const std::size_t n = grid.n_points;
  CField out = state;
  for (std::size_t j = 0; j < n; ++j) out.psi[(j + shift) % n] = state.psi[j];
  out.alpha = -state.alpha;
  return out;
}

std::vector<cplx> mode_amplitudes(const CField& state, const Grid& grid,
                                  const SpectralTransform& fft) {
  std::vector<cplx> modes = state.psi;
  fft.forward(modes);
  const double scale = std::sqrt(grid.spacing / static_cast<double>(grid.n_points));
  for (auto& c : modes) c *= scale;
  return modes;
}

DensitySnapshot density_snapshot(const CField& state, const Grid& grid, int first_cell,
                                 int n_cells) {
  if (first_cell < 0 || n_cells < 1 || first_cell + n_cells > grid.n_cells) {
    throw std::out_of_range("density_snapshot: window outside grid");
  }
  const std::size_t ppc = grid.points_per_cell();
  DensitySnapshot snap;
  snap.z.resize(ppc);
  snap.rho.assign(ppc, 0.0);
  for (int c = 0; c < n_cells; ++c) {
    const std::size_t base = static_cast<std::size_t>(first_cell + c) * ppc;
    for (std::size_t j = 0; j < ppc; ++j) snap.rho[j] += std::norm(state.psi[base + j]);
  }
  const std::size_t base0 = static_cast<std::size_t>(first_cell) * ppc;
  double area = 0.0;
  for (std::size_t j = 0; j < ppc; ++j) {
    snap.z[j] = grid.positions[base0 + j];
    area += snap.rho[j] * grid.spacing;
  }
  if (area > 0) {
    for (auto& r : snap.rho) r /= area;
  }
  return snap;
}

void write_density_csv(const std::filesystem::path& path, const DensitySnapshot& snap) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "z_over_lambda,rho_lambda\n" << std::setprecision(12);
  for (std::size_t j = 0; j < snap.z.size(); ++j) out << snap.z[j] << ',' << snap.rho[j] << '\n';
}

}  // namespace cavitydtc
