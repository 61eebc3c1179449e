#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "cavitydtc/spectral.hpp"

namespace cavitydtc {

/// Periodic 1D grid spanning an integer number of cavity wavelengths.
struct Grid {
  int n_cells = 0;          // L / lambda
  std::size_t n_points = 0;
  double length = 0.0;      // in lambda
  double spacing = 0.0;
  std::vector<double> positions;    // z_j = (j - n/2) * spacing
  std::vector<double> wavenumbers;  // FFT ordering

  [[nodiscard]] std::size_t points_per_cell() const { return n_points / static_cast<std::size_t>(n_cells); }
};

/// Builds a grid of `n_cells` wavelengths with `points_per_cell` samples each.
/// Requires points_per_cell >= 8 and even (so a half-period shift is a grid shift).
[[nodiscard]] Grid make_grid(int n_cells, int points_per_cell);

/// One trajectory's c-field: condensate amplitude (unit norm) and cavity amplitude.
struct CField {
  std::vector<cplx> psi;
  cplx alpha{0.0, 0.0};
  double time = 0.0;
};

[[nodiscard]] CField uniform_state(const Grid& grid);

[[nodiscard]] double norm(const CField& state, const Grid& grid);
[[nodiscard]] bool is_finite(const CField& state);

/// Theta = <cos(kz)>; positive for the even density wave, negative for the odd one.
[[nodiscard]] double order_parameter(const CField& state, const Grid& grid);
/// B = <cos^2(kz)>, the overlap that shifts the cavity resonance.
[[nodiscard]] double bunching(const CField& state, const Grid& grid);

/// Shifts the state by lambda/2, swapping even and odd sites. Alpha is negated
/// so the shifted configuration is again a solution of the equations of motion.
[[nodiscard]] CField translate_half_period(const CField& state, const Grid& grid);

/// Spectral amplitudes c_m with sum |c_m|^2 == sum |psi_j|^2 dz.
[[nodiscard]] std::vector<cplx> mode_amplitudes(const CField& state, const Grid& grid,
                                                const SpectralTransform& fft);

struct DensitySnapshot {
  std::vector<double> z;    // in lambda, over one cell
  std::vector<double> rho;  // rho * lambda, integrates to 1 over the cell
};

/// Folds |psi|^2 over cells [first_cell, first_cell + n_cells) onto one unit cell.
[[nodiscard]] DensitySnapshot density_snapshot(const CField& state, const Grid& grid,
                                               int first_cell, int n_cells);

/// Two-column CSV: z_over_lambda,rho_lambda.
void write_density_csv(const std::filesystem::path& path, const DensitySnapshot& snap);

}  // namespace cavitydtc
