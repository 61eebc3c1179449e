#pragma once

#include <vector>

#include "cavitydtc/field.hpp"
#include "cavitydtc/params.hpp"

namespace cavitydtc {

/// Trap strength expressed through b = lambda^2 / (2 pi^2 l_z^2) = omega / omega_rec.
struct TrapCoupling {
  double b = 0.0;
  double lz = 0.0;      // in lambda
  double lambda = 1.0;

  [[nodiscard]] static TrapCoupling from_b(double b);
  [[nodiscard]] static TrapCoupling from_osc_length(double lz_over_lambda);
  [[nodiscard]] static TrapCoupling from_params(const SystemParams& p);
};

/// Gaussian stand-in for the harmonic trap, omega_rec b (1 - exp(-z^2 / 2 l_z^2)).
[[nodiscard]] double v_eff(double z, const TrapCoupling& tc);

/// Magnitude of the unitary Fourier transform of the Gaussian part of v_eff,
/// omega_rec lambda sqrt(b) / (pi sqrt 2) exp(-dk^2 l_z^2 / 2).
[[nodiscard]] double v_of_dk(double dk, const TrapCoupling& tc);

/// Coupling between the k = 0 and k = +-2 pi / lambda manifolds: v_of_dk at dk = pi / lambda.
[[nodiscard]] double vbar(const TrapCoupling& tc);

struct ModePopulations {
  std::vector<double> k;           // FFT ordering
  std::vector<double> population;  // sums to the state norm
  double k0 = 0.0;
  double k1 = 0.0;  // both +-2 pi / lambda bins
  double residual = 0.0;
};

[[nodiscard]] ModePopulations momentum_occupations(const CField& state, const Grid& grid);

}  // namespace cavitydtc
