#include "cavitydtc/trapmodes.hpp"

#include <cmath>

#include "cavitydtc/errors.hpp"

namespace cavitydtc {

TrapCoupling TrapCoupling::from_b(double b) {
  if (!(b > 0) || !std::isfinite(b)) throw ConfigError("trap coupling needs b > 0");
  return {b, 1.0 / (kPi * std::sqrt(2.0 * b)), 1.0};
}

TrapCoupling TrapCoupling::from_osc_length(double lz_over_lambda) {
  if (!(lz_over_lambda > 0) || !std::isfinite(lz_over_lambda)) {
    throw ConfigError("trap coupling needs a finite oscillator length");
  }
  return {1.0 / (2.0 * kPi * kPi * lz_over_lambda * lz_over_lambda), lz_over_lambda, 1.0};
}

TrapCoupling TrapCoupling::from_params(const SystemParams& p) {
  return from_b(derive_scales(p).b);
}

double v_eff(double z, const TrapCoupling& tc) {
  return kRecoilFreq * tc.b * -std::expm1(-z * z / (2.0 * tc.lz * tc.lz));
}

double v_of_dk(double dk, const TrapCoupling& tc) {
  const double x = dk * tc.lz;
  return kRecoilFreq * tc.lambda * std::sqrt(tc.b) / (kPi * std::sqrt(2.0)) * std::exp(-0.5 * x * x);
}

double vbar(const TrapCoupling& tc) {
  return kRecoilFreq * tc.lambda * std::sqrt(tc.b) / (kPi * std::sqrt(2.0)) *
         std::exp(-1.0 / (4.0 * tc.b));
}

ModePopulations momentum_occupations(const CField& state, const Grid& grid) {
  SpectralTransform fft(grid.n_points);
  const auto c = mode_amplitudes(state, grid, fft);
  ModePopulations out;
  out.k = grid.wavenumbers;
  out.population.resize(c.size());
  const double half_bin = kPi / grid.length;
  for (std::size_t m = 0; m < c.size(); ++m) {
    const double pop = std::norm(c[m]);
    out.population[m] = pop;
    const double k = std::abs(grid.wavenumbers[m]);
    if (k < half_bin) {
      out.k0 += pop;
    } else if (std::abs(k - kWaveNumber) < half_bin) {
      out.k1 += pop;
    } else {
      out.residual += pop;
    }
  }
  return out;
}

}  // namespace cavitydtc
