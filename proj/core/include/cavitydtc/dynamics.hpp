#pragma once

#include <cstdint>
#include <vector>

#include "cavitydtc/field.hpp"
#include "cavitydtc/params.hpp"
#include "cavitydtc/protocol.hpp"
#include "cavitydtc/rng.hpp"
#include "cavitydtc/spectral.hpp"

namespace cavitydtc {

struct EomContext {
  SystemParams params;
  Grid grid;
  PumpSchedule pump;
  double dt = 1e-3;
  bool noise_on = true;
  bool wigner_sampling_on = true;
  /// 2: Strang splitting. 4: triple-jump composition of three Strang steps.
  int splitting_order = 2;

  /// Largest phase any linear term may accumulate per step.
  static constexpr double kStabilityBound = kPi;
  /// Throws ConfigError when dt is non-positive or exceeds the stability bound.
  void validate() const;
};

struct Drift {
  std::vector<cplx> dpsi;
  cplx dalpha;
};

/// Pump coupling per unit cos(kz) Re(alpha): hbar U0 sqrt(eps / hbar |U0|) = -sqrt(eps |U0|).
[[nodiscard]] double pump_coupling(const SystemParams& p, double epsilon);

/// Deterministic right-hand side of the c-field equations at pump intensity eps(t).
[[nodiscard]] Drift drift(const CField& state, double t, const EomContext& ctx);

/// c-number Hamiltonian (total, not per particle) with the pump frozen at eps(t).
[[nodiscard]] double energy(const CField& state, double t, const EomContext& ctx);

/// Strang-split stochastic integrator for one trajectory.
///
/// Each step is K/2 . P . K/2 where K is the exact spectral kinetic flow and P
/// the exact flow of everything else: with |psi|^2 frozen, alpha obeys a linear
/// ODE with constant coefficients and psi picks up a local phase given by the
/// time integrals of |alpha|^2 and Re(alpha). The pump is evaluated at the
/// midpoint of each P. At order 4 a step is three Strang sub-steps of lengths
/// w1 dt, (1 - 2 w1) dt, w1 dt. Cavity noise is added once per full step.
class Integrator {
 public:
  explicit Integrator(EomContext ctx);

  [[nodiscard]] const EomContext& context() const { return ctx_; }

  /// One full step of length dt. `noise` must be non-null when noise is on.
  void step(CField& state, Rng* noise);
  /// `n` consecutive steps with the inner kinetic half-steps fused. Equivalent
  /// to n calls to step() up to rounding.
  void advance(CField& state, long n, Rng* noise);

 private:
  struct Substep {
    double h;
    double t_mid;  // offset of the sub-step midpoint from the step start
  };

  void kinetic(const std::vector<cplx>& phases);
  void potential(cplx& alpha, double t_mid, double h, const std::vector<cplx>& trap_phase);

  EomContext ctx_;
  SpectralTransform fft_;
  AlignedBuffer work_;
  std::vector<double> cos_kz_;
  std::vector<double> cos2_kz_;
  std::vector<double> trap_;
  std::vector<Substep> subs_;
  std::vector<std::vector<cplx>> kin_;
  std::vector<std::vector<cplx>> trap_phase_;
  std::vector<cplx> cell_phase_;
};

/// Throws NumericalError when the state holds NaN/Inf.
void check_finite(const CField& state, const char* where);

/// Adds Wigner half-quantum noise to every plane-wave mode of sqrt(N) psi and to
/// alpha. Returns the input unchanged when Wigner sampling is off.
[[nodiscard]] CField sample_initial(const CField& state0, const EomContext& ctx, std::uint64_t seed);
[[nodiscard]] CField sample_initial(const CField& state0, const EomContext& ctx, Rng& rng);

/// Mean-field symmetry-breaking seed: psi *= (1 + amplitude cos(kz)), renormalized.
[[nodiscard]] CField seed_density_wave(const CField& state, const Grid& grid, double amplitude);

}  // namespace cavitydtc
