#pragma once

#include <vector>

#include "cavitydtc/field.hpp"
#include "cavitydtc/params.hpp"

namespace cavitydtc {

enum class InitialGuess { Uniform, Gaussian, ThomasFermi };

struct GroundStateOptions {
  double tol = 1e-12;        // relative energy change per unit imaginary time
  double dtau = 5e-3;
  long max_steps = 2'000'000;
  long check_every = 200;
};

struct GroundStateResult {
  CField state;
  InitialGuess guess = InitialGuess::Uniform;
  double energy_per_particle = 0.0;
  long steps = 0;
  double edge_ratio = 0.0;  // |psi|^2 at the box edge over its peak
  bool edge_flagged = false;
};

/// Edge density above this fraction of the peak flags a trapped run.
inline constexpr double kEdgeRatioLimit = 1e-8;

/// Thomas-Fermi density (normalized to 1) for the configured trap and g.
[[nodiscard]] std::vector<double> thomas_fermi_density(const SystemParams& p, const Grid& grid);
/// Harmonic-oscillator ground-state density exp(-z^2 / l_z^2) / (sqrt(pi) l_z).
[[nodiscard]] std::vector<double> gaussian_density(const SystemParams& p, const Grid& grid);

[[nodiscard]] InitialGuess choose_initial_guess(const SystemParams& p);

/// Energy per particle of the atomic part (kinetic + trap + contact), alpha ignored.
[[nodiscard]] double atomic_energy(const CField& state, const SystemParams& p, const Grid& grid);

/// Imaginary-time split-step relaxation to the trapped/interacting ground state
/// with alpha = 0. Throws NumericalError if not converged within max_steps.
[[nodiscard]] GroundStateResult ground_state(const SystemParams& p, const Grid& grid,
                                             const GroundStateOptions& opt = {});

/// Propagates `state` in real time without pump for `duration` and returns the
/// relative L2 change of the density profile.
[[nodiscard]] double realtime_density_change(const CField& state, const SystemParams& p,
                                             const Grid& grid, double duration, double dt);

}  // namespace cavitydtc
