#include "cavitydtc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cavitydtc/spectral.hpp"

namespace cavitydtc {

void TrajectoryRecord::validate() const {
  const std::size_t n = times.size();
  if (theta.size() != n || photons.size() != n || alpha.size() != n) {
    throw std::invalid_argument("TrajectoryRecord: series lengths differ");
  }
  if (n == 0 || t0_index >= n) throw std::invalid_argument("TrajectoryRecord: t0 outside record");
  if (samples_per_period < 1 || !(period > 0)) {
    throw std::invalid_argument("TrajectoryRecord: invalid sampling");
  }
}

Correlation correlation(const std::vector<TrajectoryRecord>& records) {
  if (records.empty()) throw std::invalid_argument("correlation: no trajectories");
  const auto& first = records.front();
  first.validate();
  for (const auto& r : records) {
    r.validate();
    if (r.size() != first.size() || r.t0_index != first.t0_index) {
      throw std::invalid_argument("correlation: records do not share a time grid");
    }
  }
  const std::size_t n = first.size();
  Correlation out;
  out.values.assign(n, 0.0);
  double den = 0.0;
  for (const auto& r : records) den += std::norm(r.alpha[r.t0_index]);
  if (!(den > 0.0)) {
    out.empty_cavity = true;
    return out;
  }
  const double n_traj = static_cast<double>(records.size());
  std::vector<double> sum_sq(n, 0.0);
  for (const auto& r : records) {
    const auto a0 = r.alpha[r.t0_index];
    for (std::size_t i = 0; i < n; ++i) {
      const double ci = (std::conj(r.alpha[i]) * a0).real();
      out.values[i] += ci;
      sum_sq[i] += ci * ci;
    }
  }
  for (auto& v : out.values) v /= den;
  if (records.size() > 1) {
    // Per-trajectory C_i = n_traj Re(alpha_i* alpha_i(t0)) / den, whose mean is C.
    const double scale = n_traj / den;
    double acc = 0.0;
    for (std::size_t i = first.t0_index; i < n; ++i) {
      const double mean = out.values[i];
      const double var = (sum_sq[i] * scale * scale / n_traj - mean * mean) * n_traj / (n_traj - 1.0);
      acc += std::max(var, 0.0) / n_traj;
    }
    out.std_error = std::sqrt(acc / static_cast<double>(n - first.t0_index));
  }
  return out;
}

std::vector<EnvelopePoint> strobe_envelope(const std::vector<double>& c, std::size_t t0_index,
                                           int samples_per_period, double period) {
  if (samples_per_period < 1) throw std::invalid_argument("strobe_envelope: bad sampling");
  const std::size_t window = 2 * static_cast<std::size_t>(samples_per_period);
  if (t0_index >= c.size() || c.size() - t0_index < window) {
    throw std::invalid_argument("strobe_envelope: series shorter than two periods");
  }
  const double sample_dt = period / samples_per_period;
  const std::size_t n_windows = (c.size() - t0_index) / window;
  std::vector<EnvelopePoint> env;
  env.reserve(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    const std::size_t begin = t0_index + w * window;
    std::size_t best = begin;
    for (std::size_t i = begin; i < begin + window; ++i) {
      if (std::abs(c[i]) > std::abs(c[best])) best = i;
    }
    env.push_back({static_cast<double>(best - t0_index) * sample_dt, std::abs(c[best])});
  }
  return env;
}

namespace {

struct LineFit {
  double slope;
  double intercept;
  double sse;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, std::size_t begin,
                 std::size_t end) {
  const double n = static_cast<double>(end - begin);
  double sx = 0, sy = 0;
  for (std::size_t i = begin; i < end; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = begin; i < end; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f{};
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = begin; i < end; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    f.sse += r * r;
  }
  return f;
}

}  // namespace

LifetimeFit fit_lifetime(const std::vector<EnvelopePoint>& envelope, double period,
                         const LifetimeOptions& opt) {
  LifetimeFit fit;
  std::vector<double> t, y;
  for (const auto& p : envelope) {
    if (!(p.value > 0.0) || p.value <= opt.floor) break;
    t.push_back(p.time);
    y.push_back(std::log(p.value));
  }
  fit.n_points = t.size();
  if (t.size() < 3) return fit;
  const double horizon = envelope.back().time + 2.0 * period;

  std::size_t plateau = 0;
  LineFit best = fit_line(t, y, 0, t.size());
  double best_sse = best.sse;
  // Each envelope point covers two drive periods.
  const auto min_plateau = static_cast<std::size_t>((opt.min_plateau_cycles + 1) / 2);
  for (std::size_t p = std::max<std::size_t>(min_plateau, 2); p + 3 <= t.size(); ++p) {
    const LineFit pre = fit_line(t, y, 0, p);
    const LineFit post = fit_line(t, y, p, t.size());
    if (!(post.slope < 0.0)) continue;
    if (std::abs(pre.slope) >= opt.plateau_slope_ratio * std::abs(post.slope)) continue;
    if (pre.sse + post.sse < best_sse) {
      best_sse = pre.sse + post.sse;
      best = post;
      plateau = p;
    }
  }
  fit.slope = best.slope;
  if (plateau > 0) fit.plateau_end = t[plateau];
  if (best.slope < 0.0) {
    const double tau = -1.0 / best.slope;
    if (tau <= horizon) {
      fit.tau = tau;
      fit.censored = false;
    }
  }
  return fit;
}

double PowerSpectrum::power_near(double f) const {
  if (frequency.size() < 2) return 0.0;
  const double df = frequency[1] - frequency[0];
  const auto centre = static_cast<long>(std::lround(f / df));
  double acc = 0.0;
  for (long m = centre - 1; m <= centre + 1; ++m) {
    if (m >= 0 && m < static_cast<long>(power.size())) acc += power[static_cast<std::size_t>(m)];
  }
  return acc;
}

PowerSpectrum power_spectrum(const std::vector<double>& series, int samples_per_period) {
  PowerSpectrum out;
  const std::size_t n = series.size();
  if (n < 2) return out;
  std::vector<cplx> buf(series.begin(), series.end());
  SpectralTransform fft(n);
  fft.forward(buf);
  const double cycles = static_cast<double>(n) / samples_per_period;
  const std::size_t half = n / 2;
  out.frequency.resize(half + 1);
  out.power.resize(half + 1);
  const double norm2 = static_cast<double>(n) * static_cast<double>(n);
  for (std::size_t m = 0; m <= half; ++m) {
    out.frequency[m] = static_cast<double>(m) / cycles;
    out.power[m] = std::norm(buf[m]) / norm2;
  }
  for (std::size_t m = 1; m <= half; ++m) {
    const double left = out.power[m - 1];
    const double right = m < half ? out.power[m + 1] : 0.0;
    if (out.power[m] > left && out.power[m] >= right && out.power[m] > 0.0) {
      out.peaks.push_back({out.frequency[m], out.power[m]});
    }
  }
  std::stable_sort(out.peaks.begin(), out.peaks.end(),
                   [](const SpectrumPeak& a, const SpectrumPeak& b) { return a.power > b.power; });
  if (out.peaks.size() > 16) out.peaks.resize(16);
  return out;
}

std::string to_string(PhaseLabel label) {
  switch (label) {
    case PhaseLabel::StableDTC: return "StableDTC";
    case PhaseLabel::MetastableDTC: return "MetastableDTC";
    case PhaseLabel::Chaotic: return "Chaotic";
    case PhaseLabel::LowFreqDTC: return "LowFreqDTC";
    case PhaseLabel::NoDW: return "NoDW";
  }
  return "NoDW";
}

PhaseLabel label_from_string(const std::string& s) {
  for (auto l : {PhaseLabel::StableDTC, PhaseLabel::MetastableDTC, PhaseLabel::Chaotic,
                 PhaseLabel::LowFreqDTC, PhaseLabel::NoDW}) {
    if (to_string(l) == s) return l;
  }
  throw std::invalid_argument("unknown phase label: " + s);
}

namespace {

int sign_of(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

bool alternates(const std::vector<int>& s, std::size_t begin, std::size_t end) {
  for (std::size_t i = begin + 1; i < end; ++i) {
    if (s[i] == 0 || s[i] != -s[i - 1]) return false;
  }
  return s[begin] != 0;
}

}  // namespace

Classification classify_series(const std::vector<double>& witness,
                               const std::optional<PowerSpectrum>& theta_spectrum,
                               std::size_t t0_index, int samples_per_period, double period,
                               double theta_at_t0, std::size_t n_traj,
                               const ClassifyOptions& opt) {
  Classification out;
  out.n_traj = n_traj;
  const std::size_t spp = static_cast<std::size_t>(samples_per_period);
  const std::size_t cycles = (witness.size() - 1 - t0_index) / spp;
  if (cycles < static_cast<std::size_t>(opt.initial_switches + 1)) {
    throw std::invalid_argument("classify: record spans too few drive cycles");
  }
  const auto offset = static_cast<std::size_t>(std::lround(opt.strobe_offset * samples_per_period));
  std::vector<double> strobe(cycles);
  for (std::size_t n = 0; n < cycles; ++n) {
    strobe[n] = witness[t0_index + n * spp + std::min(offset, spp - 1)];
    out.strobe_signs.push_back(sign_of(strobe[n]));
  }

  if (theta_spectrum) {
    const auto& spec = *theta_spectrum;
    out.theta_peaks = spec.peaks;
    const double sub = spec.power_near(0.5);
    out.third_harmonic_ratio = sub > 0 ? spec.power_near(1.5) / sub : 0.0;
  }

  if (std::abs(theta_at_t0) < opt.theta_threshold) {
    out.label = PhaseLabel::NoDW;
    return out;
  }

  const double floor =
      opt.amplitude_floor >= 0
          ? opt.amplitude_floor
          : (n_traj > 1 ? 3.0 / std::sqrt(static_cast<double>(n_traj)) : 0.05);
  out.amplitude_floor = floor;
  const std::size_t final_n = std::min<std::size_t>(opt.final_cycles, cycles / 2);
  const std::size_t final_begin = cycles - final_n;
  bool stable = alternates(out.strobe_signs, final_begin, cycles);
  for (std::size_t n = final_begin; stable && n < cycles; ++n) {
    if (std::abs(strobe[n]) <= floor) stable = false;
  }
  const bool early = alternates(out.strobe_signs, 0, static_cast<std::size_t>(opt.initial_switches) + 1);

  const auto env = strobe_envelope(witness, t0_index, samples_per_period, period);
  LifetimeOptions lopt;
  lopt.floor = n_traj > 1 ? floor : 0.0;
  out.lifetime = fit_lifetime(env, period, lopt);

  if (stable) {
    out.label = out.third_harmonic_ratio >= opt.third_harmonic_ratio ? PhaseLabel::LowFreqDTC
                                                                      : PhaseLabel::StableDTC;
  } else if (early) {
    out.label = PhaseLabel::MetastableDTC;
    out.prethermal = out.lifetime.plateau_end.has_value();
  } else {
    out.label = PhaseLabel::Chaotic;
  }
  return out;
}

PowerSpectrum drive_theta_spectrum(const std::vector<TrajectoryRecord>& records) {
  if (records.empty()) throw std::invalid_argument("drive_theta_spectrum: no trajectories");
  const auto& first = records.front();
  const std::size_t spp = static_cast<std::size_t>(first.samples_per_period);
  const std::size_t cycles = (first.size() - 1 - first.t0_index) / spp;
  PowerSpectrum mean;
  for (const auto& r : records) {
    const auto begin = r.theta.begin() + static_cast<long>(r.t0_index);
    const std::vector<double> window(begin, begin + static_cast<long>(cycles * spp));
    auto spec = power_spectrum(window, r.samples_per_period);
    if (mean.power.empty()) {
      mean = std::move(spec);
    } else {
      for (std::size_t m = 0; m < mean.power.size(); ++m) mean.power[m] += spec.power[m];
    }
  }
  if (records.size() > 1) {
    for (auto& p : mean.power) p /= static_cast<double>(records.size());
    mean.peaks.clear();
    const std::size_t half = mean.power.size() - 1;
    for (std::size_t m = 1; m <= half; ++m) {
      const double right = m < half ? mean.power[m + 1] : 0.0;
      if (mean.power[m] > mean.power[m - 1] && mean.power[m] >= right) {
        mean.peaks.push_back({mean.frequency[m], mean.power[m]});
      }
    }
    std::stable_sort(mean.peaks.begin(), mean.peaks.end(),
                     [](const SpectrumPeak& x, const SpectrumPeak& y) { return x.power > y.power; });
    if (mean.peaks.size() > 16) mean.peaks.resize(16);
  }
  return mean;
}

Classification classify(const std::vector<TrajectoryRecord>& records, const ClassifyOptions& opt,
                        bool use_theta) {
  const auto corr = correlation(records);
  const auto& first = records.front();
  double theta_t0 = 0.0;
  for (const auto& r : records) theta_t0 += std::abs(r.theta[r.t0_index]);
  theta_t0 /= static_cast<double>(records.size());

  const bool theta_mode = use_theta || corr.empty_cavity;
  const auto& witness = theta_mode ? first.theta : corr.values;
  ClassifyOptions o = opt;
  if (o.amplitude_floor < 0 && !theta_mode && records.size() > 1) o.amplitude_floor = 3.0 * corr.std_error;
  Classification out = classify_series(witness, drive_theta_spectrum(records), first.t0_index,
                                       first.samples_per_period, first.period, theta_t0,
                                       theta_mode ? 1 : records.size(), o);
  out.used_correlation = !theta_mode;
  out.n_traj = records.size();
  return out;
}

}  // namespace cavitydtc
