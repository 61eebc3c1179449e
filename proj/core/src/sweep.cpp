#include "cavitydtc/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "cavitydtc/dynamics.hpp"
#include "cavitydtc/errors.hpp"
#include "cavitydtc/ground_state.hpp"
#include "cavitydtc/rng.hpp"

#ifndef CAVITYDTC_VERSION
#define CAVITYDTC_VERSION "unknown"
#endif

namespace cavitydtc {

using json = nlohmann::json;

void RunSettings::validate() const {
  if (samples_per_period < 1) throw ConfigError("samples_per_period must be >= 1");
  if (steps_per_period < samples_per_period || steps_per_period % samples_per_period != 0) {
    throw ConfigError("steps_per_period must be a positive multiple of samples_per_period");
  }
  if (!(seed_amplitude >= 0)) throw ConfigError("seed amplitude must be >= 0");
  if (splitting_order != 2 && splitting_order != 4) throw ConfigError("splitting_order must be 2 or 4");
}

namespace {

void record_sample(TrajectoryRecord& rec, const CField& s, const Grid& grid) {
  rec.times.push_back(s.time);
  rec.theta.push_back(order_parameter(s, grid));
  rec.photons.push_back(std::norm(s.alpha));
  rec.alpha.push_back(s.alpha);
}

}  // namespace

TrajectoryRecord run_trajectory(const SystemParams& p, const PumpSchedule& schedule,
                                const Grid& grid, const CField& initial,
                                const RunSettings& settings, std::uint64_t seed,
                                CField* final_state) {
  settings.validate();
  schedule.validate();
  const double period = schedule.period();
  const double dt = period / settings.steps_per_period;
  const long stride = settings.steps_per_period / settings.samples_per_period;
  const double sample_dt = period / settings.samples_per_period;
  const double t0 = schedule.hold_end;
  const long m_pre = settings.record_pre_drive ? static_cast<long>(std::floor(t0 / sample_dt)) : 0;
  const double t_first = t0 - static_cast<double>(m_pre) * sample_dt;

  EomContext ctx;
  ctx.params = p;
  ctx.grid = grid;
  ctx.pump = schedule;
  ctx.dt = dt;
  ctx.noise_on = settings.noise_on;
  ctx.wigner_sampling_on = settings.wigner_sampling_on;
  ctx.splitting_order = settings.splitting_order;
  Integrator integ(ctx);

  Rng rng(seed);
  CField s = initial;
  s.alpha = 0.0;
  s.time = 0.0;
  s = settings.wigner_sampling_on ? sample_initial(s, ctx, rng)
                                  : seed_density_wave(s, grid, settings.seed_amplitude);
  Rng* noise = settings.noise_on ? &rng : nullptr;

  if (t_first > 0) {
    const long n_lead = std::max(1L, static_cast<long>(std::ceil(t_first / dt)));
    EomContext lead = ctx;
    lead.dt = t_first / static_cast<double>(n_lead);
    Integrator lead_integ(lead);
    lead_integ.advance(s, n_lead, noise);
  }
  s.time = t_first;

  TrajectoryRecord rec;
  rec.t0 = t0;
  rec.t0_index = static_cast<std::size_t>(m_pre);
  rec.samples_per_period = settings.samples_per_period;
  rec.period = period;
  const long n_samples = m_pre + static_cast<long>(schedule.drive_cycles) * settings.samples_per_period;
  rec.times.reserve(static_cast<std::size_t>(n_samples + 1));
  rec.theta.reserve(static_cast<std::size_t>(n_samples + 1));
  rec.photons.reserve(static_cast<std::size_t>(n_samples + 1));
  rec.alpha.reserve(static_cast<std::size_t>(n_samples + 1));
  record_sample(rec, s, grid);
  for (long i = 1; i <= n_samples; ++i) {
    integ.advance(s, stride, noise);
    s.time = t_first + static_cast<double>(i) * sample_dt;
    record_sample(rec, s, grid);
  }
  if (final_state) *final_state = std::move(s);
  return rec;
}

EnsembleRecord run_ensemble(const EnsembleSpec& spec) {
  if (spec.n_traj < 1) throw ConfigError("ensemble needs at least one trajectory");
  std::vector<std::optional<TrajectoryRecord>> results(spec.n_traj);
  std::vector<std::string> errors(spec.n_traj);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < spec.n_traj; i = next++) {
      try {
        results[i] = run_trajectory(spec.params, spec.schedule, spec.grid, spec.initial,
                                    spec.settings,
                                    derive_seed(spec.master_seed, spec.cell_index, i));
      } catch (const NumericalError& e) {
        errors[i] = e.what();
      }
    }
  };
  const int threads = std::clamp<int>(spec.threads, 1, static_cast<int>(spec.n_traj));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  EnsembleRecord out;
  out.n_traj = spec.n_traj;
  out.master_seed = spec.master_seed;
  for (std::size_t i = 0; i < spec.n_traj; ++i) {
    if (results[i]) {
      out.records.push_back(std::move(*results[i]));
    } else {
      ++out.n_failed;
      if (out.failure.empty()) out.failure = errors[i];
    }
  }
  if (static_cast<double>(out.n_failed) > spec.max_failure_fraction * static_cast<double>(spec.n_traj) ||
      out.records.empty()) {
    out.valid = false;
    return out;
  }
  out.c_of_t = correlation(out.records);
  const auto& r0 = out.records.front();
  out.c_strobe = strobe_envelope(out.c_of_t.values, r0.t0_index, r0.samples_per_period, r0.period);
  return out;
}

void SweepSpec::validate() const {
  auto increasing = [](const std::vector<double>& v) {
    if (v.empty()) return false;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (!(v[i] > v[i - 1])) return false;
    }
    return true;
  };
  if (!increasing(fd_grid)) throw ConfigError("f_d grid must be non-empty and strictly increasing");
  if (!increasing(wd_grid_khz)) {
    throw ConfigError("omega_d grid must be non-empty and strictly increasing");
  }
  if (fd_grid.front() < 0 || fd_grid.back() > 1) throw ConfigError("f_d grid must lie in [0, 1]");
  if (wd_grid_khz.front() <= 0) throw ConfigError("omega_d grid must be positive");
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
  if (drive_cycles < 7) throw ConfigError("need at least 7 drive cycles to classify");
  if (!(pump_factor > 0)) throw ConfigError("pump factor must be > 0");
  base.validate();
  settings.validate();
}

std::string SweepSpec::fingerprint() const {
  std::ostringstream os;
  os << std::setprecision(17);
  for (double v : fd_grid) os << v << ',';
  os << '|';
  for (double v : wd_grid_khz) os << v << ',';
  os << '|' << e_int_over_e_rec << '|' << e_osc_over_e_rec << '|' << n_traj << '|' << master_seed
     << '|' << drive_cycles << '|' << pump_factor << '|' << n_cells << '|' << points_per_cell;
  os << '|' << base.n_atoms << ',' << base.recoil_freq_si << ',' << base.kappa << ',' << base.u0
     << ',' << base.delta_eff;
  os << '|' << settings.samples_per_period << ',' << settings.steps_per_period << ','
     << settings.noise_on << ',' << settings.wigner_sampling_on << ',' << settings.seed_amplitude << ','
     << settings.splitting_order;
  os << '|' << crit.dt << ',' << crit.theta_threshold << ',' << crit.seed_amplitude << ','
     << crit.rel_tol;
  const std::string text = os.str();
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (unsigned char ch : text) h = mix64(h ^ ch);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SweepSpec desk_scale_sweep() {
  SweepSpec s;
  s.fd_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  s.wd_grid_khz = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
  s.n_traj = 64;
  s.drive_cycles = 100;
  return s;
}

SweepSpec paper_scale_sweep() {
  SweepSpec s;
  for (int i = 1; i <= 18; ++i) s.fd_grid.push_back(0.05 * i);
  for (int i = 1; i <= 20; ++i) s.wd_grid_khz.push_back(0.5 * i);
  s.n_traj = 1000;
  s.drive_cycles = 200;
  s.settings.steps_per_period = 2048;
  return s;
}

namespace {

json cell_to_json(const PhasePoint& c, std::size_t i_fd, std::size_t i_wd, const std::string& fp) {
  json j;
  j["fingerprint"] = fp;
  j["i_fd"] = i_fd;
  j["i_wd"] = i_wd;
  j["f_d"] = c.f_d;
  j["omega_d_khz"] = c.omega_d_khz;
  j["valid"] = c.valid;
  j["label"] = to_string(c.label);
  j["tau_ms"] = std::isfinite(c.tau_ms) ? json(c.tau_ms) : json(nullptr);
  j["plateau"] = c.plateau;
  j["plateau_end_ms"] = c.plateau_end_ms;
  j["epsilon_crit"] = c.epsilon_crit;
  j["n_failed"] = c.n_failed;
  j["error"] = c.error;
  return j;
}

PhasePoint cell_from_json(const json& j) {
  PhasePoint c;
  c.f_d = j.at("f_d").get<double>();
  c.omega_d_khz = j.at("omega_d_khz").get<double>();
  c.valid = j.at("valid").get<bool>();
  c.label = label_from_string(j.at("label").get<std::string>());
  c.tau_ms = j.at("tau_ms").is_null() ? std::numeric_limits<double>::infinity()
                                      : j.at("tau_ms").get<double>();
  c.plateau = j.at("plateau").get<bool>();
  c.plateau_end_ms = j.at("plateau_end_ms").get<double>();
  c.epsilon_crit = j.at("epsilon_crit").get<double>();
  c.n_failed = j.at("n_failed").get<std::size_t>();
  c.error = j.at("error").get<std::string>();
  return c;
}

std::filesystem::path cell_path(const std::filesystem::path& dir, std::size_t i_fd, std::size_t i_wd) {
  return dir / "cells" / ("cell_" + std::to_string(i_fd) + "_" + std::to_string(i_wd) + ".json");
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

PhaseDiagram build_phase_diagram(const SweepSpec& spec, const SweepOptions& opt) {
  const auto started = std::chrono::steady_clock::now();
  spec.validate();
  const SystemParams p =
      set_osc_energy(set_interaction_energy(spec.base, spec.e_int_over_e_rec), spec.e_osc_over_e_rec);
  const Grid grid = make_grid(spec.n_cells, spec.points_per_cell);

  PhaseDiagram d;
  d.fd_grid = spec.fd_grid;
  d.wd_grid_khz = spec.wd_grid_khz;
  d.fingerprint = spec.fingerprint();
  const std::size_t n_fd = spec.fd_grid.size(), n_wd = spec.wd_grid_khz.size();
  d.cells.resize(n_fd * n_wd);
  std::vector<char> done(d.cells.size(), 0);

  if (opt.out_dir) {
    std::filesystem::create_directories(*opt.out_dir / "cells");
    if (opt.resume) {
      for (std::size_t i = 0; i < n_fd; ++i) {
        for (std::size_t k = 0; k < n_wd; ++k) {
          const auto path = cell_path(*opt.out_dir, i, k);
          if (!std::filesystem::exists(path)) continue;
          std::ifstream in(path);
          const json j = json::parse(in);
          if (j.at("fingerprint").get<std::string>() != d.fingerprint) {
            throw ConfigError("resume: " + path.string() + " was produced by a different sweep spec");
          }
          d.cells[i * n_wd + k] = cell_from_json(j);
          done[i * n_wd + k] = 1;
        }
      }
    }
  }

  const auto gs = ground_state(p, grid);
  const auto crit = find_critical_pump(p, grid, gs.state, spec.crit);
  d.epsilon_crit = crit.epsilon_crit;

  std::vector<std::size_t> todo;
  for (std::size_t c = 0; c < d.cells.size(); ++c) {
    if (!done[c]) todo.push_back(c);
  }
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> computed{0};
  std::mutex writer;
  auto worker = [&] {
    for (;;) {
      if (opt.stop_after_cells > 0 && computed.load() >= opt.stop_after_cells) return;
      const std::size_t slot = next++;
      if (slot >= todo.size()) return;
      if (opt.stop_after_cells > 0 && slot >= opt.stop_after_cells) return;
      const std::size_t c = todo[slot];
      const std::size_t i_fd = c / n_wd, i_wd = c % n_wd;
      PhasePoint pt;
      pt.f_d = spec.fd_grid[i_fd];
      pt.omega_d_khz = spec.wd_grid_khz[i_wd];
      pt.epsilon_crit = crit.epsilon_crit;
      try {
        EnsembleSpec es;
        es.params = p;
        es.schedule = make_schedule(p, spec.pump_factor * crit.epsilon_crit, pt.f_d, pt.omega_d_khz,
                                    spec.drive_cycles);
        es.grid = grid;
        es.initial = gs.state;
        es.settings = spec.settings;
        es.settings.record_pre_drive = false;
        es.n_traj = spec.n_traj;
        es.master_seed = spec.master_seed;
        es.cell_index = c;
        const auto ens = run_ensemble(es);
        pt.n_failed = ens.n_failed;
        if (!ens.valid) {
          pt.error = "too many failed trajectories: " + ens.failure;
        } else {
          const auto cls = classify(ens.records);
          pt.valid = true;
          pt.label = cls.label;
          pt.tau_ms = std::isfinite(cls.lifetime.tau) ? p.code_to_ms(cls.lifetime.tau)
                                                      : std::numeric_limits<double>::infinity();
          pt.plateau = cls.prethermal;
          pt.plateau_end_ms = cls.lifetime.plateau_end ? p.code_to_ms(*cls.lifetime.plateau_end) : 0.0;
        }
      } catch (const std::exception& e) {
        pt.valid = false;
        pt.error = e.what();
      }
      std::lock_guard lock(writer);
      d.cells[c] = pt;
      done[c] = 1;
      ++computed;
      if (opt.out_dir) write_atomic(cell_path(*opt.out_dir, i_fd, i_wd), cell_to_json(pt, i_fd, i_wd, d.fingerprint).dump(2));
      if (opt.on_cell) opt.on_cell(pt);
    }
  };
  const int threads = std::max(1, opt.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  d.cells_computed = computed.load();
  d.complete = std::all_of(done.begin(), done.end(), [](char v) { return v != 0; });
  d.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (opt.out_dir) {
    if (d.complete) write_atomic(*opt.out_dir / "diagram.csv", diagram_csv(d));
    write_manifest(*opt.out_dir / "manifest.json", spec, d);
  }
  return d;
}

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

std::string diagram_csv(const PhaseDiagram& d) {
  std::ostringstream os;
  os << "f_d,omega_d_kHz,label,tau_ms,plateau\n";
  for (const auto& c : d.cells) {
    os << fmt(c.f_d) << ',' << fmt(c.omega_d_khz) << ',' << (c.valid ? to_string(c.label) : "invalid")
       << ',' << (c.label == PhaseLabel::MetastableDTC && c.valid ? fmt(c.tau_ms) : fmt(std::numeric_limits<double>::infinity()))
       << ',' << (c.plateau ? 1 : 0) << '\n';
  }
  return os.str();
}

void write_manifest(const std::filesystem::path& path, const SweepSpec& spec, const PhaseDiagram& d) {
  json m;
  m["code_version"] = CAVITYDTC_VERSION;
  m["fingerprint"] = d.fingerprint;
  m["complete"] = d.complete;
  m["wall_seconds"] = d.wall_seconds;
  m["cells_computed_this_run"] = d.cells_computed;
  m["epsilon_crit_code_units"] = d.epsilon_crit;
  m["seed_scheme"] =
      "trajectory seed = mix64(mix64(mix64(master) ^ cell) ^ (traj + 0x632be59bd9b4e019)), "
      "mix64 = SplitMix64 finalizer; cell = i_fd * n_wd + i_wd";
  m["master_seed"] = spec.master_seed;
  m["n_traj"] = spec.n_traj;
  m["drive_cycles"] = spec.drive_cycles;
  m["pump_factor"] = spec.pump_factor;
  m["e_int_over_e_rec"] = spec.e_int_over_e_rec;
  m["e_osc_over_e_rec"] = spec.e_osc_over_e_rec;
  m["fd_grid"] = spec.fd_grid;
  m["omega_d_khz_grid"] = spec.wd_grid_khz;
  m["grid"] = {{"n_cells", spec.n_cells}, {"points_per_cell", spec.points_per_cell}};
  m["settings"] = {{"samples_per_period", spec.settings.samples_per_period},
                   {"steps_per_period", spec.settings.steps_per_period},
                   {"noise_on", spec.settings.noise_on},
                   {"wigner_sampling_on", spec.settings.wigner_sampling_on},
                   {"splitting_order", spec.settings.splitting_order}};
  const auto& b = spec.base;
  m["params"] = {{"n_atoms", b.n_atoms},
                 {"recoil_freq_khz", b.recoil_freq_si / (2.0 * kPi) * 1e-3},
                 {"kappa_khz", b.code_to_khz(b.kappa)},
                 {"u0_hz", b.code_to_hz(b.u0)},
                 {"delta_eff_khz", b.code_to_khz(b.delta_eff)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << m.dump(2) << '\n';
}

TrajectoryRecord ensemble_mean(const std::vector<TrajectoryRecord>& records) {
  if (records.empty()) throw std::invalid_argument("ensemble_mean: no records");
  TrajectoryRecord m = records.front();
  const double w = 1.0 / static_cast<double>(records.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    double theta = 0.0, photons = 0.0;
    cplx alpha = 0.0;
    for (const auto& r : records) {
      theta += r.theta[i];
      photons += r.photons[i];
      alpha += r.alpha[i];
    }
    m.theta[i] = theta * w;
    m.photons[i] = photons * w;
    m.alpha[i] = alpha * w;
  }
  return m;
}

void write_timeseries_csv(const std::filesystem::path& path, const SystemParams& p,
                          const PumpSchedule& schedule, double epsilon_unit,
                          const TrajectoryRecord& rec, const std::vector<double>& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "t_ms,epsilon,theta,photons,C\n" << std::setprecision(12);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    out << p.code_to_ms(rec.times[i]) << ',' << epsilon_at(schedule, rec.times[i]) / epsilon_unit
        << ',' << rec.theta[i] << ',' << rec.photons[i] << ',' << (i < c.size() ? c[i] : 0.0) << '\n';
  }
}

void write_envelope_csv(const std::filesystem::path& path, const std::vector<EnvelopePoint>& env,
                        double period) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "cycle,C_bar\n" << std::setprecision(12);
  for (const auto& e : env) out << e.time / period << ',' << e.value << '\n';
}

std::string classification_json(const SystemParams& p, const Classification& c) {
  json j;
  j["label"] = to_string(c.label);
  j["tau"] = c.lifetime.censored ? json(nullptr) : json(p.code_to_ms(c.lifetime.tau));
  j["tau_units"] = "ms";
  j["plateau_end"] = c.lifetime.plateau_end ? json(p.code_to_ms(*c.lifetime.plateau_end)) : json(nullptr);
  j["prethermal"] = c.prethermal;
  j["used_correlation"] = c.used_correlation;
  j["n_traj"] = c.n_traj;
  j["amplitude_floor"] = c.amplitude_floor;
  j["third_harmonic_ratio"] = c.third_harmonic_ratio;
  json peaks = json::array();
  for (const auto& pk : c.theta_peaks) {
    peaks.push_back({{"frequency_over_omega_d", pk.frequency}, {"power", pk.power}});
  }
  j["peaks"] = peaks;
  return j.dump(2);
}

}  // namespace cavitydtc
