// Command-line front end: ground states, single runs, phase-diagram sweeps,
// re-classification of saved runs, threshold search and trap-coupling curves.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cavitydtc/analysis.hpp"
#include "cavitydtc/config.hpp"
#include "cavitydtc/errors.hpp"
#include "cavitydtc/ground_state.hpp"
#include "cavitydtc/protocol.hpp"
#include "cavitydtc/rng.hpp"
#include "cavitydtc/sweep.hpp"
#include "cavitydtc/trapmodes.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace cavitydtc;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> traj;
  std::optional<int> threads;
  std::string out_dir;
};

SimulationConfig load(const Common& c) {
  SimulationConfig cfg = c.config_path.empty() ? SimulationConfig{} : load_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.traj) cfg.n_traj = *c.traj;
  if (c.threads) cfg.threads = *c.threads;
  cfg.validate();
  return cfg;
}

fs::path output_dir(const Common& c) {
  fs::path dir = c.out_dir.empty() ? fs::path(".") : fs::path(c.out_dir);
  fs::create_directories(dir);
  return dir;
}

void warn_edge(const GroundStateResult& gs) {
  if (gs.edge_flagged) {
    std::cerr << "warning: ground-state density at the box edge is " << gs.edge_ratio
              << " of the peak; enlarge grid.n_cells\n";
  }
}

const char* guess_name(InitialGuess g) {
  switch (g) {
    case InitialGuess::Uniform: return "uniform";
    case InitialGuess::Gaussian: return "gaussian";
    case InitialGuess::ThomasFermi: return "thomas_fermi";
  }
  return "?";
}

// Threshold of the untrapped, non-interacting gas with the same cavity parameters.
double ideal_threshold(const SimulationConfig& cfg) {
  SimulationConfig ideal = cfg;
  ideal.e_int_over_e_rec = 0.0;
  ideal.e_osc_over_e_rec = 0.0;
  const auto p = ideal.system();
  const Grid g = make_grid(1, cfg.points_per_cell);
  return find_critical_pump(p, g, ideal.sweep_spec().crit).epsilon_crit;
}

int cmd_ground_state(const Common& common) {
  const auto cfg = load(common);
  const auto p = cfg.system();
  const Grid grid = make_grid(cfg.n_cells, cfg.points_per_cell);
  const auto gs = ground_state(p, grid);
  warn_edge(gs);
  const auto dir = output_dir(common);

  const bool trapped = p.trap_freq > 0;
  std::vector<double> gauss, tf;
  if (trapped) {
    gauss = gaussian_density(p, grid);
    tf = thomas_fermi_density(p, grid);
  }
  std::ofstream csv(dir / "ground_state.csv");
  csv << "z_over_lambda,rho,gaussian,thomas_fermi\n" << std::setprecision(12);
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    csv << grid.positions[j] << ',' << std::norm(gs.state.psi[j]) << ','
        << (trapped ? gauss[j] : 0.0) << ',' << (trapped ? tf[j] : 0.0) << '\n';
  }
  json j = {{"initial_guess", guess_name(gs.guess)},
            {"energy_per_particle_e_rec", gs.energy_per_particle / kRecoilFreq},
            {"steps", gs.steps},
            {"edge_ratio", gs.edge_ratio},
            {"edge_flagged", gs.edge_flagged}};
  std::ofstream(dir / "ground_state.json") << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_crit_pump(const Common& common) {
  const auto cfg = load(common);
  const auto p = cfg.system();
  const Grid grid = make_grid(cfg.n_cells, cfg.points_per_cell);
  const auto gs = ground_state(p, grid);
  warn_edge(gs);
  const auto res = find_critical_pump(p, grid, gs.state, cfg.sweep_spec().crit);
  const bool ideal_case = cfg.e_int_over_e_rec == 0.0 && cfg.e_osc_over_e_rec == 0.0;
  const double ideal = ideal_case ? res.epsilon_crit : ideal_threshold(cfg);

  std::ostringstream csv;
  csv << "epsilon_over_ideal,epsilon,mean_abs_theta,photons,organized\n" << std::setprecision(10);
  for (const auto& s : res.trace) {
    csv << s.epsilon / ideal << ',' << s.epsilon << ',' << s.mean_abs_theta << ',' << s.photons << ','
        << (s.organized ? 1 : 0) << '\n';
  }
  std::cout << std::setprecision(10) << "epsilon_crit_code " << res.epsilon_crit << '\n'
            << "epsilon_crit_over_ideal " << res.epsilon_crit / ideal << '\n'
            << csv.str();
  if (!common.out_dir.empty()) std::ofstream(output_dir(common) / "crit_pump.csv") << csv.str();
  return 0;
}

void write_spectrum_csv(const fs::path& path, const PowerSpectrum& s) {
  std::ofstream out(path);
  out << "frequency_over_omega_d,power\n" << std::setprecision(12);
  for (std::size_t i = 0; i < s.frequency.size(); ++i) out << s.frequency[i] << ',' << s.power[i] << '\n';
}

int cmd_run(const Common& common, bool mean_field) {
  auto cfg = load(common);
  if (mean_field) {
    cfg.settings.noise_on = false;
    cfg.settings.wigner_sampling_on = false;
    cfg.n_traj = 1;
  }
  const auto p = cfg.system();
  const Grid grid = make_grid(cfg.n_cells, cfg.points_per_cell);
  const auto gs = ground_state(p, grid);
  warn_edge(gs);
  const auto crit = find_critical_pump(p, grid, gs.state, cfg.sweep_spec().crit);

  EnsembleSpec es;
  es.params = p;
  es.schedule = cfg.schedule(crit.epsilon_crit);
  es.grid = grid;
  es.initial = gs.state;
  es.settings = cfg.settings;
  es.n_traj = cfg.n_traj;
  es.master_seed = cfg.seed;
  es.threads = cfg.threads;
  const auto ens = run_ensemble(es);
  if (!ens.valid) throw NumericalError("ensemble failed: " + ens.failure);
  const auto cls = classify(ens.records);

  const auto dir = output_dir(common);
  const auto& r0 = ens.records.front();
  write_timeseries_csv(dir / "timeseries.csv", p, es.schedule, crit.epsilon_crit,
                       ensemble_mean(ens.records), ens.c_of_t.values);
  write_timeseries_csv(dir / "trajectory_0.csv", p, es.schedule, crit.epsilon_crit, r0,
                       correlation({r0}).values);
  write_envelope_csv(dir / "envelope.csv", ens.c_strobe, r0.period);
  write_spectrum_csv(dir / "theta_spectrum.csv", drive_theta_spectrum(ens.records));
  std::ofstream(dir / "classification.json") << classification_json(p, cls) << '\n';

  // Final-state snapshots of trajectory 0 (re-run; trajectories are deterministic per seed).
  CField final_state;
  (void)run_trajectory(p, es.schedule, grid, gs.state, cfg.settings,
                       derive_seed(cfg.seed, 0, 0), &final_state);
  write_density_csv(dir / "density_final.csv",
                    density_snapshot(final_state, grid, 0, grid.n_cells));
  const auto modes = momentum_occupations(final_state, grid);
  {
    std::ofstream out(dir / "momentum_final.csv");
    out << "k_over_k0,population\n" << std::setprecision(12);
    for (std::size_t m = 0; m < modes.k.size(); ++m) {
      out << modes.k[m] / kWaveNumber << ',' << modes.population[m] << '\n';
    }
  }

  json meta = {{"t0_index", r0.t0_index},
               {"samples_per_period", r0.samples_per_period},
               {"omega_d_khz", cfg.omega_d_khz},
               {"f_d", cfg.f_d},
               {"period_ms", p.code_to_ms(r0.period)},
               {"n_traj", cfg.n_traj},
               {"n_failed", ens.n_failed},
               {"seed", cfg.seed},
               {"epsilon_crit_code", crit.epsilon_crit},
               {"pump_factor", cfg.pump_factor},
               {"witness", cls.used_correlation ? "C" : "theta"},
               {"amplitude_floor", cls.amplitude_floor},
               {"theta_at_t0", [&] {
                  double s = 0.0;
                  for (const auto& r : ens.records) s += std::abs(r.theta[r.t0_index]);
                  return s / static_cast<double>(ens.records.size());
                }()},
               {"momentum_final", {{"k0", modes.k0}, {"k1", modes.k1}, {"residual", modes.residual}}}};
  std::ofstream(dir / "run.json") << meta.dump(2) << '\n';
  std::cout << classification_json(p, cls) << '\n';
  return 0;
}

std::vector<std::vector<double>> read_csv_columns(const fs::path& path,
                                                  const std::vector<std::string>& wanted) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<std::size_t> index;
  for (const auto& w : wanted) {
    const auto it = std::find(header.begin(), header.end(), w);
    if (it == header.end()) throw ConfigError(path.string() + ": missing column '" + w + "'");
    index.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  std::vector<std::vector<double>> cols(wanted.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    for (std::size_t k = 0; k < index.size(); ++k) {
      if (index[k] >= row.size()) throw ConfigError(path.string() + ": short row");
      cols[k].push_back(row[index[k]]);
    }
  }
  return cols;
}

int cmd_classify(const Common& common, const std::string& in_dir) {
  const auto cfg = load(common);
  const auto p = cfg.system();
  const fs::path dir(in_dir);
  std::ifstream meta_in(dir / "run.json");
  if (!meta_in) throw ConfigError("cannot read " + (dir / "run.json").string());
  const json meta = json::parse(meta_in);
  const bool theta_mode = meta.at("witness").get<std::string>() == "theta";
  const auto series = read_csv_columns(dir / (theta_mode ? "trajectory_0.csv" : "timeseries.csv"),
                                       {theta_mode ? "theta" : "C"});
  const auto spec_cols =
      read_csv_columns(dir / "theta_spectrum.csv", {"frequency_over_omega_d", "power"});
  PowerSpectrum spectrum;
  spectrum.frequency = spec_cols[0];
  spectrum.power = spec_cols[1];

  const double period = p.ms_to_code(meta.at("period_ms").get<double>());
  ClassifyOptions opt;
  if (!theta_mode && meta.contains("amplitude_floor")) {
    opt.amplitude_floor = meta.at("amplitude_floor").get<double>();
  }
  auto cls = classify_series(series[0], spectrum, meta.at("t0_index").get<std::size_t>(),
                             meta.at("samples_per_period").get<int>(), period,
                             meta.at("theta_at_t0").get<double>(),
                             theta_mode ? 1 : meta.at("n_traj").get<std::size_t>(), opt);
  cls.used_correlation = !theta_mode;
  cls.n_traj = meta.at("n_traj").get<std::size_t>();
  const auto text = classification_json(p, cls);
  if (!common.out_dir.empty()) std::ofstream(output_dir(common) / "classification.json") << text << '\n';
  std::cout << text << '\n';
  return 0;
}

int cmd_sweep(const Common& common, bool paper_scale, bool resume) {
  const auto cfg = load(common);
  SweepSpec spec = cfg.sweep_spec();
  if (paper_scale) {
    const auto ps = paper_scale_sweep();
    spec.fd_grid = ps.fd_grid;
    spec.wd_grid_khz = ps.wd_grid_khz;
    spec.n_traj = common.traj ? *common.traj : ps.n_traj;
    spec.drive_cycles = ps.drive_cycles;
    spec.settings.steps_per_period = ps.settings.steps_per_period;
  }
  SweepOptions opt;
  opt.out_dir = output_dir(common);
  opt.resume = resume;
  opt.threads = cfg.threads;
  const std::size_t total = spec.fd_grid.size() * spec.wd_grid_khz.size();
  std::size_t seen = 0;
  opt.on_cell = [&](const PhasePoint& c) {
    ++seen;
    std::cerr << "[" << seen << "] f_d=" << c.f_d << " omega_d=" << c.omega_d_khz << " kHz -> "
              << (c.valid ? to_string(c.label) : "invalid: " + c.error) << '\n';
  };
  const auto d = build_phase_diagram(spec, opt);
  std::cerr << d.cells_computed << " cells computed, " << total << " total, "
            << (d.complete ? "complete" : "incomplete") << '\n';
  std::cout << diagram_csv(d);
  return 0;
}

// "a:b:n" with n >= 2 evenly spaced points.
std::vector<double> parse_range(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string tok;
  try {
    while (std::getline(ss, tok, ':')) parts.push_back(std::stod(tok));
  } catch (const std::exception&) {
    throw ConfigError("range must look like a:b:n, got '" + text + "'");
  }
  if (parts.size() != 3 || parts[2] < 2 || std::trunc(parts[2]) != parts[2] || !(parts[1] > parts[0])) {
    throw ConfigError("range must look like a:b:n with a < b and integer n >= 2, got '" + text + "'");
  }
  const int n = static_cast<int>(parts[2]);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = parts[0] + (parts[1] - parts[0]) * i / (n - 1);
  return out;
}

int cmd_trap_coupling(const Common& common, const std::string& range) {
  std::ostringstream csv;
  csv << "b,vbar_over_erec_lambda\n" << std::setprecision(12);
  for (double b : parse_range(range)) {
    csv << b << ',' << vbar(TrapCoupling::from_b(b)) / kRecoilFreq << '\n';
  }
  if (!common.out_dir.empty()) std::ofstream(output_dir(common) / "trap_coupling.csv") << csv.str();
  std::cout << csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven-dissipative atom-cavity simulator"};
  app.require_subcommand(1);
  Common common;
  std::uint64_t seed = 0;
  std::size_t traj = 0;
  int threads = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "TOML config file")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out_dir, "Output directory");
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--traj", traj, "Trajectories per ensemble")->check(CLI::PositiveNumber);
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* gs = app.add_subcommand("ground-state", "Imaginary-time ground state of the trapped gas");
  auto* run = app.add_subcommand("run", "Ramp, hold and drive one ensemble, then classify it");
  bool mean_field = false;
  run->add_flag("--mean-field", mean_field, "Single noiseless trajectory with a seeded density wave");
  auto* sweep = app.add_subcommand("sweep", "Phase diagram over the (f_d, omega_d) grid");
  bool paper_scale = false, resume = false;
  sweep->add_flag("--paper-scale", paper_scale, "Full grid, 1000 trajectories, 200 cycles");
  sweep->add_flag("--resume", resume, "Reuse finished cells from --out");
  auto* cls = app.add_subcommand("classify", "Re-classify a saved run directory");
  std::string in_dir;
  cls->add_option("--in", in_dir, "Directory written by `run`")->required()->check(CLI::ExistingDirectory);
  auto* crit = app.add_subcommand("crit-pump", "Bisect the self-organization threshold");
  auto* trap = app.add_subcommand("trap-coupling", "Trap-induced coupling vbar(b) as CSV");
  std::string range;
  trap->add_option("--b-range", range, "a:b:n")->required();
  for (auto* sub : {gs, run, sweep, cls, crit, trap}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  for (auto* sub : {gs, run, sweep, cls, crit, trap}) {
    if (sub->count("--seed")) common.seed = seed;
    if (sub->count("--traj")) common.traj = traj;
    if (sub->count("--threads")) common.threads = threads;
  }

  try {
    if (*gs) return cmd_ground_state(common);
    if (*run) return cmd_run(common, mean_field);
    if (*sweep) return cmd_sweep(common, paper_scale, resume);
    if (*cls) return cmd_classify(common, in_dir);
    if (*crit) return cmd_crit_pump(common);
    if (*trap) return cmd_trap_coupling(common, range);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
