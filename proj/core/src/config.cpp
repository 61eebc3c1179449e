#include "cavitydtc/config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include <toml.hpp>

#include "cavitydtc/errors.hpp"
#include "cavitydtc/field.hpp"

namespace cavitydtc {

namespace {

[[noreturn]] void fail(const toml::node& node, const std::string& what) {
  throw ConfigError("config line " + std::to_string(node.source().begin.line) + ": " + what);
}

/// Reads typed values out of one parsed document and rejects keys nobody asked for.
class Binder {
 public:
  explicit Binder(const toml::table& root) : root_(root) {}

  void number(const std::string& section, const std::string& key, double& dst) {
    if (const auto* n = find(section, key)) {
      const auto v = n->value<double>();
      if (!v || !(n->is_floating_point() || n->is_integer())) fail(*n, key + " must be a number");
      dst = *v;
    }
  }
  template <class Int>
  void integer(const std::string& section, const std::string& key, Int& dst) {
    if (const auto* n = find(section, key)) {
      const auto* v = n->as_integer();
      if (!v) fail(*n, key + " must be an integer");
      const std::int64_t x = v->get();
      if (x < 0 || x > std::numeric_limits<int>::max()) fail(*n, key + " is out of range");
      dst = static_cast<Int>(x);
    }
  }
  void flag(const std::string& section, const std::string& key, bool& dst) {
    if (const auto* n = find(section, key)) {
      const auto* v = n->as_boolean();
      if (!v) fail(*n, key + " must be true or false");
      dst = v->get();
    }
  }
  void list(const std::string& section, const std::string& key, std::vector<double>& dst) {
    if (const auto* n = find(section, key)) {
      const auto* arr = n->as_array();
      if (!arr) fail(*n, key + " must be an array of numbers");
      dst.clear();
      for (const auto& item : *arr) {
        const auto v = item.value<double>();
        if (!v) fail(item, key + " must contain only numbers");
        dst.push_back(*v);
      }
    }
  }
  [[nodiscard]] bool has(const std::string& section, const std::string& key) const {
    const auto* t = root_[section].as_table();
    return t && t->contains(key);
  }

  void finish() const {
    for (const auto& [section, node] : root_) {
      const std::string name(section.str());
      const auto* t = node.as_table();
      if (!t) fail(node, "top-level key '" + name + "' must be a [section]");
      for (const auto& [key, value] : *t) {
        const std::string full = name + "." + std::string(key.str());
        if (!used_.count(full)) fail(value, "unknown key '" + full + "'");
      }
    }
  }

 private:
  const toml::node* find(const std::string& section, const std::string& key) {
    used_.insert(section + "." + key);
    const auto* t = root_[section].as_table();
    return t ? t->get(key) : nullptr;
  }

  const toml::table& root_;
  std::set<std::string> used_;
};

}  // namespace

SystemParams SimulationConfig::system() const {
  SystemParams p;
  p.n_atoms = n_atoms;
  p.recoil_freq_si = 2.0 * kPi * recoil_freq_khz * 1e3;
  if (!(p.recoil_freq_si > 0)) throw ConfigError("recoil frequency must be > 0");
  p.kappa = p.khz_to_code(kappa_khz);
  p.u0 = p.hz_to_code(u0_hz);
  p.delta_eff = p.khz_to_code(delta_eff_khz);
  p = set_osc_energy(set_interaction_energy(p, e_int_over_e_rec), e_osc_over_e_rec);
  p.validate();
  return p;
}

SweepSpec SimulationConfig::sweep_spec() const {
  SweepSpec s;
  s.fd_grid = fd_grid;
  s.wd_grid_khz = wd_grid_khz;
  s.e_int_over_e_rec = e_int_over_e_rec;
  s.e_osc_over_e_rec = e_osc_over_e_rec;
  s.n_traj = n_traj;
  s.master_seed = seed;
  s.drive_cycles = drive_cycles;
  s.pump_factor = pump_factor;
  s.n_cells = n_cells;
  s.points_per_cell = points_per_cell;
  s.base = system();
  s.settings = settings;
  s.crit = crit;
  s.crit.ramp_ms = ramp_ms;
  s.crit.hold_end_ms = hold_end_ms;
  return s;
}

PumpSchedule SimulationConfig::schedule(double epsilon_crit) const {
  return make_schedule(system(), pump_factor * epsilon_crit, f_d, omega_d_khz, drive_cycles, ramp_ms,
                       hold_end_ms);
}

void SimulationConfig::validate() const {
  (void)system();
  (void)make_grid(n_cells, points_per_cell);
  settings.validate();
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (!(pump_factor > 0)) throw ConfigError("pump_factor must be > 0");
  if (!(f_d >= 0 && f_d <= 1)) throw ConfigError("f_d must lie in [0, 1]");
  if (!(omega_d_khz > 0)) throw ConfigError("omega_d_khz must be > 0");
  if (drive_cycles < 1) throw ConfigError("drive cycles must be >= 1");
  if (!(ramp_ms > 0 && hold_end_ms > ramp_ms)) throw ConfigError("need 0 < ramp_ms < hold_end_ms");
}

SimulationConfig parse_config(std::string_view text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ConfigError("config line " + std::to_string(e.source().begin.line) + ": " +
                      std::string(e.description()));
  }
  SimulationConfig c;
  Binder b(root);
  b.number("system", "n_atoms", c.n_atoms);
  b.number("system", "recoil_freq_khz", c.recoil_freq_khz);
  b.number("system", "kappa_khz", c.kappa_khz);
  b.number("system", "u0_hz", c.u0_hz);
  b.number("system", "delta_eff_khz", c.delta_eff_khz);
  b.number("system", "e_int_over_e_rec", c.e_int_over_e_rec);
  b.number("system", "e_osc_over_e_rec", c.e_osc_over_e_rec);
  if (b.has("system", "osc_length_lambda")) {
    if (b.has("system", "e_osc_over_e_rec")) {
      throw ConfigError("set either system.osc_length_lambda or system.e_osc_over_e_rec, not both");
    }
    double lz = 0.0;
    b.number("system", "osc_length_lambda", lz);
    c.e_osc_over_e_rec = derive_scales(set_osc_length(SystemParams{}, lz)).b;
  }

  b.integer("grid", "n_cells", c.n_cells);
  b.integer("grid", "points_per_cell", c.points_per_cell);

  b.number("drive", "pump_factor", c.pump_factor);
  b.number("drive", "f_d", c.f_d);
  b.number("drive", "omega_d_khz", c.omega_d_khz);
  b.integer("drive", "cycles", c.drive_cycles);
  b.number("drive", "ramp_ms", c.ramp_ms);
  b.number("drive", "hold_end_ms", c.hold_end_ms);

  b.integer("run", "samples_per_period", c.settings.samples_per_period);
  b.integer("run", "steps_per_period", c.settings.steps_per_period);
  b.integer("run", "splitting_order", c.settings.splitting_order);
  b.flag("run", "noise", c.settings.noise_on);
  b.flag("run", "wigner_sampling", c.settings.wigner_sampling_on);
  b.number("run", "seed_amplitude", c.settings.seed_amplitude);
  b.integer("run", "n_traj", c.n_traj);
  b.integer("run", "seed", c.seed);
  b.integer("run", "threads", c.threads);

  b.list("sweep", "fd_grid", c.fd_grid);
  b.list("sweep", "omega_d_khz_grid", c.wd_grid_khz);

  b.number("crit_pump", "dt", c.crit.dt);
  b.number("crit_pump", "theta_threshold", c.crit.theta_threshold);
  b.number("crit_pump", "rel_tol", c.crit.rel_tol);
  b.number("crit_pump", "readout_window_ms", c.crit.readout_window_ms);
  b.finish();
  c.validate();
  return c;
}

SimulationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace cavitydtc
