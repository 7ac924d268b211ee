#pragma once

// Run configuration: a flat-sectioned key-value text format (TOML subset:
// [section], key = value with numbers, booleans, quoted strings and numeric
// lists), canonical serialization, config hashing, the run manifest, and the
// diagnostics CSV format.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rnls/errors.hpp"
#include "rnls/evolution.hpp"
#include "rnls/field.hpp"
#include "rnls/ground_state.hpp"
#include "rnls/snapshot.hpp"

namespace rnls {

// ---------------------------------------------------------------------------
// Config model

struct InitialData {
  std::string type = "gaussian";  // gaussian | ground-state-rescaled | file
  // gaussian: amplitude * exp(-ax (x-cx)^2 - ay (y-cy)^2)
  double amplitude = 1.0;
  double ax = 1.0;
  double ay = 1.0;
  double center_x = 0.0;
  double center_y = 0.0;
  // ground-state-rescaled: c * lambda^(-1) Q(|x|/lambda)
  double c = 1.0;
  double lambda = 1.0;
  // file
  std::string path;
};

struct RunConfig {
  SimParams sim;
  InitialData initial;
  int nx = 512;
  int ny = 512;
  double half_width = 6.0;
  double dt0 = 0.05;
  double cfl = 0.35;
  double cap = 1e6;
  double t_end = 0.0;  // 0 disables the time stop
  int snap_every = 0;  // extra snapshot cadence in steps; 0 = doublings only
  bool remesh = true;
  double monitor_gain = 0.05;
  double expand_cap = 2.5;
  int smooth_passes = 4;
  int remesh_iters = 60;
  double shape_c = 5.0;
  double resolve_jump = 0.03;
  double trigger_growth = 1.3;
  std::string outdir = "out";
  int threads = 1;
};

// ---------------------------------------------------------------------------
// Parsing

namespace cfgdetail {

struct Value {
  std::string raw;
  int line = 0;
};

using Sections = std::map<std::string, std::map<std::string, Value>>;

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline Sections tokenize(const std::string& text, std::vector<std::string>& errors) {
  Sections out;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back("line " + std::to_string(lineno) + ": unterminated section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": empty key or value");
      continue;
    }
    if (out[section].count(key))
      errors.push_back("line " + std::to_string(lineno) + ": duplicate key " + section + "." + key);
    out[section][key] = Value{val, lineno};
  }
  return out;
}

struct Reader {
  Sections sections;
  std::vector<std::string>* errors;
  std::map<std::string, bool> consumed;

  bool has(const std::string& sec, const std::string& key) {
    auto s = sections.find(sec);
    return s != sections.end() && s->second.count(key) > 0;
  }

  std::string take(const std::string& sec, const std::string& key) {
    consumed[sec + "." + key] = true;
    return sections[sec][key].raw;
  }

  double number(const std::string& sec, const std::string& key, double fallback) {
    if (!has(sec, key)) return fallback;
    const std::string raw = take(sec, key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(raw, &pos);
      if (pos != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (...) {
      errors->push_back(sec + "." + key + ": not a number: " + raw);
      return fallback;
    }
  }

  int integer(const std::string& sec, const std::string& key, int fallback) {
    const double v = number(sec, key, fallback);
    if (v != std::floor(v)) errors->push_back(sec + "." + key + ": expected an integer");
    return static_cast<int>(v);
  }

  bool boolean(const std::string& sec, const std::string& key, bool fallback) {
    if (!has(sec, key)) return fallback;
    const std::string raw = take(sec, key);
    if (raw == "true") return true;
    if (raw == "false") return false;
    errors->push_back(sec + "." + key + ": expected true or false: " + raw);
    return fallback;
  }

  std::string text(const std::string& sec, const std::string& key, const std::string& fallback) {
    if (!has(sec, key)) return fallback;
    std::string raw = take(sec, key);
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"')
      return raw.substr(1, raw.size() - 2);
    errors->push_back(sec + "." + key + ": expected a quoted string: " + raw);
    return fallback;
  }

  std::vector<double> list(const std::string& sec, const std::string& key,
                           std::vector<double> fallback) {
    if (!has(sec, key)) return fallback;
    std::string raw = take(sec, key);
    if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') {
      errors->push_back(sec + "." + key + ": expected [a, b, ...]: " + raw);
      return fallback;
    }
    std::vector<double> out;
    std::string body = raw.substr(1, raw.size() - 2);
    std::istringstream in(body);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      try {
        out.push_back(std::stod(item));
      } catch (...) {
        errors->push_back(sec + "." + key + ": bad list entry: " + item);
      }
    }
    return out;
  }

  void check_unknown() {
    for (const auto& [sec, keys] : sections)
      for (const auto& [key, val] : keys)
        if (!consumed.count(sec + "." + key))
          errors->push_back("unknown key " + (sec.empty() ? key : sec + "." + key) + " (line " +
                            std::to_string(val.line) + ")");
  }
};

}  // namespace cfgdetail

inline RunConfig parse_config(const std::string& text) {
  std::vector<std::string> errors;
  cfgdetail::Reader reader{cfgdetail::tokenize(text, errors), &errors, {}};
  RunConfig cfg;

  cfg.sim.dim = 2;
  cfg.sim.p = reader.number("equation", "p", cfg.sim.p);
  cfg.sim.gamma = reader.number("equation", "gamma", cfg.sim.gamma);
  cfg.sim.kappa = reader.number("equation", "kappa", cfg.sim.kappa);
  cfg.sim.mu = reader.number("equation", "mu", cfg.sim.mu);
  cfg.sim.omega = reader.list("equation", "omega", cfg.sim.omega);

  cfg.initial.type = reader.text("initial", "type", cfg.initial.type);
  cfg.initial.amplitude = reader.number("initial", "amplitude", cfg.initial.amplitude);
  cfg.initial.ax = reader.number("initial", "ax", cfg.initial.ax);
  cfg.initial.ay = reader.number("initial", "ay", cfg.initial.ay);
  cfg.initial.center_x = reader.number("initial", "center_x", cfg.initial.center_x);
  cfg.initial.center_y = reader.number("initial", "center_y", cfg.initial.center_y);
  cfg.initial.c = reader.number("initial", "c", cfg.initial.c);
  cfg.initial.lambda = reader.number("initial", "lambda", cfg.initial.lambda);
  cfg.initial.path = reader.text("initial", "path", cfg.initial.path);

  cfg.nx = reader.integer("grid", "nx", cfg.nx);
  cfg.ny = reader.integer("grid", "ny", cfg.ny);
  cfg.half_width = reader.number("grid", "half_width", cfg.half_width);

  cfg.dt0 = reader.number("time", "dt0", cfg.dt0);
  cfg.cfl = reader.number("time", "cfl", cfg.cfl);
  cfg.cap = reader.number("time", "cap", cfg.cap);
  cfg.t_end = reader.number("time", "t_end", cfg.t_end);

  cfg.remesh = reader.boolean("remesh", "enabled", cfg.remesh);
  cfg.monitor_gain = reader.number("remesh", "monitor_gain", cfg.monitor_gain);
  cfg.expand_cap = reader.number("remesh", "expand_cap", cfg.expand_cap);
  cfg.smooth_passes = reader.integer("remesh", "smooth_passes", cfg.smooth_passes);
  cfg.remesh_iters = reader.integer("remesh", "iters", cfg.remesh_iters);
  cfg.shape_c = reader.number("remesh", "shape_c", cfg.shape_c);
  cfg.resolve_jump = reader.number("remesh", "resolve_jump", cfg.resolve_jump);
  cfg.trigger_growth = reader.number("remesh", "trigger_growth", cfg.trigger_growth);

  cfg.outdir = reader.text("output", "dir", cfg.outdir);
  cfg.snap_every = reader.integer("output", "snap_every", cfg.snap_every);
  cfg.threads = reader.integer("output", "threads", cfg.threads);

  reader.check_unknown();

  // semantic validation, collecting every problem
  if (cfg.initial.type != "gaussian" && cfg.initial.type != "ground-state-rescaled" &&
      cfg.initial.type != "file")
    errors.push_back("initial.type: must be gaussian, ground-state-rescaled or file");
  if (cfg.initial.type == "gaussian" && !(cfg.initial.amplitude > 0.0))
    errors.push_back("initial.amplitude: must be positive");
  if (cfg.initial.type == "file") {
    std::ifstream probe(cfg.initial.path, std::ios::binary);
    if (!probe.good()) errors.push_back("initial.path: file not found: " + cfg.initial.path);
  }
  if (cfg.nx < 16 || cfg.ny < 16 || cfg.nx % 2 || cfg.ny % 2)
    errors.push_back("grid.nx/ny: must be even and at least 16");
  if (!(cfg.half_width > 0.0)) errors.push_back("grid.half_width: must be positive");
  if (!(cfg.dt0 > 0.0)) errors.push_back("time.dt0: must be positive");
  if (!(cfg.cap > 0.0)) errors.push_back("time.cap: must be positive");
  try {
    cfg.sim.validate();
  } catch (const Error& e) {
    errors.push_back(std::string("equation: ") + e.what());
  }

  if (!errors.empty()) throw SchemaError(errors);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw IoError("cannot read config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// Canonical serialization: fixed section/key order, full float precision.
inline std::string serialize_config(const RunConfig& cfg) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string out;
  out += "[equation]\n";
  out += "p = " + num(cfg.sim.p) + "\n";
  out += "gamma = " + num(cfg.sim.gamma) + "\n";
  out += "kappa = " + num(cfg.sim.kappa) + "\n";
  out += "mu = " + num(cfg.sim.mu) + "\n";
  out += "omega = [";
  for (std::size_t k = 0; k < cfg.sim.omega.size(); ++k)
    out += (k ? ", " : "") + num(cfg.sim.omega[k]);
  out += "]\n\n[initial]\n";
  out += "type = \"" + cfg.initial.type + "\"\n";
  if (cfg.initial.type == "gaussian") {
    out += "amplitude = " + num(cfg.initial.amplitude) + "\n";
    out += "ax = " + num(cfg.initial.ax) + "\n";
    out += "ay = " + num(cfg.initial.ay) + "\n";
    out += "center_x = " + num(cfg.initial.center_x) + "\n";
    out += "center_y = " + num(cfg.initial.center_y) + "\n";
  } else if (cfg.initial.type == "ground-state-rescaled") {
    out += "c = " + num(cfg.initial.c) + "\n";
    out += "lambda = " + num(cfg.initial.lambda) + "\n";
  } else {
    out += "path = \"" + cfg.initial.path + "\"\n";
  }
  out += "\n[grid]\n";
  out += "nx = " + std::to_string(cfg.nx) + "\n";
  out += "ny = " + std::to_string(cfg.ny) + "\n";
  out += "half_width = " + num(cfg.half_width) + "\n";
  out += "\n[time]\n";
  out += "dt0 = " + num(cfg.dt0) + "\n";
  out += "cfl = " + num(cfg.cfl) + "\n";
  out += "cap = " + num(cfg.cap) + "\n";
  out += "t_end = " + num(cfg.t_end) + "\n";
  out += "\n[remesh]\n";
  out += std::string("enabled = ") + (cfg.remesh ? "true" : "false") + "\n";
  out += "monitor_gain = " + num(cfg.monitor_gain) + "\n";
  out += "expand_cap = " + num(cfg.expand_cap) + "\n";
  out += "smooth_passes = " + std::to_string(cfg.smooth_passes) + "\n";
  out += "iters = " + std::to_string(cfg.remesh_iters) + "\n";
  out += "shape_c = " + num(cfg.shape_c) + "\n";
  out += "resolve_jump = " + num(cfg.resolve_jump) + "\n";
  out += "trigger_growth = " + num(cfg.trigger_growth) + "\n";
  out += "\n[output]\n";
  out += "dir = \"" + cfg.outdir + "\"\n";
  out += "snap_every = " + std::to_string(cfg.snap_every) + "\n";
  out += "threads = " + std::to_string(cfg.threads) + "\n";
  return out;
}

inline std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string s = serialize_config(cfg);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Diagnostics CSV, columns pinned:
// t,dt,mass,energy,E0,ellOmega,J,Jprime,umax,gradl2,L,remesh

inline const char* diagnostics_header() {
  return "t,dt,mass,energy,E0,ellOmega,J,Jprime,umax,gradl2,L,remesh";
}

inline std::string format_diagnostics_row(const DiagnosticsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d", r.t, r.dt,
                r.mass, r.energy, r.e0, r.ell_omega, r.j_moment, r.j_prime, r.umax, r.grad_l2,
                r.length_scale, r.remesh);
  return buf;
}

inline void write_diagnostics_csv(const std::string& path, const std::vector<DiagnosticsRow>& rows) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-identical across platforms
  if (!out.good()) throw IoError("cannot write " + path);
  out << diagnostics_header() << "\n";
  for (const auto& r : rows) out << format_diagnostics_row(r) << "\n";
}

inline std::vector<DiagnosticsRow> read_diagnostics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw IoError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty diagnostics file " + path);
  if (line != diagnostics_header()) throw IoError("unexpected diagnostics header in " + path);
  std::vector<DiagnosticsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    DiagnosticsRow r;
    int remesh = 0;
    const int got = std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%d",
                                &r.t, &r.dt, &r.mass, &r.energy, &r.e0, &r.ell_omega, &r.j_moment,
                                &r.j_prime, &r.umax, &r.grad_l2, &r.length_scale, &remesh);
    if (got != 12) throw IoError("malformed diagnostics row in " + path + ": " + line);
    r.remesh = remesh;
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Run manifest, written atomically (tmp + rename), also on error paths.

struct RunManifest {
  std::uint64_t config_hash = 0;
  std::string code_version = "rnls 1.0.0";
  std::string started_at;
  std::string ended_at;
  std::string termination = "not_started";
  double t_est = 0.0;
  double final_umax = 0.0;
  long steps = 0;
  std::vector<RemeshEvent> remesh_events;
  std::vector<std::string> warnings;
};

inline std::string utc_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

inline void write_manifest(const std::string& path, const RunManifest& m) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out.good()) throw IoError("cannot write " + tmp);
    char buf[256];
    out << "{\n";
    std::snprintf(buf, sizeof buf, "  \"config_hash\": \"%016" PRIx64 "\",\n", m.config_hash);
    out << buf;
    out << "  \"code_version\": \"" << json_escape(m.code_version) << "\",\n";
    out << "  \"started_at\": \"" << m.started_at << "\",\n";
    out << "  \"ended_at\": \"" << m.ended_at << "\",\n";
    out << "  \"termination\": \"" << json_escape(m.termination) << "\",\n";
    std::snprintf(buf, sizeof buf, "  \"t_est\": %.17g,\n  \"final_umax\": %.17g,\n  \"steps\": %ld,\n",
                  m.t_est, m.final_umax, m.steps);
    out << buf;
    out << "  \"remesh_events\": [";
    for (std::size_t k = 0; k < m.remesh_events.size(); ++k) {
      const auto& e = m.remesh_events[k];
      std::snprintf(buf, sizeof buf, "%s{\"t\": %.17g, \"step\": %ld, \"mass_rel_change\": %.6g, \"cycles\": %d}",
                    k ? ", " : "", e.t, e.step, e.mass_rel_change, e.cycles);
      out << buf;
    }
    out << "],\n  \"warnings\": [";
    for (std::size_t k = 0; k < m.warnings.size(); ++k)
      out << (k ? ", " : "") << '"' << json_escape(m.warnings[k]) << '"';
    out << "]\n}\n";
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw IoError("cannot move manifest into place");
}

// ---------------------------------------------------------------------------
// Initial data assembly

inline ComplexField build_initial_data(const RunConfig& cfg, MeshPtr mesh = nullptr) {
  Grid2D grid(cfg.nx, cfg.ny, cfg.half_width);
  if (cfg.initial.type == "gaussian") {
    const InitialData& d = cfg.initial;
    return sample_field(grid, mesh, [&](double x, double y) {
      const double dx = x - d.center_x, dy = y - d.center_y;
      return Complex(d.amplitude * std::exp(-d.ax * dx * dx - d.ay * dy * dy), 0.0);
    });
  }
  if (cfg.initial.type == "ground-state-rescaled") {
    const RadialProfile& prof = ground_state_cached(2, cfg.sim.p);
    const double c = cfg.initial.c, lambda = cfg.initial.lambda;
    return sample_field(grid, mesh, [&](double x, double y) {
      return Complex(c / lambda * prof.value(std::hypot(x, y) / lambda), 0.0);
    });
  }
  SnapshotMeta meta;
  ComplexField f = read_snapshot(cfg.initial.path, &meta);
  if (!(f.grid == grid)) throw Error("snapshot grid does not match config grid");
  if (mesh) throw Error("file initial data cannot be resampled on an adapted mesh");
  return f;
}

// Adapt the mesh to the analytic initial data before stepping: each pass
// redistributes against the current samples and re-samples the closed form
// on the new mesh, so the starting state carries no transfer error.
inline ComplexField preadapted_initial_data(const RunConfig& cfg, const AdaptOptions& aopt) {
  ComplexField u = build_initial_data(cfg);
  if (!cfg.remesh || cfg.initial.type == "file") return u;
  MeshPtr mesh = u.mesh_or_identity();
  u.mesh = mesh;
  for (int pass = 0; pass < 4; ++pass) {
    if (max_cell_jump(u) <= aopt.resolve_jump && shape_ratio(u) <= aopt.shape_c) break;
    MonitorField mon = compute_monitor(u, aopt.monitor);
    MeshPtr next;
    try {
      next = std::make_shared<const MeshMap>(redistribute(*mesh, mon, aopt.solve));
    } catch (const MeshTangled&) {
      break;
    }
    mesh = next;
    u = build_initial_data(cfg, mesh);
  }
  return u;
}

}  // namespace rnls
