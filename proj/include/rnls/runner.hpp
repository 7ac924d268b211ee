#pragma once

// Run orchestration shared by the CLI and the tests: builds the initial
// data, drives the time loop, writes diagnostics, snapshots and the manifest
// (the manifest is written even when the run dies).

#include <filesystem>
#include <string>

#include "rnls/config.hpp"
#include "rnls/parallel.hpp"

namespace rnls {

struct RunOutputs {
  RunResult result;
  RunConfig config;
  std::string diagnostics_path;
  std::string manifest_path;
  std::vector<std::string> snapshot_paths;
};

inline RunOptions options_from_config(const RunConfig& cfg) {
  RunOptions opt;
  opt.dt.dt0 = cfg.dt0;
  opt.dt.cfl_c = cfg.cfl;
  opt.cap = cfg.cap;
  if (cfg.t_end > 0.0) opt.t_end = cfg.t_end;
  opt.remesh = cfg.remesh;
  opt.adapt.monitor.gain = cfg.monitor_gain;
  opt.adapt.monitor.expand_cap = cfg.expand_cap;
  opt.adapt.monitor.smooth_passes = cfg.smooth_passes;
  opt.adapt.solve.iters = cfg.remesh_iters;
  opt.adapt.shape_c = cfg.shape_c;
  opt.adapt.resolve_jump = cfg.resolve_jump;
  opt.trigger_jump_growth = cfg.trigger_growth;
  opt.shape_c = cfg.shape_c;
  return opt;
}

inline RunOutputs run_from_config(const RunConfig& cfg, bool quiet = true) {
  namespace fs = std::filesystem;
  set_threads(cfg.threads);
  fs::create_directories(cfg.outdir);
  fs::create_directories(fs::path(cfg.outdir) / "snapshots");

  RunOutputs out;
  out.config = cfg;
  out.diagnostics_path = (fs::path(cfg.outdir) / "diag.csv").string();
  out.manifest_path = (fs::path(cfg.outdir) / "manifest.json").string();

  RunManifest manifest;
  manifest.config_hash = config_hash(cfg);
  manifest.started_at = utc_now();
  write_manifest(out.manifest_path, manifest);  // records the attempt up front

  SnapshotMeta meta;
  meta.gamma = cfg.sim.gamma;
  meta.p = cfg.sim.p;
  meta.kappa = cfg.sim.kappa;

  RunOptions opt = options_from_config(cfg);
  int snap_index = 0;
  opt.on_snapshot = [&](const SimState& s, const char* reason) {
    char name[64];
    std::snprintf(name, sizeof name, "snap_%04d.rnls", snap_index++);
    const std::string path = (fs::path(cfg.outdir) / "snapshots" / name).string();
    SnapshotMeta m = meta;
    m.t = s.t;
    ComplexField with_mesh = s.u;
    with_mesh.mesh = s.mesh;
    write_snapshot(path, with_mesh, m);
    out.snapshot_paths.push_back(path);
    (void)reason;
  };
  long next_cadence = cfg.snap_every > 0 ? cfg.snap_every : -1;
  opt.on_step = [&](const SimState& s, const DiagnosticsRow& row) {
    if (next_cadence > 0 && s.step >= next_cadence) {
      opt.on_snapshot(s, "cadence");
      next_cadence += cfg.snap_every;
    }
    if (!quiet && s.step % 200 == 0)
      std::fprintf(stderr, "t=%.6f dt=%.3e umax=%.3e mass=%.8f\n", row.t, row.dt, row.umax,
                   row.mass);
  };

  try {
    ComplexField u0 = preadapted_initial_data(cfg, opt.adapt);
    out.result = run(cfg.sim, u0, opt);
    manifest.termination = out.result.termination;
    manifest.t_est = out.result.t_final;
    manifest.final_umax = out.result.umax_final;
    manifest.steps = out.result.steps;
    manifest.remesh_events = out.result.remesh_events;
    for (const auto& ev : out.result.remesh_events)
      if (ev.mass_rel_change > 1e-6)
        manifest.warnings.push_back("remesh at t=" + std::to_string(ev.t) +
                                    " changed mass by " + std::to_string(ev.mass_rel_change));
    write_diagnostics_csv(out.diagnostics_path, out.result.rows);
  } catch (const std::exception& e) {
    manifest.termination = std::string("error: ") + e.what();
    manifest.ended_at = utc_now();
    write_manifest(out.manifest_path, manifest);
    throw;
  }
  manifest.ended_at = utc_now();
  write_manifest(out.manifest_path, manifest);
  return out;
}

}  // namespace rnls
