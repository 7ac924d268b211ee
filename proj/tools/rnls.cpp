// Command-line driver: run, ground-state, transform-check, lifespan,
// fit-rate, analyze, verify. Exit codes: 0 success/pass, 1 numerical
// failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "rnls/blowup_analysis.hpp"
#include "rnls/config.hpp"
#include "rnls/runner.hpp"
#include "rnls/verify.hpp"

namespace fs = std::filesystem;
using namespace rnls;

namespace {

int env_threads() {
  const char* env = std::getenv("RNLS_THREADS");
  if (!env) return 0;
  const int n = std::atoi(env);
  return n > 0 ? n : 0;
}

int print_checks(const std::vector<VerifyCheck>& checks, bool json) {
  bool ok = true;
  for (const auto& c : checks) {
    ok = ok && c.pass;
    if (json)
      std::printf("{\"check\": \"%s\", \"pass\": %s, \"detail\": \"%s\"}\n", c.name.c_str(),
                  c.pass ? "true" : "false", c.detail.c_str());
    else
      std::printf("%-38s %s   %s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL", c.detail.c_str());
  }
  return ok ? 0 : 1;
}

int cmd_run(const std::string& config_path, int threads_override, int snap_every_override,
            double remesh_c_override, int remesh_iters_override, bool quiet) {
  RunConfig cfg = load_config(config_path);
  if (threads_override > 0) cfg.threads = threads_override;
  else if (env_threads() > 0) cfg.threads = env_threads();
  if (snap_every_override >= 0) cfg.snap_every = snap_every_override;
  if (remesh_c_override > 0.0) cfg.shape_c = remesh_c_override;
  if (remesh_iters_override > 0) cfg.remesh_iters = remesh_iters_override;

  RunOutputs out = run_from_config(cfg, quiet);
  std::fprintf(stderr, "run finished: %s after %ld steps, t = %.6f, umax = %.3e\n",
               out.result.termination.c_str(), out.result.steps, out.result.t_final,
               out.result.umax_final);
  std::printf("{\"termination\": \"%s\", \"t_final\": %.17g, \"umax\": %.17g, \"steps\": %ld, \"diagnostics\": \"%s\"}\n",
              out.result.termination.c_str(), out.result.t_final, out.result.umax_final,
              out.result.steps, out.diagnostics_path.c_str());
  if (out.result.termination == "nonfinite") return 1;
  return 0;
}

int cmd_ground_state(int dim, double p, double tol, const std::string& csv_path, bool json) {
  RadialProfile prof = solve_ground_state(dim, p, tol);
  const double cgn = gn_constant(prof);
  if (json)
    std::printf("{\"massQ\": %.12g, \"gradQ\": %.12g, \"qmax\": %.12g, \"c_gn\": %.12g}\n",
                prof.massQ, prof.gradQ, prof.qmax, cgn);
  else {
    std::printf("massQ  = %.12g\n", prof.massQ);
    std::printf("gradQ  = %.12g\n", prof.gradQ);
    std::printf("qmax   = %.12g\n", prof.qmax);
    std::printf("c_GN   = %.12g\n", cgn);
  }
  if (!csv_path.empty()) {
    std::FILE* f = std::fopen(csv_path.c_str(), "wb");
    if (!f) {
      std::fprintf(stderr, "cannot write %s\n", csv_path.c_str());
      return 2;
    }
    std::fprintf(f, "r,q\n");
    for (std::size_t k = 0; k < prof.r.size(); ++k)
      std::fprintf(f, "%.17g,%.17g\n", prof.r[k], prof.q[k]);
    std::fclose(f);
  }
  return 0;
}

int cmd_lifespan(double T_free, double gamma, bool json) {
  LifespanVerdict v = map_lifespan(T_free, gamma);
  if (json) {
    if (v.finite())
      std::printf("{\"kind\": \"finite\", \"tstar\": %.17g, \"direction\": \"%s\"}\n", *v.tstar,
                  v.direction.c_str());
    else
      std::printf("{\"kind\": \"global\", \"direction\": \"%s\"}\n", v.direction.c_str());
  } else {
    if (v.finite())
      std::printf("finite blowup at t* = %.12g (%s potential)\n", *v.tstar, v.direction.c_str());
    else
      std::printf("global solution (%s potential)\n", v.direction.c_str());
  }
  return 0;
}

int cmd_fit_rate(const std::string& csv_path, double win_lo, double win_hi, bool json) {
  std::vector<DiagnosticsRow> rows = read_diagnostics_csv(csv_path);
  BlowupTimes bt = reconstruct_T(rows, "blowup_cap");  // requires a capped run
  std::vector<double> L(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) L[k] = rows[k].length_scale;
  RateFit fit = fit_rate(L, bt.time_to_blowup, bt.t_est, win_lo, win_hi);
  if (json)
    std::printf("{\"slope\": %.12g, \"intercept\": %.12g, \"residual\": %.6g, \"points\": %d, \"t_est\": %.12g}\n",
                fit.slope, fit.intercept, fit.residual, fit.points, fit.t_est);
  else {
    std::printf("T_est     = %.12g\n", fit.t_est);
    std::printf("slope     = %.6f\n", fit.slope);
    std::printf("intercept = %.6f\n", fit.intercept);
    std::printf("residual  = %.3e over %d points in [%g, %g]\n", fit.residual, fit.points,
                fit.window_lo, fit.window_hi);
  }
  return 0;
}

int cmd_analyze(const std::string& run_dir, double delta, bool /*json*/) {
  const fs::path dir(run_dir);
  std::vector<DiagnosticsRow> rows = read_diagnostics_csv((dir / "diag.csv").string());
  BlowupTimes bt = reconstruct_T(rows, "blowup_cap");
  const RadialProfile& prof = ground_state_cached(2, 3.0);

  std::vector<fs::path> snaps;
  const fs::path snapdir = dir / "snapshots";
  if (fs::exists(snapdir))
    for (const auto& e : fs::directory_iterator(snapdir))
      if (e.path().extension() == ".rnls") snaps.push_back(e.path());
  std::sort(snaps.begin(), snaps.end());

  for (const auto& path : snaps) {
    SnapshotMeta meta;
    ComplexField u = read_snapshot(path.string(), &meta);
    ProfileFit fit = compare_profile(u, prof);

    // time-to-blowup for this snapshot: nearest diagnostics row
    double s_blow = 0.0;
    double best = 1e300;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const double d = std::abs(rows[k].t - meta.t);
      if (d < best) {
        best = d;
        s_blow = bt.time_to_blowup[k];
      }
    }
    double captured = 0.0, loglog = 0.0, radius = 0.0;
    if (s_blow > 0.0) {
      try {
        ConcentrationWindow win = mass_window(u, delta, s_blow);
        captured = win.captured;
        radius = win.radius;
        Norms nm = norms(u);
        loglog = loglog_functional_value(nm.grad_l2, s_blow, prof.gradQ);
      } catch (const DomainError&) {
        // too far from blowup for the double-log; leave zeros
      }
    }
    std::printf("{\"snapshot\": \"%s\", \"t\": %.12g, \"lambda\": %.6g, \"residual\": %.6g, "
                "\"captured_mass\": %.6g, \"window\": %.6g, \"loglog_value\": %.6g}\n",
                path.filename().string().c_str(), meta.t, fit.lambda, fit.residual, captured,
                radius, loglog);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotational NLS blowup simulator and verification kit"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "machine-readable output on stdout");

  // run
  auto* run_cmd = app.add_subcommand("run", "time-integrate a configuration file");
  std::string config_path;
  int threads = 0, snap_every = -1, remesh_iters = 0;
  double remesh_c = 0.0;
  bool quiet = false;
  run_cmd->add_option("config", config_path, "config file (toml subset)")->required();
  run_cmd->add_option("--threads", threads, "worker threads (env RNLS_THREADS as fallback)");
  run_cmd->add_option("--snap-every", snap_every, "extra snapshot cadence in steps");
  run_cmd->add_option("--remesh-c", remesh_c, "shape criterion constant");
  run_cmd->add_option("--remesh-iters", remesh_iters, "mesh solver sweeps per level");
  run_cmd->add_flag("--quiet", quiet, "suppress progress lines");

  // ground-state
  auto* gs_cmd = app.add_subcommand("ground-state", "solve the radial ground state");
  int gs_dim = 2;
  double gs_p = 3.0, gs_tol = 1e-9;
  std::string gs_csv;
  gs_cmd->add_option("--dim", gs_dim, "dimension (1..12)");
  gs_cmd->add_option("--p", gs_p, "nonlinearity power");
  gs_cmd->add_option("--tol", gs_tol, "solver tolerance");
  gs_cmd->add_option("--csv", gs_csv, "write the (r, q) profile to this file");

  // transform-check
  auto* tc_cmd = app.add_subcommand("transform-check", "lens-transform residual and norm suites");
  TransformSuiteOptions tc_opt;
  tc_cmd->add_option("--gamma", tc_opt.gamma, "potential coefficient (negative)");
  tc_cmd->add_option("--T", tc_opt.T_free, "free lifespan for the verdict check");
  tc_cmd->add_option("--grid", tc_opt.grid, "fine grid size for the residual order");

  // lifespan
  auto* ls_cmd = app.add_subcommand("lifespan", "map a free lifespan through the lens transform");
  double ls_T = 1.0, ls_gamma = -1.0;
  ls_cmd->add_option("--T", ls_T, "free-equation maximal time")->required();
  ls_cmd->add_option("--gamma", ls_gamma, "potential coefficient")->required();

  // fit-rate
  auto* fr_cmd = app.add_subcommand("fit-rate", "fit the blowup rate from a diagnostics csv");
  std::string fr_csv;
  std::vector<double> fr_window;
  fr_cmd->add_option("csv", fr_csv, "diagnostics csv from a capped run")->required();
  fr_cmd->add_option("--window", fr_window, "T-t fit window, two values")->expected(2);

  // analyze
  auto* an_cmd = app.add_subcommand("analyze", "profile/concentration report over snapshots");
  std::string an_dir;
  double an_delta = 0.25;
  an_cmd->add_option("dir", an_dir, "run output directory")->required();
  an_cmd->add_option("--delta", an_delta, "concentration window exponent in (0, 1/2)");

  // verify
  auto* vf_cmd = app.add_subcommand("verify", "run the self-verification suites");
  bool vf_quick = false;
  vf_cmd->add_flag("--quick", vf_quick, "synthetic oracles and identities only");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(config_path, threads, snap_every, remesh_c, remesh_iters, quiet);
    if (*gs_cmd) return cmd_ground_state(gs_dim, gs_p, gs_tol, gs_csv, json);
    if (*tc_cmd) return print_checks(verify_transforms(tc_opt), json);
    if (*ls_cmd) return cmd_lifespan(ls_T, ls_gamma, json);
    if (*fr_cmd)
      return cmd_fit_rate(fr_csv, fr_window.size() == 2 ? fr_window[0] : 1e-5,
                          fr_window.size() == 2 ? fr_window[1] : 1e-2, json);
    if (*an_cmd) return cmd_analyze(an_dir, an_delta, json);
    if (*vf_cmd) {
      std::vector<VerifyCheck> checks = verify_quick();
      if (!vf_quick) {
        std::vector<VerifyCheck> more = verify_transforms();
        checks.insert(checks.end(), more.begin(), more.end());
      }
      return print_checks(checks, json);
    }
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return 2;
}
