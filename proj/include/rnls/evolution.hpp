#pragma once

// Time integration of
//   i u_t = -kappa Lap u + sgn(gamma) gamma^2 |x|^2 u + mu |u|^(p-1) u + i (Mx).grad u
// by classical RK4 on the (possibly adapted) mesh, with the amplitude-adaptive
// time step, per-step conservation/virial diagnostics, and the remesh loop.

#include <algorithm>
#include <cmath>
#include <atomic>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rnls/fd_ops.hpp"
#include "rnls/field.hpp"
#include "rnls/mesh_adapt.hpp"
#include "rnls/parallel.hpp"
#include "rnls/rotation.hpp"

namespace rnls {

struct SimState {
  ComplexField u;
  MeshPtr mesh;
  double t = 0.0;
  long step = 0;
  double last_dt = 0.0;
};

struct DiagnosticsRow {
  double t = 0.0;
  double dt = 0.0;
  double mass = 0.0;
  double energy = 0.0;     // E = kappa ||grad u||^2 + int V |u|^2 + ell + 2 mu/(p+1) ||u||_{p+1}^{p+1}
  double e0 = 0.0;         // ||grad u||^2 - n/(n+2) ||u||_{2+4/n}^{2+4/n}
  double ell_omega = 0.0;  // Re i int conj(u) (Mx).grad u
  double j_moment = 0.0;   // int |x|^2 |u|^2
  double j_prime = 0.0;    // 4 Im int x conj(u).grad u
  double umax = 0.0;
  double grad_l2 = 0.0;
  double length_scale = 0.0;  // 1 / ||grad u||_2
  int remesh = 0;
};

namespace detail {

inline void zero_boundary(ComplexField& f) {
  const Grid2D& g = f.grid;
  for (int i = 0; i < g.nx; ++i) {
    f.values[g.idx(i, 0)] = 0.0;
    f.values[g.idx(i, g.ny - 1)] = 0.0;
  }
  for (int j = 0; j < g.ny; ++j) {
    f.values[g.idx(0, j)] = 0.0;
    f.values[g.idx(g.nx - 1, j)] = 0.0;
  }
}

}  // namespace detail

inline ComplexField rhs(const ComplexField& u, const SimParams& params) {
  const Grid2D& g = u.grid;
  ComplexField out(g, u.mesh);
  ComplexField lap = laplacian(u);
  const Complex iu(0.0, 1.0);
  const bool rot = params.rotating();
  const RotationSpec spec = rot ? RotationSpec(2, params.omega) : RotationSpec(2, {});

  GradientPair grad;
  if (rot) grad = gradient(u);

  const double sgn_g = params.gamma > 0 ? 1.0 : (params.gamma < 0 ? -1.0 : 0.0);
  const double g2 = sgn_g * params.gamma * params.gamma;
  const double w0 = params.omega.empty() ? 0.0 : params.omega[0];

  std::atomic<bool> bad{false};
  parallel_for(0, g.nx, [&](int i) {
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.idx(i, j);
      const Complex v = u.values[k];
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        bad.store(true, std::memory_order_relaxed);
        return;
      }
      const double x = u.node_x(i, j), y = u.node_y(i, j);
      Complex acc = params.kappa * lap.values[k];
      acc -= g2 * (x * x + y * y) * v;
      if (params.mu != 0.0) {
        const double a = std::abs(v);
        if (a > 0.0) {
          const double amp = (params.p == 3.0) ? a * a : std::pow(a, params.p - 1.0);
          acc -= params.mu * amp * v;
        }
      }
      Complex rhs_val = iu * acc;
      if (rot) {
        // A = Mx with the 2x2 block [0 -w; w 0]: A = (-w y, w x)
        rhs_val += (-w0 * y) * grad.dx.values[k] + (w0 * x) * grad.dy.values[k];
      }
      out.values[k] = rhs_val;
    }
  });
  if (bad.load()) throw NonFiniteField("rhs input");
  detail::zero_boundary(out);
  return out;
}

inline void step_rk4(SimState& state, double dt, const SimParams& params) {
  const Grid2D& g = state.u.grid;
  ComplexField k1 = rhs(state.u, params);

  ComplexField tmp(g, state.u.mesh);
  auto axpy = [&](const ComplexField& base, double a, const ComplexField& k) {
    for (std::size_t m = 0; m < g.size(); ++m) tmp.values[m] = base.values[m] + a * k.values[m];
  };

  axpy(state.u, 0.5 * dt, k1);
  ComplexField k2 = rhs(tmp, params);
  axpy(state.u, 0.5 * dt, k2);
  ComplexField k3 = rhs(tmp, params);
  axpy(state.u, dt, k3);
  ComplexField k4 = rhs(tmp, params);

  for (std::size_t m = 0; m < g.size(); ++m) {
    state.u.values[m] +=
        dt / 6.0 * (k1.values[m] + 2.0 * k2.values[m] + 2.0 * k3.values[m] + k4.values[m]);
  }
  detail::zero_boundary(state.u);
  state.t += dt;
  state.step += 1;
  state.last_dt = dt;
  if (!state.u.finite()) throw NonFiniteField("after rk4 step");
}

struct DtOptions {
  double dt0 = 0.05;       // accuracy prefactor of the amplitude rule
  double cfl_c = 0.35;     // ceiling coefficient; 0 disables the ceiling
  double dt_max = 1.0;
};

inline double adaptive_dt(const ComplexField& u, const SimParams& params, const DtOptions& opt,
                          double h_min) {
  double umax = 0.0;
  for (const Complex& v : u.values) umax = std::max(umax, std::abs(v));
  if (!(umax > 0.0)) throw ZeroField("adaptive time step");
  double dt = opt.dt0 / std::pow(umax, params.p - 1.0);
  if (opt.cfl_c > 0.0 && h_min > 0.0) {
    double ceiling = opt.cfl_c * h_min * h_min / params.kappa;
    if (params.rotating()) {
      double wmax = 0.0;
      for (double w : params.omega) wmax = std::max(wmax, std::abs(w));
      const double advect = wmax * u.grid.half_width * 1.4143;
      if (advect > 0.0) ceiling = std::min(ceiling, opt.cfl_c * h_min / advect);
    }
    dt = std::min(dt, ceiling);
  }
  return std::min(dt, opt.dt_max);
}

inline DiagnosticsRow diagnostics(const SimState& state, const SimParams& params) {
  DiagnosticsRow row;
  row.t = state.t;
  row.dt = state.last_dt;

  const ComplexField& u = state.u;
  const Grid2D& g = u.grid;
  MeshPtr mesh = u.mesh_or_identity();
  GradientPair grad = gradient(u);

  const double sgn_g = params.gamma > 0 ? 1.0 : (params.gamma < 0 ? -1.0 : 0.0);
  const double g2 = sgn_g * params.gamma * params.gamma;
  const double w0 = params.omega.empty() ? 0.0 : params.omega[0];
  const double q_crit = 2.0 + 4.0 / params.dim;

  double m_acc = 0.0, grad_acc = 0.0, pot_acc = 0.0, lp_acc = 0.0, lpc_acc = 0.0;
  double j_acc = 0.0;
  Complex jp_acc(0.0, 0.0), ell_acc(0.0, 0.0);
  double umax = 0.0;

  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.idx(i, j);
      const double w = mesh->quad_weight(i, j);
      const Complex v = u.values[k];
      const double a2 = std::norm(v);
      const double x = mesh->x[k], y = mesh->y[k];
      umax = std::max(umax, std::sqrt(a2));
      m_acc += w * a2;
      grad_acc += w * (std::norm(grad.dx.values[k]) + std::norm(grad.dy.values[k]));
      pot_acc += w * g2 * (x * x + y * y) * a2;
      if (params.mu != 0.0) lp_acc += w * std::pow(a2, 0.5 * (params.p + 1.0));
      lpc_acc += w * std::pow(a2, 0.5 * q_crit);
      j_acc += w * (x * x + y * y) * a2;
      const Complex xdotgrad = x * grad.dx.values[k] + y * grad.dy.values[k];
      jp_acc += w * std::conj(v) * xdotgrad;
      if (w0 != 0.0) {
        const Complex adotgrad = -w0 * y * grad.dx.values[k] + w0 * x * grad.dy.values[k];
        ell_acc += w * std::conj(v) * adotgrad;
      }
    }

  row.mass = m_acc;
  row.umax = umax;
  row.grad_l2 = std::sqrt(grad_acc);
  row.length_scale = row.grad_l2 > 0.0 ? 1.0 / row.grad_l2 : 0.0;
  row.j_moment = j_acc;
  row.j_prime = 4.0 * jp_acc.imag();
  // ell = i int conj(u) A.grad u; verified real up to quadrature noise
  const Complex ell = Complex(0.0, 1.0) * ell_acc;
  row.ell_omega = ell.real();
  row.e0 = grad_acc - params.dim / (params.dim + 2.0) * lpc_acc;
  row.energy = params.kappa * grad_acc + pot_acc + row.ell_omega +
               (params.mu != 0.0 ? 2.0 * params.mu / (params.p + 1.0) * lp_acc : 0.0);
  return row;
}

// ---------------------------------------------------------------------------
// Window checks on logged series

struct SeriesReport {
  bool pass = false;
  double max_residual = 0.0;
  std::string detail;
};

// J'' - 16 sgn(gamma) gamma^2 J = 8 (E - ell) at the mass-critical exponent
// (kappa = 1 bookkeeping). J'' is differenced from the logged J'.
inline SeriesReport check_virial(const std::vector<DiagnosticsRow>& rows, const SimParams& params,
                                 double tol = 1e-3) {
  if (params.kappa != 1.0) throw Error("virial check uses the kappa = 1 convention");
  if (rows.size() < 5) throw WindowTooShort("need at least 5 diagnostics rows");
  const double sgn_g = params.gamma > 0 ? 1.0 : (params.gamma < 0 ? -1.0 : 0.0);

  SeriesReport rep;
  rep.pass = true;
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    const double t0 = rows[k - 1].t, t1 = rows[k].t, t2 = rows[k + 1].t;
    const double h1 = t1 - t0, h2 = t2 - t1;
    if (h1 <= 0.0 || h2 <= 0.0) continue;
    // 3-point nonuniform first derivative of J'
    const double jpp = (rows[k + 1].j_prime - rows[k - 1].j_prime) / (h1 + h2);
    const double want = 8.0 * (rows[k].energy - rows[k].ell_omega) -
                        16.0 * sgn_g * params.gamma * params.gamma * rows[k].j_moment;
    const double resid = std::abs(jpp - want) / std::max(std::abs(jpp), 1.0);
    rep.max_residual = std::max(rep.max_residual, resid);
  }
  rep.pass = rep.max_residual < tol;
  return rep;
}

// d/dt E0 = gamma^2 J' (the logged J' identity; gamma = 0 means E0 constant).
inline SeriesReport check_dE0(const std::vector<DiagnosticsRow>& rows, const SimParams& params,
                              double tol = 1e-3) {
  if (rows.size() < 5) throw WindowTooShort("need at least 5 diagnostics rows");
  SeriesReport rep;
  double scale = 0.0;
  for (const auto& r : rows) scale = std::max(scale, std::abs(r.e0));
  scale = std::max(scale, 1e-30);
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    const double h = rows[k + 1].t - rows[k - 1].t;
    if (h <= 0.0) continue;
    const double de0 = (rows[k + 1].e0 - rows[k - 1].e0) / h;
    const double want = params.gamma * params.gamma * rows[k].j_prime;
    rep.max_residual = std::max(rep.max_residual, std::abs(de0 - want) / scale);
  }
  rep.pass = rep.max_residual < tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Run loop

struct RunOptions {
  DtOptions dt;
  AdaptOptions adapt;
  bool remesh = true;
  double remesh_growth = 2.0;       // remesh when umax doubles
  double trigger_jump_growth = 1.3; // ... or the jump grew past the last adapted state
  double trigger_jump_abs = 0.25;   // emergency backstop on the per-cell jump
  double shape_c = 5.0;             // or when the shape criterion fails
  double cap = 1e6;                // stop when umax reaches this
  double t_end = std::numeric_limits<double>::infinity();
  long max_steps = 2000000;
  int snap_on_doubling = 1;        // snapshot each time umax doubles
  std::function<void(const SimState&, const DiagnosticsRow&)> on_step;
  std::function<void(const SimState&, const char*)> on_snapshot;
};

struct RemeshEvent {
  double t = 0.0;
  long step = 0;
  double mass_rel_change = 0.0;
  int cycles = 0;
};

struct RunResult {
  std::vector<DiagnosticsRow> rows;
  std::vector<RemeshEvent> remesh_events;
  std::string termination;  // "blowup_cap", "t_end", "nonfinite", "max_steps", "zero_field"
  double t_final = 0.0;
  double umax_final = 0.0;
  long steps = 0;
};

inline RunResult run(const SimParams& params, const ComplexField& u0, const RunOptions& opt = {}) {
  params.validate();
  SimState state;
  state.u = u0;
  state.mesh = u0.mesh_or_identity();
  state.u.mesh = state.mesh;

  RunResult res;
  double h_min = state.mesh->min_cell();
  double umax0 = 0.0;
  for (const Complex& v : state.u.values) umax0 = std::max(umax0, std::abs(v));
  double last_remesh_umax = umax0;
  double next_snap_umax = umax0 * opt.remesh_growth;
  double adapted_jump = max_cell_jump(state.u);

  try {
    while (true) {
      double umax = 0.0;
      for (const Complex& v : state.u.values) {
        const double a = std::abs(v);
        if (!std::isfinite(a)) throw NonFiniteField("state scan");
        umax = std::max(umax, a);
      }

      // remesh trigger: amplitude doubling, jump growth past the adapted
      // state, or shape violation
      int remesh_cycles = 0;
      bool want_remesh = false;
      if (opt.remesh && state.step > 0) {
        const double jump = max_cell_jump(state.u);
        if (umax >= opt.remesh_growth * last_remesh_umax) want_remesh = true;
        if (jump > std::max(opt.trigger_jump_growth * adapted_jump, 1e-3)) want_remesh = true;
        if (jump > opt.trigger_jump_abs) want_remesh = true;
        if (!want_remesh && state.step % 8 == 0 && !shape_ok(state.u, opt.shape_c))
          want_remesh = true;
      }
      if (want_remesh) {
        AdaptResult ar = adapt_field(state.u, state.mesh, opt.adapt);
        adapted_jump = ar.final_jump;
        if (ar.cycles > 0) {
          state.u = std::move(ar.u);
          state.mesh = ar.mesh;
          h_min = state.mesh->min_cell();
          RemeshEvent ev;
          ev.t = state.t;
          ev.step = state.step;
          ev.mass_rel_change = ar.mass_rel_change;
          ev.cycles = ar.cycles;
          res.remesh_events.push_back(ev);
          remesh_cycles = ar.cycles;
        }
        last_remesh_umax = umax;
      }

      DiagnosticsRow row = diagnostics(state, params);
      row.dt = state.last_dt;
      row.remesh = remesh_cycles;
      res.rows.push_back(row);
      if (opt.on_step) opt.on_step(state, row);

      if (opt.snap_on_doubling && row.umax >= next_snap_umax) {
        if (opt.on_snapshot) opt.on_snapshot(state, "doubling");
        next_snap_umax *= opt.remesh_growth;
      }

      if (row.umax >= opt.cap) {
        res.termination = "blowup_cap";
        break;
      }
      if (state.t >= opt.t_end) {
        res.termination = "t_end";
        break;
      }
      if (state.step >= opt.max_steps) {
        res.termination = "max_steps";
        break;
      }

      double dt = adaptive_dt(state.u, params, opt.dt, h_min);
      if (state.t + dt > opt.t_end) dt = opt.t_end - state.t;
      if (!(dt > 0.0) || !std::isfinite(dt)) {
        res.termination = "dt_underflow";
        break;
      }
      step_rk4(state, dt, params);
    }
  } catch (const NonFiniteField&) {
    res.termination = "nonfinite";
  } catch (const ZeroField&) {
    res.termination = "zero_field";
  }

  if (opt.on_snapshot) opt.on_snapshot(state, "final");
  res.t_final = state.t;
  res.umax_final = res.rows.empty() ? 0.0 : res.rows.back().umax;
  res.steps = state.step;
  return res;
}

}  // namespace rnls
