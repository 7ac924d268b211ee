#pragma once

// Post-processing of blowup runs: blowup-time reconstruction from the step
// sizes, rate-exponent fits of L(t) = 1/||grad u||_2 against T - t, the
// log-log functional, profile comparison against the rescaled ground state,
// mass-concentration windows, and inequality spot checks.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rnls/evolution.hpp"
#include "rnls/fd_ops.hpp"
#include "rnls/ground_state.hpp"

namespace rnls {

// ---------------------------------------------------------------------------
// Blowup time from the step-size tail: T - t_j = sum_{k >= j} dt_k.

struct BlowupTimes {
  double t_est = 0.0;                 // T, the final time of the capped run
  std::vector<double> time_to_blowup; // T - t_j per row
};

inline BlowupTimes reconstruct_T(const std::vector<DiagnosticsRow>& rows,
                                 const std::string& termination) {
  if (termination != "blowup_cap") throw RunDidNotBlowUp("termination was " + termination);
  if (rows.empty()) throw RunDidNotBlowUp("empty diagnostics");
  BlowupTimes out;
  out.t_est = rows.back().t;
  out.time_to_blowup.resize(rows.size());
  double acc = 0.0;
  for (std::size_t k = rows.size(); k-- > 1;) {
    out.time_to_blowup[k] = acc;
    acc += rows[k].dt;  // dt recorded on the row is the step that reached it
  }
  out.time_to_blowup[0] = acc;
  return out;
}

// Suffix sums over a plain dt sequence (synthetic-fixture form).
inline std::vector<double> suffix_sums(const std::vector<double>& dts) {
  std::vector<double> out(dts.size() + 1, 0.0);
  for (std::size_t k = dts.size(); k-- > 0;) out[k] = out[k + 1] + dts[k];
  return out;
}

// ---------------------------------------------------------------------------
// Rate fit: least squares of log L against log (T - t).

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms of the fit residuals
  double window_lo = 0.0; // T - t range actually used
  double window_hi = 0.0;
  double t_est = 0.0;
  int points = 0;
};

inline RateFit fit_rate(const std::vector<double>& length_scale,
                        const std::vector<double>& time_to_blowup, double t_est,
                        double win_lo = 1e-5, double win_hi = 1e-2) {
  if (length_scale.size() != time_to_blowup.size()) throw Error("rate fit size mismatch");
  std::vector<double> lx, ly;
  double seen_lo = 1e300, seen_hi = 0.0;
  for (std::size_t k = 0; k < length_scale.size(); ++k) {
    const double s = time_to_blowup[k];
    if (s <= 0.0 || length_scale[k] <= 0.0) continue;
    seen_lo = std::min(seen_lo, s);
    seen_hi = std::max(seen_hi, s);
    if (s < win_lo || s > win_hi) continue;
    lx.push_back(std::log(s));
    ly.push_back(std::log(length_scale[k]));
  }
  if (seen_hi <= 0.0 || seen_lo >= 1e300 || seen_hi / std::max(seen_lo, 1e-300) < 1e2)
    throw InsufficientDecades("L series spans fewer than 2 decades of T - t");
  if (lx.size() < 20) throw InsufficientDecades("fewer than 20 points in the fit window");

  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sx += lx[k];
    sy += ly[k];
    sxx += lx[k] * lx[k];
    sxy += lx[k] * ly[k];
  }
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  double rss = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    const double e = ly[k] - fit.slope * lx[k] - fit.intercept;
    rss += e * e;
  }
  fit.residual = std::sqrt(rss / n);
  fit.window_lo = win_lo;
  fit.window_hi = win_hi;
  fit.t_est = t_est;
  fit.points = static_cast<int>(lx.size());
  return fit;
}

// ---------------------------------------------------------------------------
// Log-log functional (||grad u|| / ||grad Q||) sqrt((T-t)/log|log(T-t)|),
// reported against the theoretical limit 1/sqrt(2 pi).

inline double loglog_functional_value(double grad_l2, double time_to_blowup, double gradQ) {
  const double s = time_to_blowup;
  if (!(s > 0.0)) throw DomainError("T - t must be positive");
  const double ll = std::log(std::abs(std::log(s)));
  if (ll <= 0.0) throw DomainError("log|log(T-t)| not positive at T - t = " + std::to_string(s));
  return grad_l2 / gradQ * std::sqrt(s / ll);
}

inline std::vector<double> loglog_functional(const std::vector<double>& grad_l2,
                                             const std::vector<double>& time_to_blowup,
                                             double gradQ) {
  if (grad_l2.size() != time_to_blowup.size()) throw Error("loglog series size mismatch");
  std::vector<double> out(grad_l2.size());
  for (std::size_t k = 0; k < grad_l2.size(); ++k)
    out[k] = loglog_functional_value(grad_l2[k], time_to_blowup[k], gradQ);
  return out;
}

inline double loglog_limit() { return 1.0 / std::sqrt(2.0 * M_PI); }

// ---------------------------------------------------------------------------
// Profile comparison against the rescaled ground state.

struct ProfileFit {
  double lambda = 0.0;    // ||grad Q|| / ||grad u||
  double center_x = 0.0;  // argmax of |u|
  double center_y = 0.0;
  double residual = 0.0;  // || |u| - lambda^(-n/2) Q((. - center)/lambda) ||_2 / ||u||_2
};

inline ProfileFit compare_profile(const ComplexField& u, const RadialProfile& prof) {
  const Grid2D& g = u.grid;
  MeshPtr mesh = u.mesh_or_identity();

  ProfileFit fit;
  Norms nm = norms(u);
  fit.lambda = prof.gradQ / nm.grad_l2;

  double best = -1.0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double a = std::abs(u.values[g.idx(i, j)]);
      if (a > best) {
        best = a;
        fit.center_x = mesh->x[g.idx(i, j)];
        fit.center_y = mesh->y[g.idx(i, j)];
      }
    }

  const double n_half = 0.5 * prof.dim;
  double acc = 0.0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.idx(i, j);
      const double r = std::hypot(mesh->x[k] - fit.center_x, mesh->y[k] - fit.center_y);
      const double q = std::pow(fit.lambda, -n_half) * prof.value(r / fit.lambda);
      const double d = std::abs(u.values[k]) - q;
      acc += mesh->quad_weight(i, j) * d * d;
    }
  fit.residual = std::sqrt(acc) / nm.l2;
  return fit;
}

// ---------------------------------------------------------------------------
// Mass concentration window.

struct ConcentrationWindow {
  double delta = 0.25;
  double radius = 0.0;    // w(t)
  double center_x = 0.0;
  double center_y = 0.0;
  double captured = 0.0;  // int_{|x - c| < w} |u|^2
};

inline double window_radius(double time_to_blowup, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw Error("delta must lie in (0, 1/2)");
  const double s = time_to_blowup;
  if (!(s > 0.0)) throw DomainError("T - t must be positive");
  const double ll = std::log(std::abs(std::log(s)));
  if (ll <= 0.0) throw DomainError("log|log(T-t)| not positive");
  return std::sqrt(s) / std::pow(ll, delta);
}

inline double captured_mass(const ComplexField& u, double cx, double cy, double radius) {
  return quadrature(u, [&](double x, double y, Complex v) {
    const double r = std::hypot(x - cx, y - cy);
    return r < radius ? std::norm(v) : 0.0;
  });
}

// Center search: start from the argmax of |u|, then hill-climb the windowed
// mass on the grid neighbourhood.
inline ConcentrationWindow mass_window(const ComplexField& u, double delta, double time_to_blowup) {
  ConcentrationWindow win;
  win.delta = delta;
  win.radius = window_radius(time_to_blowup, delta);

  const Grid2D& g = u.grid;
  MeshPtr mesh = u.mesh_or_identity();
  int bi = 0, bj = 0;
  double best = -1.0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double a = std::abs(u.values[g.idx(i, j)]);
      if (a > best) {
        best = a;
        bi = i;
        bj = j;
      }
    }

  // coarse-to-fine hill climb; the windowed mass is jagged at the cell scale
  double cmass = captured_mass(u, mesh->x[g.idx(bi, bj)], mesh->y[g.idx(bi, bj)], win.radius);
  for (int stride = 8; stride >= 1; stride /= 2) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const int ni = bi + di * stride, nj = bj + dj * stride;
          if (ni < 0 || nj < 0 || ni >= g.nx || nj >= g.ny || (di == 0 && dj == 0)) continue;
          const double m =
              captured_mass(u, mesh->x[g.idx(ni, nj)], mesh->y[g.idx(ni, nj)], win.radius);
          if (m > cmass * (1.0 + 1e-12)) {
            cmass = m;
            bi = ni;
            bj = nj;
            improved = true;
          }
        }
    }
  }
  win.center_x = mesh->x[g.idx(bi, bj)];
  win.center_y = mesh->y[g.idx(bi, bj)];
  win.captured = cmass;
  return win;
}

// ---------------------------------------------------------------------------
// Inequality spot checks.

// slack of (||u||_2^2)^2 <= (2/n) ||grad u||_2^2 ||x u||_2^2 in 2d,
// equality at the gaussian e^{-|x|^2/2}.
inline double check_uncertainty(const ComplexField& u, int n = 2) {
  Norms nm = norms(u);
  return 2.0 / n * nm.grad_l2 * nm.grad_l2 * nm.weighted_l2 * nm.weighted_l2 -
         std::pow(nm.l2, 4.0);
}

struct InitialDataReport {
  double mass = 0.0;          // ||u0||_2^2
  double mass_excess = 0.0;   // ||u0||_2^2 - ||Q||_2^2
  double free_energy = 0.0;   // E0(u0)
  bool supercritical_mass = false;
  bool negative_energy = false;
};

inline InitialDataReport classify_initial_data(const ComplexField& u0, const RadialProfile& prof) {
  InitialDataReport rep;
  Norms nm = norms(u0, {2.0 + 4.0 / prof.dim});
  rep.mass = nm.l2 * nm.l2;
  rep.mass_excess = rep.mass - prof.massQ;
  rep.free_energy = free_energy(u0, prof.dim);
  rep.supercritical_mass = rep.mass_excess > 0.0;
  rep.negative_energy = rep.free_energy < 0.0;
  return rep;
}

}  // namespace rnls
