#pragma once

// Self-verification suites: each check re-derives an exact or closed-form
// fact and compares the library against it. The quick suite covers the
// synthetic oracles and identities; the transform suite exercises the lens
// transform, kernel and norm relations at configurable sizes.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rnls/blowup_analysis.hpp"
#include "rnls/transforms.hpp"

namespace rnls {

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace verifydetail {

inline VerifyCheck make(const std::string& name, bool pass, double value, double bound,
                        const char* rel = "<") {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.3e %s %.3e", value, rel, bound);
  return VerifyCheck{name, pass, buf};
}

inline SpacetimeFn free_gaussian(double a1, double a2) {
  return [a1, a2](double t, const std::vector<double>& x) {
    Complex out(1.0, 0.0);
    const double w[2] = {a1, a2};
    for (std::size_t k = 0; k < x.size(); ++k) {
      const Complex den(1.0, 4.0 * w[k] * t);
      out *= std::exp(-w[k] * x[k] * x[k] / den) / std::sqrt(den);
    }
    return out;
  };
}

}  // namespace verifydetail

// Fast synthetic/identity checks (a few seconds in total).
inline std::vector<VerifyCheck> verify_quick() {
  using verifydetail::make;
  std::vector<VerifyCheck> checks;

  {  // rate fit exact on pure powers
    double worst = 0.0;
    for (double alpha : {0.35, 0.5, 0.75, 1.0, 1.45}) {
      std::vector<double> L, s;
      for (double x = 1e-6; x < 1e-1; x *= 1.2) {
        s.push_back(x);
        L.push_back(1.3 * std::pow(x, alpha));
      }
      worst = std::max(worst, std::abs(fit_rate(L, s, 0.1).slope - alpha));
    }
    checks.push_back(make("fit_rate pure powers exact", worst < 1e-8, worst, 1e-8));
  }
  {  // blowup-time reconstruction exact on geometric steps
    std::vector<double> dts;
    for (int k = 0; k < 30; ++k) dts.push_back(std::pow(2.0, -k));
    std::vector<double> suf = suffix_sums(dts);
    double worst = 0.0;
    for (std::size_t j = 0; j < dts.size(); ++j)
      worst = std::max(worst, std::abs((suf[j] - suf[j + 1]) - dts[j]));
    checks.push_back(make("reconstruct_T geometric steps exact", worst == 0.0, worst, 0.0, "=="));
  }
  {  // monitor scale invariance
    Grid2D g(64, 64, 4.0);
    ComplexField u = sample_field(g, [](double x, double y) {
      return Complex(std::exp(-(x * x + 2.0 * y * y)), 0.3 * std::exp(-x * x - y * y));
    });
    ComplexField u2 = u;
    for (auto& v : u2.values) v *= 2.0;
    MonitorField m1 = compute_monitor(u);
    MonitorField m2 = compute_monitor(u2);
    double worst = 0.0;
    for (std::size_t k = 0; k < m1.w.size(); ++k)
      worst = std::max(worst, std::abs(m1.w[k] - m2.w[k]));
    checks.push_back(make("monitor scale invariance", worst < 1e-12, worst, 1e-12));
  }
  {  // remesh mass conservation on a resolved profile
    Grid2D g(256, 256, 6.0);
    const RadialProfile& prof = ground_state_cached(2, 3.0);
    ComplexField u = sample_field(g, [&](double x, double y) {
      return Complex(1.7 * prof.value(std::hypot(x, y) / 0.8) / 0.8, 0.0);
    });
    u.mesh = u.mesh_or_identity();
    MeshPtr adapted = std::make_shared<const MeshMap>(redistribute(*u.mesh, compute_monitor(u)));
    InterpolateStats stats;
    (void)interpolate(u, *u.mesh, adapted, &stats);
    checks.push_back(
        make("remesh mass conservation", stats.mass_rel_change() < 1e-6, stats.mass_rel_change(), 1e-6));
  }
  {  // lifespan boundary: 2|gamma| T = 1 is global, epsilon inside is finite
    bool ok = true;
    for (double T : {0.1, 1.0, 10.0}) {
      const double gb = -1.0 / (2.0 * T);
      ok = ok && !map_lifespan(T, gb).finite();
      ok = ok && map_lifespan(T, gb * (1.0 - 1e-6)).finite();
    }
    checks.push_back(VerifyCheck{"lifespan boundary branches", ok, "tanh branch at 2|gamma|T = 1"});
  }
  {  // ground-state energy and sharp constant identities
    const RadialProfile& prof = ground_state_cached(2, 3.0);
    const double e = std::abs(free_energy(prof)) / (prof.gradQ * prof.gradQ);
    checks.push_back(make("ground state zero energy", e < 1e-5, e, 1e-5));
    const double pohozaev =
        std::abs(prof.gradQ * prof.gradQ - 0.5 * prof.lp_pp) / (prof.gradQ * prof.gradQ);
    checks.push_back(make("pohozaev identity", pohozaev < 1e-6, pohozaev, 1e-6));
  }
  {  // uncertainty equality at the gaussian
    Grid2D g(192, 192, 10.0);
    ComplexField gauss = sample_field(g, [](double x, double y) {
      return Complex(std::exp(-(x * x + y * y) / 2.0), 0.0);
    });
    Norms nm = norms(gauss);
    const double rel = std::abs(check_uncertainty(gauss)) / std::pow(nm.l2, 4.0);
    checks.push_back(make("uncertainty equality at gaussian", rel < 1e-4, rel, 1e-4));
  }
  {  // lens transform round trip
    RotationSpec rot(2, {0.8});
    SpacetimeFn phi = verifydetail::free_gaussian(1.0, 0.45);
    SpacetimeFn u = [&](double t, const std::vector<double>& x) {
      return apply_R(phi, t, x, -1.0, rot);
    };
    double worst = 0.0;
    for (double x = -2.0; x <= 2.0; x += 0.37)
      for (double y = -2.0; y <= 2.0; y += 0.41) {
        const Complex back = apply_R_inverse(u, 0.05, {x, y}, -1.0, rot);
        worst = std::max(worst, std::abs(back - phi(0.05, {x, y})));
      }
    checks.push_back(make("lens transform round trip", worst < 1e-12, worst, 1e-12));
  }
  {  // kernel free limit
    RotationSpec rot(2, {});
    double worst = 0.0;
    const double t = 0.3;
    for (double x = -1.5; x <= 1.5; x += 0.52) {
      const Complex got = eval_kernel(t, {x, 0.4}, {0.7, -0.4}, -1e-6, rot);
      const double d2 = (x - 0.7) * (x - 0.7) + 0.64;
      const Complex want =
          std::pow(4.0 * M_PI * Complex(0.0, 1.0) * t, -1.0) * std::polar(1.0, d2 / (4.0 * t));
      worst = std::max(worst, std::abs(got - want) / std::abs(want));
    }
    checks.push_back(make("kernel free limit", worst < 1e-4, worst, 1e-4));
  }
  return checks;
}

struct TransformSuiteOptions {
  double gamma = -1.0;
  double T_free = 0.5;
  int grid = 128;
  double half_width = 6.0;
};

// Residual and norm-relation suite for the lens transform (the
// transform-check command).
inline std::vector<VerifyCheck> verify_transforms(const TransformSuiteOptions& opt = {}) {
  using verifydetail::make;
  std::vector<VerifyCheck> checks;
  RotationSpec rot(2, {1.0});
  const double gamma = opt.gamma;

  {  // residual order of R(e^{it} Q) under the full rotational equation
    const RadialProfile& prof = ground_state_cached(2, 3.0);
    SpacetimeFn soliton = [&](double t, const std::vector<double>& x) {
      return std::polar(1.0, t) * prof.value(std::sqrt(sq_norm(x)));
    };
    SpacetimeFn u = [&](double t, const std::vector<double>& x) {
      return apply_R(soliton, t, x, gamma, rot);
    };
    SimParams params;
    params.p = 3.0;
    params.gamma = gamma;
    params.omega = {1.0};
    params.kappa = 1.0;
    params.mu = -1.0;
    const int n1 = opt.grid, n0 = opt.grid / 2;
    const double e0 = pde_residual(u, 0.1, params, Grid2D(n0, n0, opt.half_width));
    const double e1 = pde_residual(u, 0.1, params, Grid2D(n1, n1, opt.half_width));
    const double order = std::log2(e0 / e1);
    checks.push_back(make("lens soliton residual order", order > 3.5, order, 3.5, ">"));
  }
  {  // norm relations on sampled gaussians
    SpacetimeFn phi = verifydetail::free_gaussian(0.8, 1.3);
    Grid2D g(256, 256, 10.0);
    double worst_l2 = 0.0, worst_x = 0.0;
    for (double t : {0.05, 0.1, 0.2}) {
      const double tau = std::tanh(2.0 * gamma * t) / (2.0 * gamma);
      ComplexField ut = sample_field(g, [&](double x, double y) {
        return apply_R(phi, t, {x, y}, gamma, rot);
      });
      ComplexField ptau = sample_field(g, [&](double x, double y) { return phi(tau, {x, y}); });
      Norms nu = norms(ut);
      Norms np = norms(ptau);
      worst_l2 = std::max(worst_l2, std::abs(nu.l2 - np.l2) / np.l2);
      worst_x = std::max(worst_x, std::abs(nu.weighted_l2 -
                                           std::cosh(2.0 * gamma * t) * np.weighted_l2) /
                                      nu.weighted_l2);
    }
    checks.push_back(make("lens L2 preservation", worst_l2 < 1e-6, worst_l2, 1e-6));
    checks.push_back(make("lens weighted-norm relation", worst_x < 1e-6, worst_x, 1e-6));
  }
  {  // lifespan map at the requested T
    LifespanVerdict v = map_lifespan(opt.T_free, gamma);
    const bool expect_finite = gamma > 0.0 || (gamma < 0.0 && 2.0 * std::abs(gamma) * opt.T_free < 1.0);
    checks.push_back(VerifyCheck{"lifespan verdict branch", v.finite() == expect_finite,
                                 v.finite() ? "finite" : "global"});
  }
  return checks;
}

inline bool all_pass(const std::vector<VerifyCheck>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

}  // namespace rnls
