#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rnls/blowup_analysis.hpp"

using namespace rnls;

namespace {

// synthetic diagnostics rows with prescribed dt sequence
std::vector<DiagnosticsRow> rows_with_dts(const std::vector<double>& dts) {
  std::vector<DiagnosticsRow> rows(dts.size() + 1);
  double t = 0.0;
  rows[0].t = 0.0;
  rows[0].dt = 0.0;
  for (std::size_t k = 0; k < dts.size(); ++k) {
    t += dts[k];
    rows[k + 1].t = t;
    rows[k + 1].dt = dts[k];
  }
  return rows;
}

}  // namespace

TEST_CASE("blowup time reconstruction: geometric steps are summed exactly") {
  std::vector<double> dts;
  for (int k = 0; k < 40; ++k) dts.push_back(std::pow(2.0, -k));
  std::vector<DiagnosticsRow> rows = rows_with_dts(dts);
  BlowupTimes bt = reconstruct_T(rows, "blowup_cap");

  // exact suffix sums: T - t_0 = sum of all steps
  double total = 0.0;
  for (double d : dts) total += d;
  CHECK(bt.time_to_blowup[0] == total);
  CHECK(bt.time_to_blowup.back() == 0.0);

  // (T - t_j) - (T - t_{j+1}) recovers each step exactly
  for (std::size_t j = 0; j + 1 < rows.size(); ++j)
    CHECK(bt.time_to_blowup[j] - bt.time_to_blowup[j + 1] == rows[j + 1].dt);

  CHECK_THROWS_AS((void)reconstruct_T(rows, "t_end"), const RunDidNotBlowUp&);
}

TEST_CASE("rate fit is exact on pure powers") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> exps(0.3, 1.5);
  for (int trial = 0; trial < 12; ++trial) {
    const double alpha = exps(rng);
    const double c = 0.7 + 0.6 * exps(rng);
    std::vector<double> L, s;
    for (double x = 1e-6; x < 1e-1; x *= 1.15) {
      s.push_back(x);
      L.push_back(c * std::pow(x, alpha));
    }
    RateFit fit = fit_rate(L, s, 0.1);
    CHECK(std::abs(fit.slope - alpha) < 1e-8);
    CHECK(std::abs(fit.residual) < 1e-10);
  }

  // sqrt law: slope exactly one half
  std::vector<double> L, s;
  for (double x = 1e-6; x < 1e-1; x *= 1.2) {
    s.push_back(x);
    L.push_back(std::sqrt(x));
  }
  RateFit fit = fit_rate(L, s, 0.1);
  CHECK(std::abs(fit.slope - 0.5) < 1e-10);
}

TEST_CASE("rate fit rejects narrow windows") {
  std::vector<double> L, s;
  for (double x = 1e-3; x < 5e-3; x *= 1.05) {
    s.push_back(x);
    L.push_back(std::sqrt(x));
  }
  CHECK_THROWS_AS((void)fit_rate(L, s, 0.1), const InsufficientDecades&);
}

TEST_CASE("rate fit on the log-log law lands slightly above one half") {
  std::vector<double> L, s;
  for (double x = 1e-6; x < 1e-1; x *= 1.1) {
    s.push_back(x);
    L.push_back(std::sqrt(x / std::log(std::abs(std::log(x)))));
  }
  RateFit fit = fit_rate(L, s, 0.1, 1e-5, 1e-2);
  CHECK(fit.slope > 0.5);
  CHECK(fit.slope < 0.56);

  // analytic effective slope at the window centre:
  // d log L / d log s = 1/2 - 1/(2 log s log|log s|)
  const double sc = std::sqrt(1e-5 * 1e-2);
  const double expect = 0.5 - 0.5 / (std::log(sc) * std::log(std::abs(std::log(sc))));
  CHECK(fit.slope == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("loglog functional: saturating series gives the constant limit") {
  const double gradQ = 3.42;
  std::vector<double> grads, s;
  for (double x = 1e-8; x < 1e-2; x *= 1.3) {
    s.push_back(x);
    const double ll = std::log(std::abs(std::log(x)));
    grads.push_back(gradQ / std::sqrt(2.0 * M_PI) * std::sqrt(ll / x));
  }
  std::vector<double> vals = loglog_functional(grads, s, gradQ);
  for (double v : vals) CHECK(v == doctest::Approx(loglog_limit()).epsilon(1e-12));

  // scale invariance: gradQ -> c gradQ combined with grads -> c grads
  std::vector<double> grads2(grads);
  for (double& v : grads2) v *= 3.7;
  std::vector<double> vals2 = loglog_functional(grads2, s, gradQ * 3.7);
  for (std::size_t k = 0; k < vals.size(); ++k) CHECK(vals[k] == doctest::Approx(vals2[k]).epsilon(1e-14));
}

TEST_CASE("loglog functional drifts on a pure power law") {
  const double gradQ = 3.42;
  std::vector<double> grads, s;
  for (double x = 1e-8; x < 1e-2; x *= 1.3) {
    s.push_back(x);
    grads.push_back(gradQ / std::sqrt(x));  // pure sqrt law, no correction
  }
  std::vector<double> vals = loglog_functional(grads, s, gradQ);
  double lo = 1e300, hi = 0.0;
  for (double v : vals) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi / lo > 1.15);  // logarithmic drift, no limit
}

TEST_CASE("loglog functional rejects out-of-domain times") {
  CHECK_THROWS_AS((void)loglog_functional_value(1.0, 0.9, 1.0), const DomainError&);
  CHECK_THROWS_AS((void)loglog_functional_value(1.0, -0.1, 1.0), const DomainError&);
}

TEST_CASE("profile comparison: rescaled ground state and a gaussian") {
  const RadialProfile& prof = ground_state_cached(2, 3.0);
  Grid2D g(384, 384, 8.0);
  const double lambda = 0.8;
  // center on an exact grid node
  const double cx = g.half_width * g.xi(g.nx / 2);
  const double cy = g.half_width * g.eta(g.ny / 2);
  ComplexField u = sample_field(g, [&](double x, double y) {
    return Complex(prof.value(std::hypot(x - cx, y - cy) / lambda) / lambda, 0.0);
  });

  ProfileFit fit = compare_profile(u, prof);
  CHECK(fit.lambda == doctest::Approx(lambda).epsilon(1e-4));
  CHECK(fit.center_x == doctest::Approx(cx).epsilon(1e-12));
  // residual floor is set by the lambda estimate, which uses the discrete
  // gradient; with lambda forced exact the metric itself is zero
  CHECK(fit.residual < 2e-4);

  double acc = 0.0;
  MeshPtr mesh = u.mesh_or_identity();
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.idx(i, j);
      const double r = std::hypot(mesh->x[k] - cx, mesh->y[k] - cy);
      const double d = std::abs(u.values[k]) - prof.value(r / lambda) / lambda;
      acc += mesh->quad_weight(i, j) * d * d;
    }
  CHECK(std::sqrt(acc) < 1e-10);

  ComplexField gauss = sample_field(g, [](double x, double y) {
    return Complex(2.0 * std::exp(-(x * x + y * y)), 0.0);
  });
  ProfileFit gf = compare_profile(gauss, prof);
  CHECK(gf.residual > 0.05);
}

TEST_CASE("mass window captures the whole ground state when wide enough") {
  const RadialProfile& prof = ground_state_cached(2, 3.0);
  Grid2D g(384, 384, 2.0);
  const double lambda = 0.02;
  ComplexField u = sample_field(g, [&](double x, double y) {
    return Complex(prof.value(std::hypot(x, y) / lambda) / lambda, 0.0);
  });
  // s = 0.05: w = sqrt(s)/(log|log s|)^delta = 0.22, an order beyond the support
  ConcentrationWindow win = mass_window(u, 0.25, 0.05);
  CHECK(win.captured == doctest::Approx(prof.massQ).epsilon(1e-3));
  CHECK(std::hypot(win.center_x, win.center_y) < 0.05);
}

TEST_CASE("mass window finds the heavier of two bumps, matching a brute scan") {
  Grid2D g(256, 256, 4.0);
  auto bump = [](double x, double y, double cx, double cy, double a) {
    return a * std::exp(-8.0 * ((x - cx) * (x - cx) + (y - cy) * (y - cy)));
  };
  ComplexField u = sample_field(g, [&](double x, double y) {
    return Complex(bump(x, y, -2.0, 0.0, 1.0) + bump(x, y, 1.5, 0.5, 1.4), 0.0);
  });
  ConcentrationWindow win = mass_window(u, 0.25, 0.05);
  CHECK(win.center_x == doctest::Approx(1.5).epsilon(0.05));
  CHECK(win.center_y == doctest::Approx(0.5).epsilon(0.12));

  // brute-force scan over a coarse lattice of centers
  double best = -1.0, bx = 0, by = 0;
  for (double x = -3.5; x <= 3.5; x += 0.125)
    for (double y = -3.5; y <= 3.5; y += 0.125) {
      const double m = captured_mass(u, x, y, win.radius);
      if (m > best) {
        best = m;
        bx = x;
        by = y;
      }
    }
  CHECK(std::abs(win.center_x - bx) < 0.1);
  CHECK(std::abs(win.center_y - by) < 0.1);
  // node-restricted search against the off-node lattice: the indicator
  // window is jagged at the cell scale, so allow a small captured-mass gap
  CHECK(win.captured >= best * 0.95);
}

TEST_CASE("captured mass is monotone in the window radius") {
  Grid2D g(128, 128, 4.0);
  ComplexField u = sample_field(g, [](double x, double y) {
    return Complex(std::exp(-(x * x + y * y)), 0.3 * std::exp(-2.0 * (x * x + y * y)));
  });
  double prev = -1.0;
  for (double r = 0.2; r < 4.0; r *= 1.4) {
    const double m = captured_mass(u, 0.1, -0.2, r);
    CHECK(m >= prev);
    prev = m;
  }
}

TEST_CASE("uncertainty slack: gaussian equality, ground state strict") {
  Grid2D g(256, 256, 10.0);
  ComplexField gauss = sample_field(g, [](double x, double y) {
    return Complex(std::exp(-(x * x + y * y) / 2.0), 0.0);
  });
  const double slack_g = check_uncertainty(gauss);
  Norms nm = norms(gauss);
  CHECK(std::abs(slack_g) / std::pow(nm.l2, 4.0) < 1e-4);  // equality case

  const RadialProfile& prof = ground_state_cached(2, 3.0);
  ComplexField q = sample_field(g, [&](double x, double y) {
    return Complex(prof.value(std::hypot(x, y)), 0.0);
  });
  CHECK(check_uncertainty(q) > 0.0);
}

TEST_CASE("initial data classification for the reference blowup data") {
  const RadialProfile& prof = ground_state_cached(2, 3.0);
  Grid2D g(256, 256, 6.0);
  ComplexField u0 = sample_field(g, [](double x, double y) {
    return Complex(5.0 * std::exp(-(2.0 * x) * (2.0 * x) - y * y), 0.0);
  });
  InitialDataReport rep = classify_initial_data(u0, prof);
  CHECK(rep.mass == doctest::Approx(25.0 * M_PI / 4.0).epsilon(1e-6));
  CHECK(rep.supercritical_mass);
  CHECK(rep.mass_excess > 7.0);
  CHECK(rep.negative_energy);
}
