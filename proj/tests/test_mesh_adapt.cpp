#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rnls/ground_state.hpp"
#include "rnls/mesh_adapt.hpp"

using namespace rnls;

namespace {

ComplexField gaussian_field(const Grid2D& g, double amp = 1.0, double a = 0.5) {
  return sample_field(g, [=](double x, double y) {
    return Complex(amp * std::exp(-a * (x * x + y * y)), 0.0);
  });
}

MonitorField bump_monitor(const Grid2D& g, double height, double width) {
  MonitorField mon;
  mon.grid = g;
  mon.w.resize(g.size());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double x = g.half_width * g.xi(i), y = g.half_width * g.eta(j);
      mon.w[g.idx(i, j)] = 1.0 + height * std::exp(-(x * x + y * y) / (width * width));
    }
  return mon;
}

double cell_area_at_center(const MeshMap& m) {
  const Grid2D& g = m.grid;
  const int i = g.nx / 2, j = g.ny / 2;
  return std::abs(m.jacobian()[g.idx(i, j)]) * g.dxi() * g.deta();
}

}  // namespace

TEST_CASE("monitor of a constant field is identically one") {
  Grid2D g(32, 32, 4.0);
  ComplexField c = sample_field(g, [](double, double) { return Complex(2.5, -1.0); });
  MonitorField mon = compute_monitor(c);
  for (double w : mon.w) CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("monitor rejects the zero field and is scale invariant") {
  Grid2D g(32, 32, 4.0);
  ComplexField z(g);
  CHECK_THROWS_AS((void)compute_monitor(z), const ZeroField&);

  ComplexField u = gaussian_field(g);
  ComplexField u2 = u;
  for (auto& v : u2.values) v *= 2.0;
  MonitorField m1 = compute_monitor(u);
  MonitorField m2 = compute_monitor(u2);
  for (std::size_t k = 0; k < m1.w.size(); ++k) CHECK(std::abs(m1.w[k] - m2.w[k]) < 1e-12);
}

TEST_CASE("monitor peaks near the max-gradient ring of a gaussian") {
  Grid2D g(128, 128, 4.0);
  ComplexField u = gaussian_field(g, 1.0, 0.5);  // exp(-r^2/2), |grad| max at r = 1
  MonitorOptions raw;
  raw.smooth_passes = 0;
  MonitorField mon = compute_monitor(u, raw);

  // the curvature term peaks at the origin, the gradient term on the r = 1
  // ring; w decays monotonically outside both features
  double best = -1.0, best_r = 0.0;
  double best_grad = -1.0, best_grad_r = 0.0;
  std::vector<Complex> dxi, deta;
  detail::comp_derivatives(g, u.values, dxi, deta);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.idx(i, j);
      const double r = std::hypot(g.half_width * g.xi(i), g.half_width * g.eta(j));
      if (mon.w[k] > best) {
        best = mon.w[k];
        best_r = r;
      }
      const double gterm = std::norm(dxi[k]) + std::norm(deta[k]);
      if (gterm > best_grad) {
        best_grad = gterm;
        best_grad_r = r;
      }
    }
  CHECK(best_r < 0.3);                                      // curvature-dominated core
  CHECK(best_grad_r == doctest::Approx(1.0).epsilon(0.1));  // gradient ring
  CHECK(mon.w[g.idx(g.nx / 2, g.ny / 2)] > mon.w[g.idx(g.nx - 1, g.ny - 1)]);

  // independent 2nd-order stencil oracle at a handful of nodes
  const double hx = g.half_width * g.dxi(), hy = g.half_width * g.deta();
  double umax = 0.0;
  for (const auto& v : u.values) umax = std::max(umax, std::abs(v));
  MonitorOptions mo;
  for (int i = 30; i < 100; i += 17)
    for (int j = 30; j < 100; j += 23) {
      const double ux = (std::abs(u.at(i + 1, j)) - std::abs(u.at(i - 1, j))) / (2.0 * hx);
      const double uy = (std::abs(u.at(i, j + 1)) - std::abs(u.at(i, j - 1))) / (2.0 * hy);
      const double uxx = (std::abs(u.at(i + 1, j)) - 2.0 * std::abs(u.at(i, j)) + std::abs(u.at(i - 1, j))) / (hx * hx);
      const double uyy = (std::abs(u.at(i, j + 1)) - 2.0 * std::abs(u.at(i, j)) + std::abs(u.at(i, j - 1))) / (hy * hy);
      const double w_ref = 1.0 + mo.gain * ((ux * ux + uy * uy) / (umax * umax) +
                                            std::abs(uxx + uyy) / umax);
      CHECK(mon.w[g.idx(i, j)] == doctest::Approx(w_ref).epsilon(0.02));
    }
}

TEST_CASE("uniform monitor is a fixed point of redistribution") {
  Grid2D g(48, 48, 3.0);
  MeshMap id = MeshMap::identity(g);
  MonitorField mon;
  mon.grid = g;
  mon.w.assign(g.size(), 1.0);
  MeshMap out = redistribute(id, mon);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    worst = std::max(worst, std::abs(out.x[k] - id.x[k]));
    worst = std::max(worst, std::abs(out.y[k] - id.y[k]));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("concentrated monitor shrinks central cells and equidistributes") {
  Grid2D g(64, 64, 3.0);
  MeshMap mesh = MeshMap::identity(g);
  MonitorField mon = bump_monitor(g, 4.0, 1.0);

  const double var0 = equidistribution_variance(mesh, mon);
  RedistributeOptions opt;
  opt.iters = 200;
  MeshMap out = redistribute(mesh, mon, opt);
  const double var1 = equidistribution_variance(out, mon);
  CHECK(var1 < 0.5 * var0);
  CHECK(cell_area_at_center(out) < cell_area_at_center(mesh));
  CHECK(out.min_jacobian() > 0.0);

  // central cells shrink monotonically as the solve iterates toward the
  // equidistributed state
  double prev_area = cell_area_at_center(mesh);
  for (int iters : {2, 8, 32, 128}) {
    RedistributeOptions ro;
    ro.iters = iters;
    const double area = cell_area_at_center(redistribute(mesh, mon, ro));
    CHECK(area < prev_area);
    prev_area = area;
  }

  // composing against the same physical density stays at the fixed point
  MeshMap cur = out;
  for (int rep = 0; rep < 2; ++rep) {
    MonitorField m2;
    m2.grid = g;
    m2.w.resize(g.size());
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) {
        const std::size_t k = g.idx(i, j);
        const double x = cur.x[k], y = cur.y[k];
        m2.w[k] = 1.0 + 4.0 * std::exp(-(x * x + y * y));
      }
    cur = redistribute(cur, m2, opt);
    CHECK(cell_area_at_center(cur) < 0.5 * cell_area_at_center(mesh));
  }
}

TEST_CASE("over-relaxed solve on a harsh monitor tangles and reports it") {
  Grid2D g(32, 32, 3.0);
  MeshMap mesh = MeshMap::identity(g);
  MonitorField mon;
  mon.grid = g;
  mon.w.resize(g.size());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double x = g.half_width * g.xi(i), y = g.half_width * g.eta(j);
      // razor-sharp unsmoothed spike
      mon.w[g.idx(i, j)] = 1.0 + 1e5 * std::exp(-40.0 * (x * x + y * y));
    }
  RedistributeOptions opt;
  opt.relax = 1.95;
  opt.iters = 400;
  opt.resample_every = 0;
  CHECK_THROWS_AS((void)redistribute(mesh, mon, opt), const MeshTangled&);
}

TEST_CASE("identity remesh transfers the field bit-exactly") {
  Grid2D g(48, 48, 3.0);
  MeshPtr id = identity_mesh(g);
  ComplexField u = gaussian_field(g);
  u.mesh = id;
  InterpolateStats stats;
  ComplexField v = interpolate(u, *id, id, &stats);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(u.values[k] == v.values[k]);
  CHECK(stats.mass_rel_change() == 0.0);
  CHECK(stats.clamped == 0);
}

TEST_CASE("transfer onto a smooth analytic remap converges at high order") {
  auto stretched = [](const Grid2D& g) {
    std::vector<double> xs(g.size()), ys(g.size());
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) {
        const double xi = g.xi(i), eta = g.eta(j);
        xs[g.idx(i, j)] = g.half_width * (xi + 0.25 * xi * (1.0 - xi * xi));
        ys[g.idx(i, j)] = g.half_width * (eta - 0.2 * eta * (1.0 - eta * eta));
      }
    return std::make_shared<const MeshMap>(MeshMap::from_coords(g, std::move(xs), std::move(ys)));
  };
  auto err_at = [&](int n) {
    Grid2D g(n, n, 3.0);
    ComplexField u = gaussian_field(g);
    MeshPtr target = stretched(g);
    ComplexField v = interpolate(u, *u.mesh_or_identity(), target);
    double worst = 0.0;
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) {
        const std::size_t k = g.idx(i, j);
        const double exact = std::exp(-0.5 * (target->x[k] * target->x[k] + target->y[k] * target->y[k]));
        worst = std::max(worst, std::abs(v.values[k] - exact));
      }
    return worst;
  };
  const double e1 = err_at(48), e2 = err_at(96);
  const double order = std::log2(e1 / e2);
  CHECK(order > 3.0);  // bicubic: at least cubic order
  CHECK(e2 < 1e-5);
}

TEST_CASE("remesh round trip returns close to the original field") {
  Grid2D g(160, 160, 3.0);
  ComplexField u = gaussian_field(g, 1.0, 2.0);
  MeshPtr id = u.mesh_or_identity();
  u.mesh = id;

  MonitorField mon = compute_monitor(u);
  MeshPtr adapted = std::make_shared<const MeshMap>(redistribute(*id, mon));
  ComplexField v = interpolate(u, *id, adapted);
  ComplexField w = interpolate(v, *adapted, id);

  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    num += std::norm(w.values[k] - u.values[k]);
    den += std::norm(u.values[k]);
  }
  CHECK(std::sqrt(num / den) < 1e-5);
}

TEST_CASE("mass is conserved through a realistic remesh event") {
  Grid2D g(256, 256, 6.0);
  const RadialProfile& prof = ground_state_cached(2, 3.0);
  ComplexField u = sample_field(g, [&](double x, double y) {
    return Complex(1.7 * prof.value(std::hypot(x, y) / 0.8) / 0.8, 0.0);
  });
  u.mesh = u.mesh_or_identity();
  MonitorField mon = compute_monitor(u);
  MeshPtr adapted = std::make_shared<const MeshMap>(redistribute(*u.mesh, mon));
  InterpolateStats stats;
  (void)interpolate(u, *u.mesh, adapted, &stats);
  CHECK(stats.mass_rel_change() < 1e-6);
}

TEST_CASE("shape criterion: flat fields pass, needles fail the pointwise ratio") {
  Grid2D g(128, 128, 6.0);
  ComplexField flat = sample_field(g, [](double, double) { return Complex(1.0, 0.0); });
  CHECK(shape_ok(flat));
  CHECK(shape_ratio_pointwise(flat) == 0.0);

  const RadialProfile& prof = ground_state_cached(2, 3.0);
  auto needle = [&](double lambda) {
    return sample_field(g, [&](double x, double y) {
      return Complex(prof.value(std::hypot(x, y) / lambda) / lambda, 0.0);
    });
  };
  // wide profile: resolved; narrow: pointwise ratio degrades under sampling
  CHECK(shape_ratio_pointwise(needle(1.5)) > shape_ratio_pointwise(needle(3.0)));

  // integral ratio of a smooth resolved profile stays below the default C
  CHECK(shape_ok(needle(2.0), 5.0));
}

TEST_CASE("adapt_field resolves a needle and then reports shape ok") {
  Grid2D g(96, 96, 6.0);
  const RadialProfile& prof = ground_state_cached(2, 3.0);
  const double lambda = 0.35;
  ComplexField u = sample_field(g, [&](double x, double y) {
    return Complex(prof.value(std::hypot(x, y) / lambda) / lambda, 0.0);
  });
  u.mesh = u.mesh_or_identity();

  const double before = max_cell_jump(u);
  AdaptOptions opt;
  opt.resolve_jump = 0.5 * before;  // force at least one cycle
  AdaptResult res = adapt_field(u, u.mesh, opt);
  CHECK(res.cycles >= 1);
  CHECK(!res.tangled);
  CHECK(max_cell_jump(res.u) < before);
  // the needle starts 2.8 cells wide: transfers are approximate until resolved
  CHECK(res.mass_rel_change < 2e-2);
  CHECK(shape_ok(res.u));
}
