#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "rnls/fd_ops.hpp"
#include "rnls/snapshot.hpp"

using namespace rnls;

namespace {

// Largest |error| over interior nodes (skips the one-sided boundary bands).
double max_interior_err(const ComplexField& got, const std::function<Complex(double, double)>& want,
                        int skip = 4) {
  double m = 0.0;
  for (int i = skip; i < got.grid.nx - skip; ++i)
    for (int j = skip; j < got.grid.ny - skip; ++j)
      m = std::max(m, std::abs(got.at(i, j) - want(got.node_x(i, j), got.node_y(i, j))));
  return m;
}

MeshPtr stretched_mesh(const Grid2D& g, double strength = 0.3) {
  std::vector<double> xs(g.size()), ys(g.size());
  const double L = g.half_width;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double xi = g.xi(i), eta = g.eta(j);
      xs[g.idx(i, j)] = L * (xi + strength * xi * (1.0 - xi * xi));
      ys[g.idx(i, j)] = L * (eta - strength * 0.7 * eta * (1.0 - eta * eta));
    }
  return std::make_shared<const MeshMap>(MeshMap::from_coords(g, std::move(xs), std::move(ys)));
}

}  // namespace

TEST_CASE("gradient is exact on quadratics over the identity mesh") {
  Grid2D g(64, 64, 3.0);
  ComplexField f = sample_field(g, [](double x, double) { return Complex(x * x, 0.0); });
  GradientPair grad = gradient(f);
  CHECK(max_interior_err(grad.dx, [](double x, double) { return Complex(2.0 * x, 0.0); }, 0) < 1e-11);
  CHECK(max_interior_err(grad.dy, [](double, double) { return Complex(0.0, 0.0); }, 0) < 1e-11);
}

TEST_CASE("gradient of a constant vanishes identically") {
  Grid2D g(32, 48, 2.0);
  ComplexField f = sample_field(g, [](double, double) { return Complex(1.25, -0.5); });
  GradientPair grad = gradient(f);
  CHECK(max_interior_err(grad.dx, [](double, double) { return Complex(0.0, 0.0); }, 0) == 0.0);
  CHECK(max_interior_err(grad.dy, [](double, double) { return Complex(0.0, 0.0); }, 0) == 0.0);
}

TEST_CASE("gradient converges at 4th order on sin(x)") {
  const double L = 10.0;
  auto err_at = [&](int n) {
    Grid2D g(n, n, L);
    ComplexField f = sample_field(g, [](double x, double) { return Complex(std::sin(x), 0.0); });
    GradientPair grad = gradient(f);
    return max_interior_err(grad.dx, [](double x, double) { return Complex(std::cos(x), 0.0); });
  };
  const double e1 = err_at(128), e2 = err_at(256);
  const double order = std::log2(e1 / e2);
  CHECK(order == doctest::Approx(4.0).epsilon(0.05));
  CHECK(e2 < 1e-5);
}

TEST_CASE("laplacian: quadratic exact, constant zero, gaussian at 4th order") {
  Grid2D g(64, 64, 3.0);
  ComplexField f = sample_field(g, [](double x, double y) { return Complex(x * x + y * y, 0.0); });
  ComplexField lap = laplacian(f);
  CHECK(max_interior_err(lap, [](double, double) { return Complex(4.0, 0.0); }, 0) < 1e-9);

  ComplexField c = sample_field(g, [](double, double) { return Complex(0.7, 0.0); });
  CHECK(max_interior_err(laplacian(c), [](double, double) { return Complex(0.0, 0.0); }, 0) < 1e-11);

  auto err_at = [&](int n) {
    Grid2D gg(n, n, 6.0);
    ComplexField u = sample_field(gg, [](double x, double y) { return Complex(std::exp(-x * x - y * y), 0.0); });
    ComplexField l = laplacian(u);
    return max_interior_err(l, [](double x, double y) {
      const double r2 = x * x + y * y;
      return Complex((4.0 * r2 - 4.0) * std::exp(-r2), 0.0);
    });
  };
  const double order = std::log2(err_at(96) / err_at(192));
  CHECK(order == doctest::Approx(4.0).epsilon(0.06));
}

TEST_CASE("gradient chain rule through a smooth non-identity mesh") {
  auto err_at = [&](int n) {
    Grid2D g(n, n, 4.0);
    ComplexField f = sample_field(g, stretched_mesh(g),
                                  [](double x, double y) { return Complex(std::sin(x) * std::cos(y), 0.0); });
    GradientPair grad = gradient(f);
    return max_interior_err(grad.dx,
                            [](double x, double y) { return Complex(std::cos(x) * std::cos(y), 0.0); });
  };
  const double order = std::log2(err_at(96) / err_at(192));
  CHECK(order > 3.8);
  CHECK(order < 4.4);
}

TEST_CASE("degenerate mesh jacobian is rejected by gradient") {
  Grid2D g(16, 16, 1.0);
  // a flat map has zero jacobian everywhere: gradient must refuse it
  std::vector<double> xs2(g.size()), ys2(g.size());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      xs2[g.idx(i, j)] = g.xi(i);
      ys2[g.idx(i, j)] = 0.0;  // eta direction collapsed
    }
  auto mesh = std::make_shared<const MeshMap>(MeshMap::from_coords(g, std::move(xs2), std::move(ys2)));
  ComplexField f(g, mesh);
  CHECK_THROWS_AS((void)gradient(f), const MeshDegenerate&);
}

TEST_CASE("norms of the unit gaussian and the zero field") {
  Grid2D g(192, 192, 10.0);
  ComplexField f = sample_field(g, [](double x, double y) {
    return Complex(std::exp(-(x * x + y * y) / 2.0), 0.0);
  });
  Norms nm = norms(f, {4.0});
  CHECK(nm.l2 * nm.l2 == doctest::Approx(M_PI).epsilon(1e-8));
  // || grad f ||^2 = pi, || x f ||^2 = pi for the unit gaussian in 2d
  CHECK(nm.grad_l2 * nm.grad_l2 == doctest::Approx(M_PI).epsilon(1e-4));
  CHECK(nm.weighted_l2 * nm.weighted_l2 == doctest::Approx(M_PI).epsilon(1e-8));
  // even grids do not sample the origin; the peak sits half a cell away
  CHECK(nm.linf == doctest::Approx(std::exp(-(g.half_width * g.dxi()) * (g.half_width * g.dxi()) / 4.0)).epsilon(1e-12));
  // || f ||_4^4 = pi/2
  CHECK(std::pow(nm.lp[4.0], 4.0) == doctest::Approx(M_PI / 2.0).epsilon(1e-8));

  ComplexField z(g);
  Norms zn = norms(z);
  CHECK(zn.l2 == 0.0);
  CHECK(zn.linf == 0.0);
  CHECK(zn.grad_l2 == 0.0);
  CHECK(zn.weighted_l2 == 0.0);
}

TEST_CASE("norms reject non-finite fields") {
  Grid2D g(16, 16, 1.0);
  ComplexField f(g);
  f.at(3, 3) = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK_THROWS_AS((void)norms(f), const NonFiniteField&);
}

TEST_CASE("quadrature is invariant under an orientation-reversing relabel") {
  Grid2D g(48, 48, 5.0);
  auto fn = [](double x, double y) {
    return Complex(std::exp(-x * x - 0.5 * y * y), 0.3 * std::exp(-0.7 * (x * x + y * y)));
  };
  ComplexField a = sample_field(g, fn);

  // relabel xi -> -xi: same physical samples, reversed index order
  std::vector<double> xs(g.size()), ys(g.size());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      xs[g.idx(i, j)] = g.half_width * g.xi(g.nx - 1 - i);
      ys[g.idx(i, j)] = g.half_width * g.eta(j);
    }
  auto mesh = std::make_shared<const MeshMap>(MeshMap::from_coords(g, std::move(xs), std::move(ys)));
  ComplexField b = sample_field(g, mesh, fn);

  Norms na = norms(a, {4.0});
  Norms nb = norms(b, {4.0});
  CHECK(nb.l2 == doctest::Approx(na.l2).epsilon(1e-10));
  CHECK(nb.weighted_l2 == doctest::Approx(na.weighted_l2).epsilon(1e-10));
  CHECK(nb.lp[4.0] == doctest::Approx(na.lp[4.0]).epsilon(1e-10));
  CHECK(nb.grad_l2 == doctest::Approx(na.grad_l2).epsilon(1e-9));
}

TEST_CASE("gradient is linear") {
  Grid2D g(32, 32, 2.0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ComplexField f(g), h(g);
  for (auto& v : f.values) v = Complex(dist(rng), dist(rng));
  for (auto& v : h.values) v = Complex(dist(rng), dist(rng));
  const Complex alpha(0.7, -0.2), beta(-1.3, 0.4);

  ComplexField mix(g);
  for (std::size_t k = 0; k < g.size(); ++k) mix.values[k] = alpha * f.values[k] + beta * h.values[k];

  GradientPair gm = gradient(mix), gf = gradient(f), gh = gradient(h);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    worst = std::max(worst, std::abs(gm.dx.values[k] - alpha * gf.dx.values[k] - beta * gh.dx.values[k]));
    worst = std::max(worst, std::abs(gm.dy.values[k] - alpha * gf.dy.values[k] - beta * gh.dy.values[k]));
  }
  // raw samples are O(1) but derivatives scale with 1/h
  CHECK(worst < 1e-10 / g.dxi());
}

TEST_CASE("snapshot round-trips bit-exactly, with and without mesh") {
  Grid2D g(24, 32, 2.5);
  ComplexField f = sample_field(g, [](double x, double y) { return Complex(x - y, x * y); });
  SnapshotMeta meta;
  meta.t = 0.125;
  meta.gamma = -1.0;
  meta.p = 3.0;
  meta.kappa = 0.5;

  const std::string path = "snapshot_test.rnls";
  write_snapshot(path, f, meta);
  SnapshotMeta back;
  ComplexField f2 = read_snapshot(path, &back);
  CHECK(f2.grid.nx == g.nx);
  CHECK(f2.grid.ny == g.ny);
  CHECK(f2.grid.half_width == g.half_width);
  CHECK(back.t == meta.t);
  CHECK(back.gamma == meta.gamma);
  CHECK(back.kappa == meta.kappa);
  REQUIRE(f2.values.size() == f.values.size());
  for (std::size_t k = 0; k < f.values.size(); ++k) CHECK(f.values[k] == f2.values[k]);
  CHECK(!f2.mesh);

  ComplexField fm = sample_field(g, stretched_mesh(g), [](double x, double y) { return Complex(x, y); });
  write_snapshot(path, fm, meta);
  ComplexField fm2 = read_snapshot(path);
  REQUIRE(fm2.mesh);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(fm2.mesh->x[k] == fm.mesh->x[k]);
    CHECK(fm2.mesh->y[k] == fm.mesh->y[k]);
  }
  std::remove(path.c_str());
}
