#pragma once

// 4th-order derivative operators and quadrature-based norms. Derivatives are
// taken on the computational grid and chain-ruled through the mesh map:
//   u_x = (u_xi y_eta - u_eta y_xi) / J,   u_y = (u_eta x_xi - u_xi x_eta) / J.
// The Laplacian is the composition div(grad u), which keeps a single code
// path for identity and adapted meshes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "rnls/field.hpp"
#include "rnls/parallel.hpp"

namespace rnls {

namespace detail {

// Computational-space partial derivatives of the field values.
inline void comp_derivatives(const Grid2D& g, const std::vector<Complex>& v,
                             std::vector<Complex>& d_xi, std::vector<Complex>& d_eta) {
  d_xi.resize(g.size());
  d_eta.resize(g.size());
  parallel_for(0, g.ny, [&](int j) {
    stencil::d1(v.data() + j, d_xi.data() + j, g.nx, g.ny, g.dxi());
  });
  parallel_for(0, g.nx, [&](int i) {
    stencil::d1(v.data() + i * static_cast<std::ptrdiff_t>(g.ny),
                d_eta.data() + i * static_cast<std::ptrdiff_t>(g.ny), g.ny, 1, g.deta());
  });
}

}  // namespace detail

struct GradientPair {
  ComplexField dx;
  ComplexField dy;
};

inline GradientPair gradient(const ComplexField& f) {
  const Grid2D& g = f.grid;
  GradientPair out{ComplexField(g, f.mesh), ComplexField(g, f.mesh)};
  std::vector<Complex> d_xi, d_eta;
  detail::comp_derivatives(g, f.values, d_xi, d_eta);

  if (!f.mesh || f.mesh->is_identity()) {
    const double inv_l = 1.0 / g.half_width;
    for (std::size_t k = 0; k < g.size(); ++k) {
      out.dx.values[k] = d_xi[k] * inv_l;
      out.dy.values[k] = d_eta[k] * inv_l;
    }
    return out;
  }

  const MeshMap& m = *f.mesh;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double jac = m.jacobian()[k];
    if (jac == 0.0 || !std::isfinite(jac)) throw MeshDegenerate("zero jacobian in gradient");
    const double inv_j = 1.0 / jac;
    out.dx.values[k] = (d_xi[k] * m.y_eta()[k] - d_eta[k] * m.y_xi()[k]) * inv_j;
    out.dy.values[k] = (d_eta[k] * m.x_xi()[k] - d_xi[k] * m.x_eta()[k]) * inv_j;
  }
  return out;
}

inline ComplexField laplacian(const ComplexField& f) {
  const Grid2D& g = f.grid;
  ComplexField out(g, f.mesh);

  if (!f.mesh || f.mesh->is_identity()) {
    // direct second-derivative stencils along each physical axis
    std::vector<Complex> dxx(g.size()), dyy(g.size());
    const double hx = g.half_width * g.dxi();
    const double hy = g.half_width * g.deta();
    parallel_for(0, g.ny, [&](int j) {
      stencil::d2(f.values.data() + j, dxx.data() + j, g.nx, g.ny, hx);
    });
    parallel_for(0, g.nx, [&](int i) {
      stencil::d2(f.values.data() + i * static_cast<std::ptrdiff_t>(g.ny),
                  dyy.data() + i * static_cast<std::ptrdiff_t>(g.ny), g.ny, 1, hy);
    });
    for (std::size_t k = 0; k < g.size(); ++k) out.values[k] = dxx[k] + dyy[k];
    return out;
  }

  // transformed coordinates: compose chain-ruled first derivatives
  GradientPair g1 = gradient(f);
  GradientPair gx = gradient(g1.dx);
  GradientPair gy = gradient(g1.dy);
  for (std::size_t k = 0; k < g.size(); ++k)
    out.values[k] = gx.dx.values[k] + gy.dy.values[k];
  return out;
}

struct Norms {
  double l2 = 0.0;
  double linf = 0.0;
  double grad_l2 = 0.0;
  double weighted_l2 = 0.0;              // || x f ||_2 with physical coordinates
  std::map<double, double> lp;           // requested L^q norms
};

inline double quadrature(const ComplexField& f, const std::function<double(double, double, Complex)>& integrand) {
  const Grid2D& g = f.grid;
  MeshPtr mesh = f.mesh_or_identity();
  double acc = 0.0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.idx(i, j);
      acc += mesh->quad_weight(i, j) * integrand(mesh->x[k], mesh->y[k], f.values[k]);
    }
  return acc;
}

inline Complex quadrature_c(const ComplexField& f,
                            const std::function<Complex(double, double, Complex)>& integrand) {
  const Grid2D& g = f.grid;
  MeshPtr mesh = f.mesh_or_identity();
  Complex acc(0.0, 0.0);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.idx(i, j);
      acc += mesh->quad_weight(i, j) * integrand(mesh->x[k], mesh->y[k], f.values[k]);
    }
  return acc;
}

inline double mass(const ComplexField& f) {
  return quadrature(f, [](double, double, Complex v) { return std::norm(v); });
}

inline Norms norms(const ComplexField& f, const std::vector<double>& lp_orders = {}) {
  if (!f.finite()) throw NonFiniteField("norms");
  Norms out;
  const Grid2D& g = f.grid;
  MeshPtr mesh = f.mesh_or_identity();

  double l2sq = 0.0, wsq = 0.0;
  std::vector<double> lp_acc(lp_orders.size(), 0.0);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.idx(i, j);
      const double w = mesh->quad_weight(i, j);
      const double a2 = std::norm(f.values[k]);
      out.linf = std::max(out.linf, std::sqrt(a2));
      l2sq += w * a2;
      const double x = mesh->x[k], y = mesh->y[k];
      wsq += w * (x * x + y * y) * a2;
      for (std::size_t q = 0; q < lp_orders.size(); ++q)
        lp_acc[q] += w * std::pow(a2, 0.5 * lp_orders[q]);
    }
  out.l2 = std::sqrt(l2sq);
  out.weighted_l2 = std::sqrt(wsq);
  for (std::size_t q = 0; q < lp_orders.size(); ++q)
    out.lp[lp_orders[q]] = std::pow(lp_acc[q], 1.0 / lp_orders[q]);

  GradientPair grad = gradient(f);
  double gsq = 0.0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.idx(i, j);
      gsq += mesh->quad_weight(i, j) * (std::norm(grad.dx.values[k]) + std::norm(grad.dy.values[k]));
    }
  out.grad_l2 = std::sqrt(gsq);
  return out;
}

// Max |f - g| over nodes; fields must share a grid.
inline double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  if (!(a.grid == b.grid)) throw Error("grid mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

}  // namespace rnls
