#pragma once

// Uniform computational grid on [-1,1]^2 and the map to physical coordinates.
// The identity map sends (xi, eta) to (L*xi, L*eta), so the physical box is
// [-L,L]^2. Adapted meshes store per-node physical coordinates; metric terms
// and the Jacobian determinant are cached with 4th-order accuracy.

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

#include "rnls/errors.hpp"
#include "rnls/stencil.hpp"

namespace rnls {

struct Grid2D {
  int nx = 0;
  int ny = 0;
  double half_width = 0.0;  // L; physical box is [-L,L]^2 under the identity map

  Grid2D() = default;
  Grid2D(int nx_, int ny_, double half_width_) : nx(nx_), ny(ny_), half_width(half_width_) {
    if (nx < 16 || ny < 16 || nx % 2 != 0 || ny % 2 != 0)
      throw Error("grid sizes must be even and >= 16");
    if (!(half_width > 0.0)) throw Error("half width must be positive");
  }

  double dxi() const { return 2.0 / (nx - 1); }
  double deta() const { return 2.0 / (ny - 1); }
  double xi(int i) const { return -1.0 + i * dxi(); }
  double eta(int j) const { return -1.0 + j * deta(); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * ny + j; }

  bool operator==(const Grid2D& o) const {
    return nx == o.nx && ny == o.ny && half_width == o.half_width;
  }
};

// Physical node coordinates x(xi,eta), y(xi,eta) plus cached metric terms.
// Construct via identity() or from_coords(); both validate the Jacobian.
class MeshMap {
 public:
  Grid2D grid;
  std::vector<double> x, y;  // node coordinates, row-major (i*ny + j)

  static MeshMap identity(const Grid2D& g) {
    MeshMap m;
    m.grid = g;
    m.x.resize(g.size());
    m.y.resize(g.size());
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) {
        m.x[g.idx(i, j)] = g.half_width * g.xi(i);
        m.y[g.idx(i, j)] = g.half_width * g.eta(j);
      }
    m.identity_ = true;
    m.finalize();
    return m;
  }

  static MeshMap from_coords(const Grid2D& g, std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != g.size() || ys.size() != g.size())
      throw Error("mesh coordinate arrays do not match grid");
    MeshMap m;
    m.grid = g;
    m.x = std::move(xs);
    m.y = std::move(ys);
    m.finalize();
    return m;
  }

  bool is_identity() const { return identity_; }

  const std::vector<double>& x_xi() const { return x_xi_; }
  const std::vector<double>& x_eta() const { return x_eta_; }
  const std::vector<double>& y_xi() const { return y_xi_; }
  const std::vector<double>& y_eta() const { return y_eta_; }
  const std::vector<double>& jacobian() const { return jac_; }

  double min_jacobian() const { return jac_min_; }

  // Shortest physical edge over the mesh, used for time-step guards.
  double min_cell() const { return min_cell_; }

  // Trapezoid quadrature weight of node (i,j) including |J|.
  double quad_weight(int i, int j) const {
    const double ci = (i == 0 || i == grid.nx - 1) ? 0.5 : 1.0;
    const double cj = (j == 0 || j == grid.ny - 1) ? 0.5 : 1.0;
    return ci * cj * grid.dxi() * grid.deta() * std::abs(jac_[grid.idx(i, j)]);
  }

 private:
  void finalize() {
    const int nx = grid.nx, ny = grid.ny;
    const std::size_t n = grid.size();
    x_xi_.resize(n);
    x_eta_.resize(n);
    y_xi_.resize(n);
    y_eta_.resize(n);
    jac_.resize(n);
    for (int j = 0; j < ny; ++j) {
      stencil::d1(x.data() + j, x_xi_.data() + j, nx, ny, grid.dxi());
      stencil::d1(y.data() + j, y_xi_.data() + j, nx, ny, grid.dxi());
    }
    for (int i = 0; i < nx; ++i) {
      stencil::d1(x.data() + i * static_cast<std::ptrdiff_t>(ny), x_eta_.data() + i * static_cast<std::ptrdiff_t>(ny), ny, 1, grid.deta());
      stencil::d1(y.data() + i * static_cast<std::ptrdiff_t>(ny), y_eta_.data() + i * static_cast<std::ptrdiff_t>(ny), ny, 1, grid.deta());
    }
    jac_min_ = std::numeric_limits<double>::max();
    for (std::size_t k = 0; k < n; ++k) {
      jac_[k] = x_xi_[k] * y_eta_[k] - x_eta_[k] * y_xi_[k];
      if (!std::isfinite(jac_[k])) throw MeshDegenerate("non-finite jacobian");
      jac_min_ = std::min(jac_min_, jac_[k]);
    }
    min_cell_ = std::numeric_limits<double>::max();
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        const std::size_t k = grid.idx(i, j);
        if (i + 1 < nx) {
          const std::size_t k1 = grid.idx(i + 1, j);
          min_cell_ = std::min(min_cell_, std::hypot(x[k1] - x[k], y[k1] - y[k]));
        }
        if (j + 1 < ny) {
          const std::size_t k1 = grid.idx(i, j + 1);
          min_cell_ = std::min(min_cell_, std::hypot(x[k1] - x[k], y[k1] - y[k]));
        }
      }
  }

  bool identity_ = false;
  std::vector<double> x_xi_, x_eta_, y_xi_, y_eta_, jac_;
  double jac_min_ = 0.0;
  double min_cell_ = 0.0;
};

using MeshPtr = std::shared_ptr<const MeshMap>;

inline MeshPtr identity_mesh(const Grid2D& g) {
  return std::make_shared<const MeshMap>(MeshMap::identity(g));
}

}  // namespace rnls
