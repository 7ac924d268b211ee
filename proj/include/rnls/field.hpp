#pragma once

// Complex field samples on a grid plus the physical parameter set.

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "rnls/errors.hpp"
#include "rnls/grid.hpp"

namespace rnls {

using Complex = std::complex<double>;

class ComplexField {
 public:
  Grid2D grid;
  MeshPtr mesh;  // null means identity map
  std::vector<Complex> values;

  ComplexField() = default;
  explicit ComplexField(const Grid2D& g, MeshPtr m = nullptr)
      : grid(g), mesh(std::move(m)), values(g.size(), Complex(0.0, 0.0)) {
    if (mesh && !(mesh->grid == grid)) throw Error("field/mesh grid mismatch");
  }

  const MeshMap& mesh_ref() const {
    if (!mesh) throw Error("field has no mesh attached");
    return *mesh;
  }

  // Attach-on-demand identity mesh. Fields built without a mesh get one here.
  MeshPtr mesh_or_identity() const {
    if (mesh) return mesh;
    return identity_mesh(grid);
  }

  Complex& at(int i, int j) { return values[grid.idx(i, j)]; }
  const Complex& at(int i, int j) const { return values[grid.idx(i, j)]; }

  double node_x(int i, int j) const {
    return mesh ? mesh->x[grid.idx(i, j)] : grid.half_width * grid.xi(i);
  }
  double node_y(int i, int j) const {
    return mesh ? mesh->y[grid.idx(i, j)] : grid.half_width * grid.eta(j);
  }

  bool finite() const {
    for (const Complex& v : values)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }
};

// Sample f(x, y) at the physical nodes.
inline ComplexField sample_field(const Grid2D& g, MeshPtr mesh,
                                 const std::function<Complex(double, double)>& f) {
  ComplexField out(g, std::move(mesh));
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) out.at(i, j) = f(out.node_x(i, j), out.node_y(i, j));
  return out;
}

inline ComplexField sample_field(const Grid2D& g,
                                 const std::function<Complex(double, double)>& f) {
  return sample_field(g, nullptr, f);
}

// Physical parameters of the evolution equation
//   i u_t = -kappa Lap u + sgn(gamma) gamma^2 |x|^2 u + mu |u|^(p-1) u + i (Mx).grad u.
// mu = -1 is the focusing sign; mu = 0 switches the nonlinearity off for
// linear diagnostic runs.
struct SimParams {
  int dim = 2;               // 2 for the grid solver; 1..12 for closed-form evaluators
  double p = 3.0;            // nonlinearity power
  double gamma = 0.0;        // potential sgn(gamma) gamma^2 |x|^2
  std::vector<double> omega; // rotation frequencies, size floor(dim/2); empty = no rotation
  double kappa = 1.0;        // kinetic coefficient, 1 or 1/2
  double mu = -1.0;          // -1 focusing, +1 defocusing, 0 linear
  std::string boundary = "dirichlet";
  double tol = 1e-8;

  bool mass_critical() const { return std::abs(p - (1.0 + 4.0 / dim)) < 1e-12; }
  bool rotating() const {
    for (double w : omega)
      if (w != 0.0) return true;
    return false;
  }
  double potential(double x, double y) const {
    if (gamma == 0.0) return 0.0;
    const double s = gamma > 0 ? 1.0 : -1.0;
    return s * gamma * gamma * (x * x + y * y);
  }

  void validate() const {
    if (dim < 1 || dim > 12) throw Error("dim must be in 1..12");
    if (!(p >= 1.0)) throw Error("power p must be >= 1");
    if (kappa != 1.0 && kappa != 0.5) throw Error("kappa must be 1 or 1/2");
    if (mu != -1.0 && mu != 1.0 && mu != 0.0) throw Error("mu must be -1, +1 or 0");
    if (omega.size() > static_cast<std::size_t>(dim / 2)) throw Error("too many rotation frequencies");
    if (boundary != "dirichlet") throw Error("only dirichlet boundaries are supported");
  }
};

}  // namespace rnls
