#pragma once

// Skew-symmetric rotation generator M built from 2x2 blocks Omega_j * sigma,
// sigma = [[0,-1],[1,0]], with a trailing zero row/column in odd dimension.
// exp(tM) is assembled blockwise from (cos, sin), so it is orthogonal to
// machine precision.

#include <cmath>
#include <vector>

#include "rnls/errors.hpp"

namespace rnls {

struct RotationSpec {
  int dim = 2;
  std::vector<double> omegas;  // length floor(dim/2); missing entries are zero

  RotationSpec() = default;
  RotationSpec(int n, std::vector<double> om) : dim(n), omegas(std::move(om)) {
    if (dim < 1) throw Error("rotation dimension must be positive");
    if (omegas.size() > static_cast<std::size_t>(dim / 2))
      throw Error("too many rotation frequencies for dimension");
    omegas.resize(dim / 2, 0.0);
  }

  static RotationSpec none(int n) { return RotationSpec(n, {}); }

  bool is_zero() const {
    for (double w : omegas)
      if (w != 0.0) return false;
    return true;
  }

  // Dense n x n generator, row-major.
  std::vector<double> matrix() const {
    std::vector<double> m(static_cast<std::size_t>(dim) * dim, 0.0);
    for (std::size_t b = 0; b < omegas.size(); ++b) {
      const int i = static_cast<int>(2 * b);
      m[static_cast<std::size_t>(i) * dim + (i + 1)] = -omegas[b];
      m[static_cast<std::size_t>(i + 1) * dim + i] = omegas[b];
    }
    return m;
  }

  // exp(tM), row-major.
  std::vector<double> exp_t(double t) const {
    std::vector<double> m(static_cast<std::size_t>(dim) * dim, 0.0);
    for (int d = 0; d < dim; ++d) m[static_cast<std::size_t>(d) * dim + d] = 1.0;
    for (std::size_t b = 0; b < omegas.size(); ++b) {
      const int i = static_cast<int>(2 * b);
      const double c = std::cos(omegas[b] * t), s = std::sin(omegas[b] * t);
      m[static_cast<std::size_t>(i) * dim + i] = c;
      m[static_cast<std::size_t>(i) * dim + (i + 1)] = -s;
      m[static_cast<std::size_t>(i + 1) * dim + i] = s;
      m[static_cast<std::size_t>(i + 1) * dim + (i + 1)] = c;
    }
    return m;
  }

  // y = exp(tM) x without building the matrix.
  std::vector<double> rotate(double t, const std::vector<double>& x) const {
    std::vector<double> y(x);
    for (std::size_t b = 0; b < omegas.size(); ++b) {
      const std::size_t i = 2 * b;
      const double c = std::cos(omegas[b] * t), s = std::sin(omegas[b] * t);
      y[i] = c * x[i] - s * x[i + 1];
      y[i + 1] = s * x[i] + c * x[i + 1];
    }
    return y;
  }

  // A(x) = M x.
  std::vector<double> a_field(const std::vector<double>& x) const {
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t b = 0; b < omegas.size(); ++b) {
      const std::size_t i = 2 * b;
      y[i] = -omegas[b] * x[i + 1];
      y[i + 1] = omegas[b] * x[i];
    }
    return y;
  }
};

// Effective potential of the magnetic form for gamma < 0:
//   V_eff(x) = -sum_j (gamma^2 + Omega_j^2/4)(x_{2j-1}^2 + x_{2j}^2)
//              - [n odd] gamma^2 x_n^2.
inline double effective_potential(const RotationSpec& rot, double gamma,
                                  const std::vector<double>& x) {
  double v = 0.0;
  for (std::size_t b = 0; b < rot.omegas.size(); ++b) {
    const std::size_t i = 2 * b;
    v -= (gamma * gamma + 0.25 * rot.omegas[b] * rot.omegas[b]) * (x[i] * x[i] + x[i + 1] * x[i + 1]);
  }
  if (rot.dim % 2 == 1) v -= gamma * gamma * x[rot.dim - 1] * x[rot.dim - 1];
  return v;
}

}  // namespace rnls
