#pragma once

// Raw 4th-order finite-difference stencils on uniformly spaced samples.
// Interior points use the 5-point central stencil; the two points next to
// each end use one-sided 5-point stencils of the same order.

#include <cstddef>

namespace rnls::stencil {

// d/ds of a strided sequence: dst[k] = f'(s_k), n >= 5 samples, spacing h.
// T is double or std::complex<double>.
template <class T>
inline void d1(const T* src, T* dst, int n, std::ptrdiff_t stride, double h) {
  const double c = 1.0 / (12.0 * h);
  auto at = [&](int k) -> const T& { return src[k * stride]; };

  dst[0 * stride] = (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) * c;
  dst[1 * stride] = (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4)) * c;
  for (int k = 2; k < n - 2; ++k) {
    dst[k * stride] = (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) * c;
  }
  dst[(n - 2) * stride] =
      (3.0 * at(n - 1) + 10.0 * at(n - 2) - 18.0 * at(n - 3) + 6.0 * at(n - 4) - at(n - 5)) * c;
  dst[(n - 1) * stride] =
      (25.0 * at(n - 1) - 48.0 * at(n - 2) + 36.0 * at(n - 3) - 16.0 * at(n - 4) + 3.0 * at(n - 5)) * c;
}

// d^2/ds^2, same layout. One-sided closures keep 4th order at the ends.
template <class T>
inline void d2(const T* src, T* dst, int n, std::ptrdiff_t stride, double h) {
  const double c = 1.0 / (12.0 * h * h);
  auto at = [&](int k) -> const T& { return src[k * stride]; };

  dst[0 * stride] = (45.0 * at(0) - 154.0 * at(1) + 214.0 * at(2) - 156.0 * at(3) +
                     61.0 * at(4) - 10.0 * at(5)) * c;
  dst[1 * stride] =
      (10.0 * at(0) - 15.0 * at(1) - 4.0 * at(2) + 14.0 * at(3) - 6.0 * at(4) + at(5)) * c;
  for (int k = 2; k < n - 2; ++k) {
    dst[k * stride] =
        (-at(k - 2) + 16.0 * at(k - 1) - 30.0 * at(k) + 16.0 * at(k + 1) - at(k + 2)) * c;
  }
  dst[(n - 2) * stride] = (10.0 * at(n - 1) - 15.0 * at(n - 2) - 4.0 * at(n - 3) +
                           14.0 * at(n - 4) - 6.0 * at(n - 5) + at(n - 6)) * c;
  dst[(n - 1) * stride] = (45.0 * at(n - 1) - 154.0 * at(n - 2) + 214.0 * at(n - 3) -
                           156.0 * at(n - 4) + 61.0 * at(n - 5) - 10.0 * at(n - 6)) * c;
}

}  // namespace rnls::stencil
