#pragma once

// Binary snapshot format.
//
//   bytes 0..3    magic "RNLS"
//   bytes 4..7    version (u32, little endian), currently 1
//   bytes 8..11   nx (u32)
//   bytes 12..15  ny (u32)
//   bytes 16..55  L, t, gamma, p, kappa (f64 each)
//   bytes 56..59  flags (u32), bit 0: mesh block present
//   bytes 60..63  reserved (u32, zero)
//
// followed by nx*ny (re, im) f64 pairs row-major, then, when flagged, two
// nx*ny f64 arrays x(xi,eta) and y(xi,eta).

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>

#include "rnls/field.hpp"

namespace rnls {

static_assert(std::endian::native == std::endian::little,
              "snapshot io assumes a little-endian host");

struct SnapshotMeta {
  double t = 0.0;
  double gamma = 0.0;
  double p = 3.0;
  double kappa = 0.5;
};

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FileHandle = std::unique_ptr<std::FILE, FileCloser>;

inline void put_u32(unsigned char* dst, std::uint32_t v) { std::memcpy(dst, &v, 4); }
inline void put_f64(unsigned char* dst, double v) { std::memcpy(dst, &v, 8); }
inline std::uint32_t get_u32(const unsigned char* src) {
  std::uint32_t v;
  std::memcpy(&v, src, 4);
  return v;
}
inline double get_f64(const unsigned char* src) {
  double v;
  std::memcpy(&v, src, 8);
  return v;
}

}  // namespace detail

inline void write_snapshot(const std::string& path, const ComplexField& f, const SnapshotMeta& meta) {
  detail::FileHandle fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path + " for writing");

  unsigned char header[64] = {};
  std::memcpy(header, "RNLS", 4);
  detail::put_u32(header + 4, 1u);
  detail::put_u32(header + 8, static_cast<std::uint32_t>(f.grid.nx));
  detail::put_u32(header + 12, static_cast<std::uint32_t>(f.grid.ny));
  detail::put_f64(header + 16, f.grid.half_width);
  detail::put_f64(header + 24, meta.t);
  detail::put_f64(header + 32, meta.gamma);
  detail::put_f64(header + 40, meta.p);
  detail::put_f64(header + 48, meta.kappa);
  const bool with_mesh = f.mesh && !f.mesh->is_identity();
  detail::put_u32(header + 56, with_mesh ? 1u : 0u);
  if (std::fwrite(header, 1, 64, fp.get()) != 64) throw IoError("short header write: " + path);

  // std::complex<double> is layout-compatible with (re, im) f64 pairs.
  const std::size_t n = f.values.size();
  if (std::fwrite(f.values.data(), sizeof(Complex), n, fp.get()) != n)
    throw IoError("short data write: " + path);
  if (with_mesh) {
    if (std::fwrite(f.mesh->x.data(), sizeof(double), n, fp.get()) != n ||
        std::fwrite(f.mesh->y.data(), sizeof(double), n, fp.get()) != n)
      throw IoError("short mesh write: " + path);
  }
}

inline ComplexField read_snapshot(const std::string& path, SnapshotMeta* meta_out = nullptr) {
  detail::FileHandle fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);

  unsigned char header[64];
  if (std::fread(header, 1, 64, fp.get()) != 64) throw IoError("short header read: " + path);
  if (std::memcmp(header, "RNLS", 4) != 0) throw IoError("bad magic in " + path);
  if (detail::get_u32(header + 4) != 1u) throw IoError("unsupported snapshot version in " + path);

  const int nx = static_cast<int>(detail::get_u32(header + 8));
  const int ny = static_cast<int>(detail::get_u32(header + 12));
  const double half_width = detail::get_f64(header + 16);
  SnapshotMeta meta;
  meta.t = detail::get_f64(header + 24);
  meta.gamma = detail::get_f64(header + 32);
  meta.p = detail::get_f64(header + 40);
  meta.kappa = detail::get_f64(header + 48);
  const bool with_mesh = (detail::get_u32(header + 56) & 1u) != 0;

  Grid2D grid(nx, ny, half_width);
  ComplexField f(grid);
  const std::size_t n = grid.size();
  if (std::fread(f.values.data(), sizeof(Complex), n, fp.get()) != n)
    throw IoError("short data read: " + path);
  if (with_mesh) {
    std::vector<double> xs(n), ys(n);
    if (std::fread(xs.data(), sizeof(double), n, fp.get()) != n ||
        std::fread(ys.data(), sizeof(double), n, fp.get()) != n)
      throw IoError("short mesh read: " + path);
    f.mesh = std::make_shared<const MeshMap>(MeshMap::from_coords(grid, std::move(xs), std::move(ys)));
  }
  if (meta_out) *meta_out = meta;
  return f;
}

}  // namespace rnls
