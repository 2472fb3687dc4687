// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace emr {

struct Vec2 {
  double x = 0, y = 0;
};

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
  double xx = 0, xy = 0, yy = 0;
};

// Symmetric 3x3 matrix, (x, y, z) ordering.
struct Sym3 {
  double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;
};

inline double det(const Sym2& m) { return m.xx * m.yy - m.xy * m.xy; }

inline double det(const Sym3& m) {
  return m.xx * (m.yy * m.zz - m.yz * m.yz) - m.xy * (m.xy * m.zz - m.yz * m.xz) +
         m.xz * (m.xy * m.yz - m.yy * m.xz);
}

inline double trace(const Sym2& m) { return m.xx + m.yy; }
inline double trace(const Sym3& m) { return m.xx + m.yy + m.zz; }

inline Sym2 inverse(const Sym2& m) {
  double d = det(m);
  if (d == 0.0 || !std::isfinite(d)) throw std::domain_error("singular covariance");
  return {m.yy / d, -m.xy / d, m.xx / d};
}

inline Sym3 inverse(const Sym3& m) {
  double d = det(m);
  if (d == 0.0 || !std::isfinite(d)) throw std::domain_error("singular covariance");
  Sym3 r;
  r.xx = (m.yy * m.zz - m.yz * m.yz) / d;
  r.xy = (m.xz * m.yz - m.xy * m.zz) / d;
  r.xz = (m.xy * m.yz - m.xz * m.yy) / d;
  r.yy = (m.xx * m.zz - m.xz * m.xz) / d;
  r.yz = (m.xy * m.xz - m.xx * m.yz) / d;
  r.zz = (m.xx * m.yy - m.xy * m.xy) / d;
  return r;
}

// d' M d for symmetric M.
inline double quad_form(const Sym2& m, const Vec2& d) {
  return m.xx * d.x * d.x + 2.0 * m.xy * d.x * d.y + m.yy * d.y * d.y;
}

inline double quad_form(const Sym3& m, const Vec3& d) {
  return m.xx * d.x * d.x + m.yy * d.y * d.y + m.zz * d.z * d.z + 2.0 * m.xy * d.x * d.y +
         2.0 * m.xz * d.x * d.z + 2.0 * m.yz * d.y * d.z;
}

// Lower-triangular Cholesky factor (l00, l10, l11, l20, l21, l22), or nullopt
// when the matrix is not positive definite.
inline std::optional<std::array<double, 6>> cholesky(const Sym3& m) {
  if (!(m.xx > 0)) return std::nullopt;
  double l00 = std::sqrt(m.xx);
  double l10 = m.xy / l00;
  double l20 = m.xz / l00;
  double a11 = m.yy - l10 * l10;
  if (!(a11 > 0)) return std::nullopt;
  double l11 = std::sqrt(a11);
  double l21 = (m.yz - l20 * l10) / l11;
  double a22 = m.zz - l20 * l20 - l21 * l21;
  if (!(a22 > 0)) return std::nullopt;
  return std::array<double, 6>{l00, l10, l11, l20, l21, std::sqrt(a22)};
}

inline bool positive_definite(const Sym3& m) { return cholesky(m).has_value(); }

inline bool positive_definite(const Sym2& m) { return m.xx > 0 && det(m) > 0; }

}  // namespace emr
