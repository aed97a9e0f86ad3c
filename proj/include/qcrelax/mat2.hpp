#pragma once

// 2x2 matrix primitives: signed singular values, the (x, y, d) coordinates
// relative to the diagonal directions v = (1,1)/sqrt2 and w = (1,-1)/sqrt2,
// and the determinant-preserving rank-one lines used for lamination.

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "qcrelax/errors.hpp"

namespace qcrelax {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

inline constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Real 2x2 matrix, row-major.
class Mat2 {
 public:
  constexpr Mat2() = default;
  constexpr Mat2(double a11, double a12, double a21, double a22) : m_{a11, a12, a21, a22} {}

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 diag(double a, double b) { return {a, 0.0, 0.0, b}; }

  constexpr double operator()(int i, int j) const { return m_[2 * i + j]; }
  constexpr double& operator()(int i, int j) { return m_[2 * i + j]; }
  constexpr const std::array<double, 4>& entries() const { return m_; }

  constexpr double det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }
  constexpr double norm_sq() const {
    return m_[0] * m_[0] + m_[1] * m_[1] + m_[2] * m_[2] + m_[3] * m_[3];
  }
  double norm() const { return std::sqrt(norm_sq()); }
  bool finite() const {
    return std::all_of(m_.begin(), m_.end(), [](double e) { return std::isfinite(e); });
  }

  constexpr Vec2 col(int j) const { return {m_[j], m_[2 + j]}; }
  constexpr Mat2 transposed() const { return {m_[0], m_[2], m_[1], m_[3]}; }

  friend constexpr Vec2 operator*(const Mat2& a, Vec2 u) {
    return {a.m_[0] * u.x + a.m_[1] * u.y, a.m_[2] * u.x + a.m_[3] * u.y};
  }
  friend constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0), a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1),
            a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0), a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1)};
  }
  friend constexpr Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.m_[0] + b.m_[0], a.m_[1] + b.m_[1], a.m_[2] + b.m_[2], a.m_[3] + b.m_[3]};
  }
  friend constexpr Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.m_[0] - b.m_[0], a.m_[1] - b.m_[1], a.m_[2] - b.m_[2], a.m_[3] - b.m_[3]};
  }
  friend constexpr Mat2 operator*(double s, const Mat2& a) {
    return {s * a.m_[0], s * a.m_[1], s * a.m_[2], s * a.m_[3]};
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Mat2& a) {
    return os << "[[" << a.m_[0] << ", " << a.m_[1] << "], [" << a.m_[2] << ", " << a.m_[3]
              << "]]";
  }

 private:
  std::array<double, 4> m_{};
};

inline constexpr Mat2 outer(Vec2 a, Vec2 b) { return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y}; }

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr Vec2 kDirV{kInvSqrt2, kInvSqrt2};
inline constexpr Vec2 kDirW{kInvSqrt2, -kInvSqrt2};

/// (x, y, d) = (|Fv|, |Fw|, det F). Lives in the closure of
/// O = {x, y > 0, xy > |d|}.
struct Coords {
  double x = 0.0;
  double y = 0.0;
  double d = 0.0;

  friend constexpr bool operator==(const Coords&, const Coords&) = default;
};

inline Coords coords(const Mat2& f) { return {norm(f * kDirV), norm(f * kDirW), f.det()}; }

/// lam2 >= |lam1| >= 0 and lam1 * lam2 = det F.
struct SignedSingularValues {
  double lam1 = 0.0;
  double lam2 = 0.0;
};

inline SignedSingularValues signed_singular_values(const Mat2& f) {
  const double n2 = f.norm_sq();
  const double det = f.det();
  // lam2 +- lam1 = sqrt(|F|^2 +- 2 det F)
  const double sum = std::sqrt(std::max(0.0, n2 + 2.0 * det));
  const double diff = std::sqrt(std::max(0.0, n2 - 2.0 * det));
  const double lam2 = 0.5 * (sum + diff);
  if (lam2 == 0.0) return {0.0, 0.0};
  // det / lam2 avoids the cancellation in (sum - diff) / 2 for nearly singular F.
  return {det / lam2, lam2};
}

enum class Direction {
  RaiseY,  ///< F(I + t v⊗w): fixes x and det, moves y.
  RaiseX,  ///< F(I + t w⊗v): fixes y and det, moves x.
};

inline const char* to_string(Direction dir) {
  return dir == Direction::RaiseY ? "raise_y" : "raise_x";
}

/// Image of the fixed direction and of the moving direction under F.
/// Along the line, the moving image becomes `moving + t * fixed`.
struct LineImages {
  Vec2 fixed;
  Vec2 moving;
};

inline LineImages line_images(const Mat2& f, Direction dir) {
  return dir == Direction::RaiseY ? LineImages{f * kDirV, f * kDirW}
                                  : LineImages{f * kDirW, f * kDirV};
}

inline Mat2 rank_one_line(const Mat2& f, Direction dir, double t) {
  // F(I + t a⊗b) = F + t (F a)⊗b
  if (dir == Direction::RaiseY) return f + t * outer(f * kDirV, kDirW);
  return f + t * outer(f * kDirW, kDirV);
}

inline bool null_direction(const Mat2& f, Direction dir) {
  const Vec2 image = dir == Direction::RaiseY ? f * kDirV : f * kDirW;
  return norm(image) <= 1e-10 * std::max(1.0, f.norm());
}

/// Replacement line when the image of the fixed direction vanishes:
/// F + t w⊗w (RaiseY) or F + t v⊗v (RaiseX).
inline Mat2 degenerate_line(const Mat2& f, Direction dir, double t) {
  if (!null_direction(f, dir)) {
    throw PreconditionViolated(dir == Direction::RaiseY
                                   ? "degenerate_line(RaiseY) requires Fv = 0"
                                   : "degenerate_line(RaiseX) requires Fw = 0");
  }
  if (dir == Direction::RaiseY) return f + t * outer(kDirW, kDirW);
  return f + t * outer(kDirV, kDirV);
}

}  // namespace qcrelax
