#pragma once

// Unrelaxed two-well energy W(F) = dist^2(F, SO(2)U1 ∪ SO(2)U2) + theta(det F)
// and its representation g(x, y, d) in the coordinates of mat2.hpp.

#include <array>
#include <cmath>
#include <compare>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qcrelax/errors.hpp"
#include "qcrelax/mat2.hpp"

namespace qcrelax {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

/// Value in [0, inf] with an explicit infinity.
class EnergyValue {
 public:
  constexpr EnergyValue() = default;
  constexpr explicit EnergyValue(double v) : value_(v) {}
  static constexpr EnergyValue infinity() {
    EnergyValue e;
    e.infinite_ = true;
    return e;
  }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }
  /// Finite value; +inf (IEEE) when infinite, for callers doing plain arithmetic.
  constexpr double value() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend constexpr EnergyValue operator+(EnergyValue a, EnergyValue b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return EnergyValue(a.value_ + b.value_);
  }
  friend constexpr EnergyValue operator+(EnergyValue a, double r) { return a + EnergyValue(r); }
  friend constexpr EnergyValue operator+(double r, EnergyValue a) { return a + EnergyValue(r); }

  friend constexpr bool operator==(EnergyValue a, EnergyValue b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }
  friend constexpr std::partial_ordering operator<=>(EnergyValue a, EnergyValue b) {
    if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
    if (a.infinite_) return std::partial_ordering::greater;
    if (b.infinite_) return std::partial_ordering::less;
    return a.value_ <=> b.value_;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

/// Stretch parameter lambda > 1 and the derived well constants.
class WellParams {
 public:
  explicit WellParams(double lambda) : lambda_(lambda) {
    if (!(lambda > 1.0) || !std::isfinite(lambda)) {
      throw PreconditionViolated("well parameter lambda must be finite and > 1, got " +
                                 std::to_string(lambda));
    }
    const double l2 = lambda * lambda;
    L_ = l2 + 1.0 / l2;
    M_ = l2 - 1.0 / l2;
  }

  double lambda() const { return lambda_; }
  /// |U1|^2 = lambda^2 + lambda^-2.
  double L() const { return L_; }
  /// lambda^2 - lambda^-2.
  double M() const { return M_; }
  Mat2 U1() const { return Mat2::diag(lambda_, 1.0 / lambda_); }
  Mat2 U2() const { return Mat2::diag(1.0 / lambda_, lambda_); }
  double norm_U1_sq() const { return L_; }

 private:
  double lambda_;
  double L_ = 0.0;
  double M_ = 0.0;
};

/// Convex, lower semicontinuous volumetric penalty theta: R -> [0, inf].
class ThetaSpec {
 public:
  enum class Variant { Zero, IndicatorDetOne, LogSquared, TableConvex };

  struct Knot {
    double t;
    double value;
  };

  static ThetaSpec zero() { return ThetaSpec(Variant::Zero); }
  /// 0 at t = 1 and inf elsewhere. `tol` absorbs rounding in det F.
  static ThetaSpec indicator_det_one(double tol = 1e-9) {
    ThetaSpec s(Variant::IndicatorDetOne);
    s.indicator_tol_ = tol;
    return s;
  }
  /// log^2(t) for t > 0, inf for t <= 0.
  static ThetaSpec log_squared() { return ThetaSpec(Variant::LogSquared); }

  /// Piecewise-linear interpolation of `knots` (strictly increasing t, finite
  /// values >= 0, nondecreasing slopes). Outside [t_first, t_last] the function
  /// is inf, unless the corresponding side is extended linearly with the end slope.
  static ThetaSpec table(std::vector<Knot> knots, bool extend_left = false,
                         bool extend_right = false) {
    if (knots.empty()) throw PreconditionViolated("theta table needs at least one knot");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!std::isfinite(knots[i].t) || !std::isfinite(knots[i].value) || knots[i].value < 0.0)
        throw PreconditionViolated("theta table knots must be finite with values >= 0");
      if (i > 0 && !(knots[i].t > knots[i - 1].t))
        throw PreconditionViolated("theta table abscissae must be strictly increasing");
    }
    std::vector<double> slopes;
    for (std::size_t i = 1; i < knots.size(); ++i)
      slopes.push_back((knots[i].value - knots[i - 1].value) / (knots[i].t - knots[i - 1].t));
    for (std::size_t i = 1; i < slopes.size(); ++i) {
      if (slopes[i] < slopes[i - 1] - 1e-12 * std::max(1.0, std::abs(slopes[i - 1])))
        throw PreconditionViolated("theta table is not convex");
    }
    const double first = slopes.empty() ? 0.0 : slopes.front();
    const double last = slopes.empty() ? 0.0 : slopes.back();
    if (extend_left && first > 0.0)
      throw PreconditionViolated("left extension with positive slope leaves [0, inf]");
    if (extend_right && last < 0.0)
      throw PreconditionViolated("right extension with negative slope leaves [0, inf]");
    ThetaSpec s(Variant::TableConvex);
    s.knots_ = std::move(knots);
    s.extend_left_ = extend_left;
    s.extend_right_ = extend_right;
    s.first_slope_ = first;
    s.last_slope_ = last;
    return s;
  }

  Variant variant() const { return variant_; }
  const std::vector<Knot>& knots() const { return knots_; }

  EnergyValue operator()(double t) const {
    switch (variant_) {
      case Variant::Zero:
        return EnergyValue(0.0);
      case Variant::IndicatorDetOne:
        return std::abs(t - 1.0) <= indicator_tol_ ? EnergyValue(0.0) : EnergyValue::infinity();
      case Variant::LogSquared: {
        if (!(t > 0.0)) return EnergyValue::infinity();
        const double l = std::log(t);
        return EnergyValue(l * l);
      }
      case Variant::TableConvex:
        return eval_table(t);
    }
    return EnergyValue::infinity();
  }

 private:
  explicit ThetaSpec(Variant v) : variant_(v) {}

  EnergyValue eval_table(double t) const {
    const Knot& lo = knots_.front();
    const Knot& hi = knots_.back();
    if (t < lo.t) {
      if (!extend_left_) return EnergyValue::infinity();
      return EnergyValue(lo.value + first_slope_ * (t - lo.t));
    }
    if (t > hi.t) {
      if (!extend_right_) return EnergyValue::infinity();
      return EnergyValue(hi.value + last_slope_ * (t - hi.t));
    }
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      if (t <= knots_[i].t) {
        const Knot& a = knots_[i - 1];
        const Knot& b = knots_[i];
        const double s = (t - a.t) / (b.t - a.t);
        return EnergyValue(a.value + s * (b.value - a.value));
      }
    }
    return EnergyValue(hi.value);
  }

  Variant variant_;
  double indicator_tol_ = 1e-9;
  std::vector<Knot> knots_;
  bool extend_left_ = false;
  bool extend_right_ = false;
  double first_slope_ = 0.0;
  double last_slope_ = 0.0;
};

inline EnergyValue theta_eval(const ThetaSpec& spec, double t) { return spec(t); }

/// min over i and rotations Q of |F - Q U_i|^2, via the signed singular values
/// of F U_i: |F|^2 + L - 2 max_i sqrt(|F U_i|^2 + 2 det F).
inline double dist2_two_wells(const Mat2& f, const WellParams& p) {
  const double l = p.lambda();
  const double c1 = f.col(0).x * f.col(0).x + f.col(0).y * f.col(0).y;
  const double c2 = f.col(1).x * f.col(1).x + f.col(1).y * f.col(1).y;
  const double det = f.det();
  const double fu1 = l * l * c1 + c2 / (l * l);
  const double fu2 = c1 / (l * l) + l * l * c2;
  const double rad = std::max(0.0, std::max(fu1, fu2) + 2.0 * det);
  return std::max(0.0, f.norm_sq() + p.L() - 2.0 * std::sqrt(rad));
}

namespace detail {

inline double coords_scale(const Coords& c) { return std::max({1.0, c.x * c.x * c.y * c.y, c.d * c.d}); }

/// z = sqrt(x^2 y^2 - d^2); tiny negative radicands from rounding are clamped.
inline double z_of(const Coords& c) {
  if (c.x < 0.0 || c.y < 0.0)
    throw DomainError("coordinates x, y must be nonnegative");
  const double xy = c.x * c.y;
  const double rad = (xy - std::abs(c.d)) * (xy + std::abs(c.d));
  if (rad < 0.0) {
    if (rad < -1e-12 * coords_scale(c))
      throw DomainError("coordinates outside the admissible set: xy < |d|");
    return 0.0;
  }
  return std::sqrt(rad);
}

}  // namespace detail

/// A(x, y, d) = (x^2 + y^2) L / 2 + M z + 2d.
inline double A_eval(const Coords& c, const WellParams& p) {
  const double z = detail::z_of(c);
  return 0.5 * (c.x * c.x + c.y * c.y) * p.L() + p.M() * z + 2.0 * c.d;
}

/// g(x, y, d) = x^2 + y^2 + L - 2 sqrt(A); equals dist2_two_wells(F) at coords(F).
inline double g_eval(const Coords& c, const WellParams& p) {
  const double a = std::max(0.0, A_eval(c, p));
  return c.x * c.x + c.y * c.y + p.L() - 2.0 * std::sqrt(a);
}

struct ADerivatives {
  double A;
  double z;
  Vec3 grad;
  Mat3 hess;
};

/// A with its gradient and Hessian in (x, y, d). Requires z > 0.
inline ADerivatives A_derivatives(const Coords& c, const WellParams& p) {
  const double z = detail::z_of(c);
  if (!(z > 0.0))
    throw DomainError("derivatives of A are singular on the boundary xy = |d|");
  const double L = p.L(), M = p.M();
  const double x = c.x, y = c.y, d = c.d;
  ADerivatives r;
  r.z = z;
  r.A = 0.5 * (x * x + y * y) * L + M * z + 2.0 * d;
  const double ax = x * L + M * x * y * y / z;
  const double ay = y * L + M * y * x * x / z;
  const double ad = 2.0 - M * d / z;
  r.grad = {ax, ay, ad};
  const double k = M / (z * z * z);
  const double bxx = x * x * y * y * y * y;
  const double bxy = 2.0 * d * d * x * y - x * x * x * y * y * y;
  const double bxd = -d * x * y * y;
  const double byy = x * x * x * x * y * y;
  const double byd = -d * x * x * y;
  const double bdd = x * x * y * y;
  r.hess = {{{L + M * y * y / z - k * bxx, -k * bxy, -k * bxd},
             {-k * bxy, L + M * x * x / z - k * byy, -k * byd},
             {-k * bxd, -k * byd, -k * bdd}}};
  return r;
}

/// Dg = D(x^2 + y^2) - DA / sqrt(A). Requires z > 0.
inline Vec3 g_gradient(const Coords& c, const WellParams& p) {
  const ADerivatives a = A_derivatives(c, p);
  const double s = std::sqrt(a.A);
  return {2.0 * c.x - a.grad[0] / s, 2.0 * c.y - a.grad[1] / s, -a.grad[2] / s};
}

/// D^2 g = 2(e1⊗e1 + e2⊗e2) - D^2A / sqrt(A) + DA⊗DA / (2 A^{3/2}).
inline Mat3 g_hessian(const Coords& c, const WellParams& p) {
  const ADerivatives a = A_derivatives(c, p);
  const double s = std::sqrt(a.A);
  const double s3 = 2.0 * a.A * s;
  Mat3 h{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      h[i][j] = -a.hess[i][j] / s + a.grad[i] * a.grad[j] / s3;
  h[0][0] += 2.0;
  h[1][1] += 2.0;
  return h;
}

inline EnergyValue W_eval(const Mat2& f, const WellParams& p, const ThetaSpec& th) {
  return dist2_two_wells(f, p) + th(f.det());
}

}  // namespace qcrelax
