#pragma once

// Relaxed energy W^qc(F) = h(x, y, d) + theta(det F), where
// h(x, y, d) = min { g(xi, eta, d) : xi >= x, eta >= y }.
//
// h is evaluated in closed form through the phase boundary phi(y, d), the
// unique root in x > |d|/y of d/dx g(x, y, d) = 0, and the fixed point p(d)
// of phi(., d). The (x, y) plane at fixed d splits into four regions:
//
//   x <  p, y <  p          second-order laminate, h = g(p, p, d)
//   y >= p, x <  phi(y, d)  first-order laminate raising x, h = g(phi(y, d), y, d)
//   x >= p, y <  phi(x, d)  first-order laminate raising y, h = g(x, phi(x, d), d)
//   otherwise               unrelaxed, h = g(x, y, d)
//
// The same formula defines a convex C^1 extension f of h to all of R^3.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <unsupported/Eigen/Polynomials>

#include "qcrelax/energy.hpp"
#include "qcrelax/errors.hpp"
#include "qcrelax/mat2.hpp"
#include "qcrelax/root_finding.hpp"

namespace qcrelax {

inline constexpr double kDefaultSolverTol = 1e-12;
inline constexpr int kSolverIterationCap = 200;

enum class PhaseRegion { SecondOrder, FirstOrderRaiseX, FirstOrderRaiseY, Unrelaxed, Inadmissible };

inline const char* to_string(PhaseRegion r) {
  switch (r) {
    case PhaseRegion::SecondOrder: return "second_order";
    case PhaseRegion::FirstOrderRaiseX: return "first_order_raise_x";
    case PhaseRegion::FirstOrderRaiseY: return "first_order_raise_y";
    case PhaseRegion::Unrelaxed: return "unrelaxed";
    case PhaseRegion::Inadmissible: return "inadmissible";
  }
  return "unknown";
}

inline int lamination_order(PhaseRegion r) {
  switch (r) {
    case PhaseRegion::SecondOrder: return 2;
    case PhaseRegion::FirstOrderRaiseX:
    case PhaseRegion::FirstOrderRaiseY: return 1;
    default: return 0;
  }
}

struct PhiSolve {
  double x_star;
  double residual;  // relative residual of the stationarity equation
  int iterations;
  double lo;
  double hi;
};

namespace detail {

// Bounded per-thread memo table keyed by the exact bit patterns of its inputs.
template <class Value, std::size_t N>
class BitCache {
 public:
  using Key = std::array<std::uint64_t, N>;

  template <class Compute>
  Value get(const std::array<double, N>& args, Compute&& compute) {
    Key key;
    for (std::size_t i = 0; i < N; ++i) key[i] = std::bit_cast<std::uint64_t>(args[i]);
    if (auto it = map_.find(key); it != map_.end()) return it->second;
    Value v = compute();
    if (map_.size() >= kCapacity) map_.clear();
    map_.emplace(key, v);
    return v;
  }

 private:
  static constexpr std::size_t kCapacity = 1u << 16;
  struct Hash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = 0x9e3779b97f4a7c15ull;
      for (auto w : k) h = (h ^ w) * 0x100000001b3ull + (h >> 29);
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<Key, Value, Hash> map_;
};

/// Stationarity residual L + M y^2 / z - 2 sqrt(A) as a function of z > 0,
/// with x = sqrt(z^2 + d^2) / y. Decreasing in z. Parametrising by z keeps
/// the singular end z -> 0 free of cancellation.
inline ResidualSample stationarity_in_z(double z, double y, double d, const WellParams& p) {
  const double L = p.L(), M = p.M();
  const double y2 = y * y;
  const double x2 = (z * z + d * d) / y2;
  const double A = 0.5 * (x2 + y2) * L + M * z + 2.0 * d;
  const double sA = std::sqrt(std::max(0.0, A));
  const double lhs = L + M * y2 / z;
  const double value = lhs - 2.0 * sA;
  const double derivative = -M * y2 / (z * z) - (L * z / y2 + M) / sA;
  return {value, derivative, lhs + 2.0 * sA};
}

inline PhiSolve phi_uncached(double y, double d, const WellParams& p, double tol) {
  if (!(y > 0.0) || !std::isfinite(y)) throw PreconditionViolated("phi requires y > 0");
  if (!(tol > 0.0)) throw PreconditionViolated("phi requires tol > 0");
  const auto res = [&](double z) { return stationarity_in_z(z, y, d, p); };
  const auto z_of_x = [&](double x) {
    return std::sqrt(std::max(0.0, (x * y - std::abs(d)) * (x * y + std::abs(d))));
  };

  double x_hi = std::max(y, std::abs(d) / y) + 1.0;
  double z_hi = z_of_x(x_hi);
  int guard = 0;
  while (res(z_hi).value > 0.0) {
    x_hi *= 2.0;
    z_hi = z_of_x(x_hi);
    if (++guard > kSolverIterationCap) throw ConvergenceFailure("phi: upper bracket not found");
  }
  double z_lo = 0.5 * z_hi;
  guard = 0;
  while (res(z_lo).value <= 0.0) {
    z_hi = z_lo;
    z_lo *= 0.5;
    if (++guard > 4 * kSolverIterationCap) throw ConvergenceFailure("phi: lower bracket not found");
  }
  const RootResult r = solve_bracketed(res, z_lo, z_hi, tol, kSolverIterationCap);
  const auto x_of_z = [&](double z) { return std::sqrt(z * z + d * d) / y; };
  return {x_of_z(r.root), r.residual, r.iterations, x_of_z(r.lo), x_of_z(r.hi)};
}

}  // namespace detail

/// phi(y, d): the unique x in (|d|/y, inf) with d/dx g(x, y, d) = 0.
inline PhiSolve phi(double y, double d, const WellParams& p, double tol = kDefaultSolverTol) {
  thread_local detail::BitCache<PhiSolve, 4> cache;
  return cache.get({p.lambda(), y, d, tol}, [&] { return detail::phi_uncached(y, d, p, tol); });
}

namespace detail {

inline double p_of_d_uncached(double d, const WellParams& p, double tol) {
  if (!(tol > 0.0)) throw PreconditionViolated("p_of_d requires tol > 0");
  const double inner_tol = 1e-2 * tol;
  // psi(y) = phi(y, d) - y is strictly decreasing with a single zero.
  const auto psi = [&](double y) { return phi(y, d, p, inner_tol).x_star - y; };

  double lo = d != 0.0 ? std::sqrt(std::abs(d)) : 1.0;
  int guard = 0;
  while (psi(lo) <= 0.0) {
    lo *= 0.5;
    if (++guard > kSolverIterationCap) throw ConvergenceFailure("p_of_d: lower bracket not found");
  }
  double hi = 2.0 * lo;
  guard = 0;
  while (psi(hi) >= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++guard > kSolverIterationCap) throw ConvergenceFailure("p_of_d: upper bracket not found");
  }
  for (int it = 0; it < kSolverIterationCap; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = psi(mid);
    // Bisect down to the floating-point resolution of the bracket.
    if (s == 0.0 || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      if (std::abs(s) > tol) throw ConvergenceFailure("p_of_d: fixed-point residual above tol");
      return mid;
    }
    (s > 0.0 ? lo : hi) = mid;
  }
  throw ConvergenceFailure("p_of_d: iteration cap reached");
}

}  // namespace detail

/// The unique p > 0 with phi(p, d) = p.
inline double p_of_d(double d, const WellParams& p, double tol = kDefaultSolverTol) {
  thread_local detail::BitCache<double, 3> cache;
  return cache.get({p.lambda(), d, tol}, [&] { return detail::p_of_d_uncached(d, p, tol); });
}

/// Result of evaluating the relaxation at a point: its region, the minimiser
/// (xi*, eta*, d) of g over [x, inf) x [y, inf), and h = g(xi*, eta*, d).
struct RelaxedPoint {
  PhaseRegion region;
  Coords target;
  double value;
};

namespace detail {

inline bool admissible(const Coords& c) {
  if (!(c.x >= 0.0) || !(c.y >= 0.0) || !std::isfinite(c.d)) return false;
  const double rad = (c.x * c.y - std::abs(c.d)) * (c.x * c.y + std::abs(c.d));
  return rad >= -1e-12 * coords_scale(c);
}

// Region precedence on shared boundaries: unrelaxed, then first order, then
// second order. f is continuous, so only the label depends on the choice.
inline RelaxedPoint relax_extended(const Coords& c, const WellParams& p, double tol) {
  const double pd = p_of_d(c.d, p, tol);
  if (c.x < pd && c.y < pd) {
    const Coords t{pd, pd, c.d};
    return {PhaseRegion::SecondOrder, t, g_eval(t, p)};
  }
  if (c.y >= pd) {
    const double xs = phi(c.y, c.d, p, tol).x_star;
    if (c.x < xs) {
      const Coords t{xs, c.y, c.d};
      return {PhaseRegion::FirstOrderRaiseX, t, g_eval(t, p)};
    }
  }
  if (c.x >= pd) {
    const double ys = phi(c.x, c.d, p, tol).x_star;
    if (c.y < ys) {
      const Coords t{c.x, ys, c.d};
      return {PhaseRegion::FirstOrderRaiseY, t, g_eval(t, p)};
    }
  }
  return {PhaseRegion::Unrelaxed, c, g_eval(c, p)};
}

}  // namespace detail

/// Region, minimiser and value of h at an admissible point.
inline RelaxedPoint relax(const Coords& c, const WellParams& p, double tol = kDefaultSolverTol) {
  if (!detail::admissible(c)) throw DomainError("relax: coordinates outside the closure of O");
  return detail::relax_extended(c, p, tol);
}

inline PhaseRegion classify(const Coords& c, const WellParams& p, double tol = kDefaultSolverTol) {
  if (!detail::admissible(c)) return PhaseRegion::Inadmissible;
  return detail::relax_extended(c, p, tol).region;
}

inline double h_eval(const Coords& c, const WellParams& p, double tol = kDefaultSolverTol) {
  return relax(c, p, tol).value;
}

/// The convex extension f of h to R^3 (h = f on the closure of O).
inline double extension_eval(double x, double y, double d, const WellParams& p,
                             double tol = kDefaultSolverTol) {
  return detail::relax_extended({x, y, d}, p, tol).value;
}

inline EnergyValue Wqc_eval(const Mat2& f, const WellParams& p, const ThetaSpec& th) {
  const EnergyValue t = th(f.det());
  if (t.is_infinite()) return t;
  return h_eval(coords(f), p) + t;
}

/// Membership in K^qc = {det F = 1, |F(e1 +- e2)|^2 <= L}.
inline bool kqc_member(const Mat2& f, const WellParams& p, double tol = 1e-9) {
  const Vec2 plus = f * Vec2{1.0, 1.0};
  const Vec2 minus = f * Vec2{1.0, -1.0};
  return std::abs(f.det() - 1.0) <= tol && dot(plus, plus) <= p.L() + tol &&
         dot(minus, minus) <= p.L() + tol;
}

namespace detail {

using Poly = std::vector<double>;  // increasing degree

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

inline Poly poly_sub(Poly a, const Poly& b) {
  if (a.size() < b.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
  return a;
}

inline std::pair<double, double> poly_eval(const Poly& c, double u) {
  double v = 0.0, dv = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) {
    dv = dv * u + v;
    v = v * u + c[i];
  }
  return {v, dv};
}

}  // namespace detail

/// Quartic in u = x^2 obtained by squaring the stationarity equation twice:
/// (L^2 z^2 + M^2 y^4 - G z^2)^2 = (4M z^2 - 2LM y^2)^2 z^2,
/// z^2 = x^2 y^2 - d^2, G = 2L(x^2 + y^2) + 8d. Coefficients in increasing degree.
inline std::vector<double> phi_quartic_coefficients(double y, double d, const WellParams& p) {
  using detail::Poly;
  const double L = p.L(), M = p.M();
  const double y2 = y * y;
  const Poly zsq{-d * d, y2};
  const Poly l2_minus_g{L * L - 2.0 * L * y2 - 8.0 * d, -2.0 * L};
  Poly lhs = detail::poly_mul(l2_minus_g, zsq);
  lhs[0] += M * M * y2 * y2;
  const Poly rhs{-4.0 * M * d * d - 2.0 * L * M * y2, 4.0 * M * y2};
  return detail::poly_sub(detail::poly_mul(lhs, lhs), detail::poly_mul(detail::poly_mul(rhs, rhs), zsq));
}

namespace detail {

/// The same quartic in w = z^2 = y^2 u - d^2. Near xy = |d| the roots are
/// resolved in w rather than in u, so z is available without cancellation.
inline std::vector<double> phi_quartic_coefficients_w(double y, double d, const WellParams& p) {
  const double L = p.L(), M = p.M();
  const double y2 = y * y;
  const double g0 = 2.0 * L * d * d / y2 + 2.0 * L * y2 + 8.0 * d;
  const Poly pw{M * M * y2 * y2, L * L - g0, -2.0 * L / y2};
  const Poly qw{-2.0 * L * M * y2, 4.0 * M};
  return poly_sub(poly_mul(pw, pw), poly_mul(poly_mul(qw, qw), Poly{0.0, 1.0}));
}

/// Real roots w > 0 of the w-quartic. The quartic factors as
/// (P - Q t)(P + Q t) with t = sqrt(w); each root from the companion solver is
/// polished by Newton on both factors, which stay simple where the quartic
/// has a near-double root. Near-real conjugate pairs are taken as real.
inline std::vector<double> phi_quartic_w_roots(double y, double d, const WellParams& p) {
  const std::vector<double> c = phi_quartic_coefficients_w(y, d, p);
  Eigen::Matrix<double, 5, 1> coeffs;
  for (int i = 0; i < 5; ++i) coeffs[i] = c[static_cast<std::size_t>(i)];
  Eigen::PolynomialSolver<double, 4> solver;
  solver.compute(coeffs);

  const double L = p.L(), M = p.M();
  const double y2 = y * y;
  const double g0 = 2.0 * L * d * d / y2 + 2.0 * L * y2 + 8.0 * d;
  const Poly pw{M * M * y2 * y2, L * L - g0, -2.0 * L / y2};
  const Poly qw{-2.0 * L * M * y2, 4.0 * M};
  // f(t) = P(t^2) - sign Q(t^2) t and its derivative.
  const auto factor = [&](double t, double sign) {
    const double w = t * t;
    const auto [pv, pd] = poly_eval(pw, w);
    const auto [qv, qd] = poly_eval(qw, w);
    return std::pair{pv - sign * qv * t, 2.0 * t * pd - sign * (qv + 2.0 * w * qd)};
  };
  const auto polish = [&](double t, double sign) {
    for (int it = 0; it < 50; ++it) {
      const auto [v, dv] = factor(t, sign);
      if (dv == 0.0) break;
      const double step = v / dv;
      t -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(t))) break;
    }
    return t;
  };

  std::vector<double> out;
  const auto add = [&](double w) {
    if (!(w > 0.0)) return;
    for (double o : out)
      if (std::abs(o - w) <= 1e-12 * std::max(1.0, w)) return;
    out.push_back(w);
  };
  for (const std::complex<double>& r : solver.roots()) {
    if (r.imag() < 0.0 || r.real() <= 0.0) continue;
    const bool real = r.imag() <= 1e-6 * std::max(1.0, std::abs(r));
    const bool near_real = r.imag() <= 1e-3 * std::abs(r);
    if (!real && !near_real) continue;
    const double t0 = std::sqrt(r.real());
    for (double sign : {1.0, -1.0}) {
      const double t = polish(t0, sign);
      const double v = factor(t, sign).first;
      const auto [pv, pd] = poly_eval(pw, t * t);
      const auto [qv, qd] = poly_eval(qw, t * t);
      const double size = std::abs(pv) + std::abs(qv * t) + std::abs(pd) + std::abs(qd);
      if (std::isfinite(t) && t > 0.0 && std::abs(v) <= 1e-10 * std::max(1.0, size) &&
          std::abs(t - t0) <= 1e-2 * std::max(1.0, t0))
        add(t * t);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Candidate values of phi(y, d) from the real roots u > d^2/y^2 of the
/// quartic, as x = sqrt(u). May contain spurious roots introduced by squaring.
inline std::vector<double> phi_quartic(double y, double d, const WellParams& p) {
  if (!(y > 0.0)) throw PreconditionViolated("phi_quartic requires y > 0");
  std::vector<double> out;
  for (double w : detail::phi_quartic_w_roots(y, d, p)) {
    const double x = std::sqrt(w + d * d) / y;
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Relative residual of the unsquared stationarity equation at (x, y, d).
inline double stationarity_residual(double x, double y, double d, const WellParams& p) {
  const double z = std::sqrt(std::max(0.0, (x * y - std::abs(d)) * (x * y + std::abs(d))));
  const ResidualSample s = detail::stationarity_in_z(z, y, d, p);
  return s.value / s.scale;
}

/// Quartic candidates that satisfy the unsquared equation. Survivors closer
/// than 1e-9 relative are one numerically double root; the one with the
/// smaller residual is kept.
inline std::vector<double> phi_quartic_filtered(double y, double d, const WellParams& p,
                                                double residual_tol = kDefaultSolverTol) {
  if (!(y > 0.0)) throw PreconditionViolated("phi_quartic_filtered requires y > 0");
  std::vector<std::pair<double, double>> kept;  // (x, |residual|), ascending x
  for (double w : detail::phi_quartic_w_roots(y, d, p)) {
    const ResidualSample s = detail::stationarity_in_z(std::sqrt(w), y, d, p);
    const double res = std::abs(s.value / s.scale);
    if (res > residual_tol) continue;
    const double x = std::sqrt(w + d * d) / y;
    if (!kept.empty() && x - kept.back().first <= 1e-9 * std::max(1.0, x)) {
      if (res < kept.back().second) kept.back() = {x, res};
    } else {
      kept.emplace_back(x, res);
    }
  }
  std::vector<double> out;
  for (const auto& [x, res] : kept) out.push_back(x);
  return out;
}

}  // namespace qcrelax
