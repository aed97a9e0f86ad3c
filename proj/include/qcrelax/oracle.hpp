#pragma once

// Brute-force references used to check the closed forms: an angle scan for
// the distance to the wells, grid minimisation for h, and sampled probes of
// the positivity statements behind the convexity of the relaxed energy.
//
// The closed forms under test are only used to place samples: oracle_h's
// box-size guard (p_of_d), the rejection sampler for V (classify) and the
// stationary points of the mixed-partial probe (phi).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "qcrelax/energy.hpp"
#include "qcrelax/errors.hpp"
#include "qcrelax/mat2.hpp"
#include "qcrelax/random.hpp"
#include "qcrelax/relaxation.hpp"

namespace qcrelax {

struct GridSpec {
  double extent;
  int n;
  int refine_levels;

  void validate() const {
    if (!(extent > 0.0) || n < 2 || refine_levels < 0)
      throw PreconditionViolated("GridSpec requires extent > 0, n >= 2, refine_levels >= 0");
  }
};

inline Mat2 rotation(double alpha) {
  const double c = std::cos(alpha), s = std::sin(alpha);
  return {c, -s, s, c};
}

namespace detail {

template <class Fn>
double golden_section_min(Fn&& fn, double a, double b, int iterations = 100) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = fn(c), fd = fn(d);
  for (int i = 0; i < iterations && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fn(d);
    }
  }
  return std::min(fc, fd);
}

}  // namespace detail

/// min over i and alpha of |F - Q(alpha) U_i|^2 on a uniform grid of
/// `n_angles` angles, optionally refined by golden section around the best.
inline double oracle_dist2(const Mat2& f, const WellParams& p, int n_angles, bool refine = true) {
  if (n_angles < 8) throw PreconditionViolated("oracle_dist2 requires n_angles >= 8");
  const double step = 2.0 * std::numbers::pi / n_angles;
  thread_local std::vector<Mat2> table;
  if (table.size() != static_cast<std::size_t>(n_angles)) {
    table.resize(static_cast<std::size_t>(n_angles));
    for (int k = 0; k < n_angles; ++k) table[static_cast<std::size_t>(k)] = rotation(k * step);
  }
  double best = std::numeric_limits<double>::infinity();
  for (const Mat2& u : {p.U1(), p.U2()}) {
    const auto dist = [&](double alpha) { return (f - rotation(alpha) * u).norm_sq(); };
    double local = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int k = 0; k < n_angles; ++k) {
      const double v = (f - table[static_cast<std::size_t>(k)] * u).norm_sq();
      if (v < local) {
        local = v;
        arg = k;
      }
    }
    if (refine) local = std::min(local, detail::golden_section_min(dist, (arg - 1) * step, (arg + 1) * step));
    best = std::min(best, local);
  }
  return best;
}

/// Minimum of g over [x, x + extent] x [y, y + extent] on an n x n grid,
/// refined `refine_levels` times on +-10 cells around the best node. Upper
/// bound for h.
inline double oracle_h(const Coords& c, const WellParams& p, const GridSpec& gs) {
  gs.validate();
  if (!detail::admissible(c)) throw DomainError("oracle_h: coordinates outside closure of O");
  if (!(gs.extent > p_of_d(c.d, p) - std::min(c.x, c.y)))
    throw BoxTooSmall("oracle_h: search box does not reach the fixed point p(d)");

  double x0 = c.x, y0 = c.y;
  double width = gs.extent;
  double best = std::numeric_limits<double>::infinity();
  double bx = c.x, by = c.y;
  for (int level = 0; level <= gs.refine_levels; ++level) {
    const double h = width / (gs.n - 1);
    for (int i = 0; i < gs.n; ++i) {
      const double xi = x0 + i * h;
      for (int j = 0; j < gs.n; ++j) {
        const double eta = y0 + j * h;
        const double v = g_eval({xi, eta, c.d}, p);
        if (v < best) {
          best = v;
          bx = xi;
          by = eta;
        }
      }
    }
    // Refine over +-10 cells: along the shallow valleys of g for lambda near 1
    // the best coarse node can sit several cells away from the minimiser.
    x0 = std::max(c.x, bx - 10.0 * h);
    y0 = std::max(c.y, by - 10.0 * h);
    width = 20.0 * h;
  }
  return best;
}

/// Sampling box for probes over O.
struct ProbeBox {
  double xy_max = 5.0;
  double d_max = 4.0;
};

struct XiReport {
  long samples = 0;
  double min_xi_scaled = std::numeric_limits<double>::infinity();
  /// Analytic d^2g/dxdy over all samples, divided by scale.
  double min_mixed_partial_scaled = std::numeric_limits<double>::infinity();
  long stationary_samples = 0;
  /// d^2g/dxdy at points on the phase boundary x = phi(y, d).
  double min_mixed_partial_at_stationary = std::numeric_limits<double>::infinity();

  bool passed(double tol = 1e-9) const {
    return min_xi_scaled >= -tol && min_mixed_partial_at_stationary > 0.0;
  }
};

inline double probe_scale(const Coords& c) { return std::max(1.0, c.x * c.x + c.y * c.y + std::abs(c.d)); }

/// Xi = (A_x / x)(A_y / y) + 2 A M (2 d^2 - x^2 y^2) / z^3.
inline double xi_value(const Coords& c, const WellParams& p) {
  const ADerivatives a = A_derivatives(c, p);
  const double z3 = a.z * a.z * a.z;
  return (a.grad[0] / c.x) * (a.grad[1] / c.y) +
         2.0 * a.A * p.M() * (2.0 * c.d * c.d - c.x * c.x * c.y * c.y) / z3;
}

/// Uniform interior point of O inside the probe box.
inline Coords sample_interior(Rng& rng, const ProbeBox& box) {
  for (;;) {
    const double x = rng.uniform(0.0, box.xy_max);
    const double y = rng.uniform(0.0, box.xy_max);
    const double dm = std::min(box.d_max, x * y);
    const double d = rng.uniform(-dm, dm);
    const Coords c{x, y, d};
    if (x > 0.0 && y > 0.0 && std::abs(d) < x * y && detail::z_of(c) > 0.0) return c;
  }
}

inline double fd_mixed_partial(const Coords& c, const WellParams& p, double h) {
  const auto g = [&](double dx, double dy) { return g_eval({c.x + dx, c.y + dy, c.d}, p); };
  return (g(h, h) - g(h, -h) - g(-h, h) + g(-h, -h)) / (4.0 * h * h);
}

inline XiReport probe_xi_nonneg(const WellParams& p, long samples, std::uint64_t seed,
                                ProbeBox box = {}) {
  if (samples < 1) throw PreconditionViolated("probe_xi_nonneg requires samples >= 1");
  Rng rng(seed);
  XiReport r;
  r.samples = samples;
  for (long i = 0; i < samples; ++i) {
    const Coords c = sample_interior(rng, box);
    const double scale = probe_scale(c);
    r.min_xi_scaled = std::min(r.min_xi_scaled, xi_value(c, p) / scale);
    const Mat3 h = g_hessian(c, p);
    r.min_mixed_partial_scaled = std::min(r.min_mixed_partial_scaled, h[0][1] / scale);
  }
  // Stationary points: (phi(y, d), y, d) for a subsample of (y, d).
  const long n_stat = std::min<long>(samples, 2000);
  for (long i = 0; i < n_stat; ++i) {
    const double y = rng.uniform(0.2, box.xy_max);
    const double d = rng.uniform(-box.d_max, box.d_max);
    const double x = phi(y, d, p).x_star;
    const Coords c{x, y, d};
    // Finite differences where the stencil stays well inside O, else the
    // analytic entry (stationary points for small y sit close to xy = |d|).
    const double safe = 0.25 * (x * y - std::abs(d)) / (x + y);
    const double h = std::min(1e-3 * std::min({1.0, x, y}), safe);
    const double mixed = h >= 1e-5 ? fd_mixed_partial(c, p, h) : g_hessian(c, p)[0][1];
    r.min_mixed_partial_at_stationary = std::min(r.min_mixed_partial_at_stationary, mixed);
    ++r.stationary_samples;
  }
  return r;
}

struct HessianReport {
  long requested = 0;
  long accepted = 0;
  long attempts = 0;
  double min_eigenvalue_scaled = std::numeric_limits<double>::infinity();
  long fd_compared = 0;
  double max_fd_mismatch = 0.0;  // relative to max(1, |D^2 g|)

  bool passed(double eig_tol = 1e-8, double fd_tol = 1e-4) const {
    return accepted == requested && min_eigenvalue_scaled >= -eig_tol && max_fd_mismatch <= fd_tol;
  }
};

inline double min_eigenvalue(const Mat3& m) {
  Eigen::Matrix3d a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = m[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

/// Central-difference Hessian of g_eval.
inline Mat3 fd_hessian(const Coords& c, const WellParams& p, double h) {
  const auto g = [&](const Vec3& s) { return g_eval({c.x + s[0], c.y + s[1], c.d + s[2]}, p); };
  Mat3 out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      Vec3 pp{}, pm{}, mp{}, mm{};
      pp[i] += h; pp[j] += h;
      pm[i] += h; pm[j] -= h;
      mp[i] -= h; mp[j] += h;
      mm[i] -= h; mm[j] -= h;
      out[i][j] = out[j][i] = (g(pp) - g(pm) - g(mp) + g(mm)) / (4.0 * h * h);
    }
  }
  return out;
}

/// Samples V = {unrelaxed region} by rejection and checks D^2 g >= 0 there.
/// When `d_slice` is set all samples use that determinant.
inline HessianReport probe_hessian_psd_on_V(const WellParams& p, long samples, std::uint64_t seed,
                                            std::optional<double> d_slice = std::nullopt,
                                            ProbeBox box = {}, long max_attempts = 1'000'000) {
  if (samples < 1) throw PreconditionViolated("probe_hessian_psd_on_V requires samples >= 1");
  Rng rng(seed);
  HessianReport r;
  r.requested = samples;
  while (r.accepted < samples && r.attempts < max_attempts) {
    ++r.attempts;
    const double x = rng.uniform(0.0, box.xy_max);
    const double y = rng.uniform(0.0, box.xy_max);
    const double d = d_slice ? *d_slice : rng.uniform(-box.d_max, box.d_max);
    const Coords c{x, y, d};
    if (!(x * y > std::abs(d))) continue;
    if (classify(c, p) != PhaseRegion::Unrelaxed) continue;
    ++r.accepted;
    const Mat3 h = g_hessian(c, p);
    r.min_eigenvalue_scaled = std::min(r.min_eigenvalue_scaled, min_eigenvalue(h) / probe_scale(c));

    // g varies on the scale of the distance to xy = |d|; finite differences
    // are only meaningful where that scale is not tiny.
    const double scale = std::min({1.0, x, y, (x * y - std::abs(d)) / std::max(x, y)});
    if (scale < 1e-2) continue;
    ++r.fd_compared;
    const Mat3 fd = fd_hessian(c, p, 1e-3 * scale);
    double hn = 0.0, diff = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        hn = std::max(hn, std::abs(h[i][j]));
        diff = std::max(diff, std::abs(h[i][j] - fd[i][j]));
      }
    r.max_fd_mismatch = std::max(r.max_fd_mismatch, diff / std::max(1.0, hn));
  }
  return r;
}

}  // namespace qcrelax
