#pragma once

// Randomised property suites comparing the closed forms with the oracles.
// Each suite reports named metrics against explicit thresholds; the CLI's
// `verify` command and the acceptance test both run these.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcrelax/energy.hpp"
#include "qcrelax/laminate.hpp"
#include "qcrelax/mat2.hpp"
#include "qcrelax/oracle.hpp"
#include "qcrelax/phase_diagram.hpp"
#include "qcrelax/random.hpp"
#include "qcrelax/relaxation.hpp"

namespace qcrelax {

struct Metric {
  std::string name;
  double value;
  double threshold;
  enum class Kind { AtMost, AtLeast, Equal } kind = Kind::AtMost;

  bool ok() const {
    switch (kind) {
      case Kind::AtMost: return value <= threshold;
      case Kind::AtLeast: return value >= threshold;
      case Kind::Equal: return value == threshold;
    }
    return false;
  }
};

struct SuiteResult {
  std::string name;
  long samples = 0;
  std::vector<Metric> metrics;
  double seconds = 0.0;
  std::string error;  // set when the suite threw

  bool passed() const {
    if (!error.empty()) return false;
    for (const auto& m : metrics)
      if (!m.ok()) return false;
    return true;
  }
};

inline nlohmann::json to_json(const SuiteResult& r) {
  nlohmann::json ms = nlohmann::json::array();
  for (const auto& m : r.metrics) {
    const char* kind = m.kind == Metric::Kind::AtMost ? "<=" : m.kind == Metric::Kind::AtLeast ? ">=" : "==";
    ms.push_back({{"name", m.name}, {"value", m.value}, {"op", kind}, {"threshold", m.threshold}, {"ok", m.ok()}});
  }
  nlohmann::json j{{"suite", r.name}, {"passed", r.passed()}, {"samples", r.samples}, {"metrics", ms},
                   {"seconds", r.seconds}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

namespace detail {

template <class Body>
SuiteResult timed_suite(std::string name, long samples, Body&& body) {
  SuiteResult r;
  r.name = std::move(name);
  r.samples = samples;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline Mat2 random_matrix(Rng& rng, double half_width) {
  return {rng.uniform(-half_width, half_width), rng.uniform(-half_width, half_width),
          rng.uniform(-half_width, half_width), rng.uniform(-half_width, half_width)};
}

inline Vec2 random_unit(Rng& rng) {
  const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return {std::cos(a), std::sin(a)};
}

}  // namespace detail

/// Closed-form well distance vs. the angle scan, and the identity
/// dist^2(F, K) = g(x(F), y(F), d(F)). Entries in [-5, 5], so |F| <= 10.
inline SuiteResult suite_well_distance(const std::vector<double>& lambdas, long samples, std::uint64_t seed,
                                       int n_angles = 10'000, double oracle_tol = 1e-6,
                                       double identity_tol = 1e-10) {
  return detail::timed_suite("well_distance", samples * static_cast<long>(lambdas.size()), [&](SuiteResult& r) {
    double oracle_err = 0.0, identity_err = 0.0;
    for (double lam : lambdas) {
      const WellParams p(lam);
      Rng rng(seed);
      for (long i = 0; i < samples; ++i) {
        const Mat2 f = detail::random_matrix(rng, 5.0);
        const double closed = dist2_two_wells(f, p);
        oracle_err = std::max(oracle_err, std::abs(closed - oracle_dist2(f, p, n_angles)));
        identity_err = std::max(identity_err,
                                std::abs(closed - g_eval(coords(f), p)) / std::max(1.0, f.norm_sq()));
      }
    }
    r.metrics.push_back({"max_abs_error_vs_angle_scan", oracle_err, oracle_tol});
    r.metrics.push_back({"max_scaled_error_vs_g_of_coords", identity_err, identity_tol});
  });
}

/// phi(sqrt(L/2), 1) = sqrt(L/2) and p(1) = sqrt(L/2).
inline SuiteResult suite_anchor_point(const std::vector<double>& lambdas, double tol = 1e-10) {
  return detail::timed_suite("anchor_point", static_cast<long>(lambdas.size()), [&](SuiteResult& r) {
    double phi_err = 0.0, p_err = 0.0;
    for (double lam : lambdas) {
      const WellParams p(lam);
      const double s = std::sqrt(p.L() / 2.0);
      phi_err = std::max(phi_err, std::abs(phi(s, 1.0, p).x_star - s));
      p_err = std::max(p_err, std::abs(p_of_d(1.0, p) - s));
    }
    r.metrics.push_back({"max_abs_error_phi", phi_err, tol});
    r.metrics.push_back({"max_abs_error_p1", p_err, tol});
  });
}

/// Admissible coords with x, y in (0, xy_max], |d| <= min(d_max, xy).
inline Coords random_admissible(Rng& rng, double xy_max = 5.0, double d_max = 4.0) {
  const double x = rng.uniform(0.0, xy_max);
  const double y = rng.uniform(0.0, xy_max);
  const double dm = std::min(d_max, x * y);
  return {x, y, rng.uniform(-dm, dm)};
}

/// Closed-form h vs. grid minimisation (extent 3 p(d), n points, refinements).
inline SuiteResult suite_envelope(const WellParams& p, long samples, std::uint64_t seed, int n = 200,
                                  int refine_levels = 3, double tol = 1e-6) {
  return detail::timed_suite("envelope_vs_grid", samples, [&](SuiteResult& r) {
    Rng rng(seed);
    double max_err = 0.0, min_excess = std::numeric_limits<double>::infinity();
    std::map<PhaseRegion, long> seen;
    for (long i = 0; i < samples; ++i) {
      const Coords c = random_admissible(rng);
      const RelaxedPoint rp = relax(c, p);
      ++seen[rp.region];
      const double grid = oracle_h(c, p, {3.0 * p_of_d(c.d, p), n, refine_levels});
      max_err = std::max(max_err, std::abs(rp.value - grid));
      min_excess = std::min(min_excess, grid - rp.value);
    }
    r.metrics.push_back({"max_abs_error_vs_grid", max_err, tol});
    r.metrics.push_back({"min_grid_minus_closed_form", min_excess, -1e-9, Metric::Kind::AtLeast});
    for (PhaseRegion reg : {PhaseRegion::SecondOrder, PhaseRegion::FirstOrderRaiseX,
                            PhaseRegion::FirstOrderRaiseY, PhaseRegion::Unrelaxed})
      r.metrics.push_back({std::string("samples_in_") + to_string(reg), static_cast<double>(seen[reg]), 1.0,
                           Metric::Kind::AtLeast});
  });
}

/// Laminates from build_laminate over random F, plus singular and
/// null-direction matrices.
inline SuiteResult suite_laminates(const WellParams& p, long samples, std::uint64_t seed,
                                   double gap_tol = 1e-6, double geom_tol = 1e-10, double leaf_tol = 1e-8) {
  return detail::timed_suite("laminates", samples, [&](SuiteResult& r) {
    Rng rng(seed);
    double gap = 0.0, bary = 0.0, rank1 = 0.0, leaf = 0.0, param = 0.0;
    int depth = 0;
    std::map<PhaseRegion, long> seen;
    for (long i = 0; i < samples; ++i) {
      Mat2 f;
      switch (i % 8) {
        case 0: f = outer(detail::random_unit(rng), rng.uniform(0.0, 3.0) * detail::random_unit(rng)); break;
        case 1: f = outer(rng.uniform(0.0, 2.0) * detail::random_unit(rng), kDirW); break;  // Fv = 0
        case 2: f = outer(rng.uniform(0.0, 2.0) * detail::random_unit(rng), kDirV); break;  // Fw = 0
        case 3: f = detail::random_matrix(rng, 5.0); break;
        default: f = detail::random_matrix(rng, 1.5); break;
      }
      // log^2 on clearly positive determinants only: singular samples carry a
      // rounding-level det whose sign is not preserved along the laminate.
      const ThetaSpec th = f.det() > 1e-3 ? ThetaSpec::log_squared() : ThetaSpec::zero();
      const Laminate l = build_laminate(f, p);
      ++seen[l.region()];
      const LaminateReport rep = verify_laminate(l, p, th);
      const double w = W_eval(f, p, th).value();
      gap = std::max(gap, rep.energy_gap / std::max(1.0, w));
      bary = std::max(bary, rep.barycenter_error);
      rank1 = std::max(rank1, rep.max_rank_one_defect());
      leaf = std::max(leaf, rep.max_leaf_distance_to_target_coords);
      param = std::max(param, rep.parameter_error);
      depth = std::max(depth, rep.depth);
    }
    r.metrics.push_back({"max_scaled_energy_gap", gap, gap_tol});
    r.metrics.push_back({"max_barycenter_error", bary, geom_tol});
    r.metrics.push_back({"max_rank_one_defect", rank1, geom_tol});
    r.metrics.push_back({"max_leaf_distance_to_target", leaf, leaf_tol});
    r.metrics.push_back({"max_parameter_error", param, leaf_tol});
    r.metrics.push_back({"max_depth", static_cast<double>(depth), 2.0});
    r.metrics.push_back({"second_order_samples", static_cast<double>(seen[PhaseRegion::SecondOrder]), 1.0,
                         Metric::Kind::AtLeast});
  });
}

/// W^qc(F) <= (W^qc(F - eps R) + W^qc(F + eps R)) / 2 for rank-one R, |R| = 1,
/// eps = 1e-2 |F|, theta = 0.
inline SuiteResult suite_rank_one_convexity(const WellParams& p, long samples, std::uint64_t seed,
                                            double tol = 1e-8) {
  return detail::timed_suite("rank_one_convexity", samples, [&](SuiteResult& r) {
    Rng rng(seed);
    const ThetaSpec th = ThetaSpec::zero();
    double min_defect = std::numeric_limits<double>::infinity();
    for (long i = 0; i < samples; ++i) {
      const Mat2 f = detail::random_matrix(rng, 2.0);
      const Mat2 rk = outer(detail::random_unit(rng), detail::random_unit(rng));
      const double eps = 1e-2 * f.norm();
      const double mid = Wqc_eval(f, p, th).value();
      const double avg = 0.5 * (Wqc_eval(f - eps * rk, p, th).value() + Wqc_eval(f + eps * rk, p, th).value());
      min_defect = std::min(min_defect, avg - mid);
    }
    r.metrics.push_back({"min_midpoint_defect", min_defect, -tol, Metric::Kind::AtLeast});
  });
}

/// Midpoint convexity of the extension f on random segments of R^3.
inline SuiteResult suite_extension_convexity(const WellParams& p, long samples, std::uint64_t seed,
                                             double tol = 1e-8) {
  return detail::timed_suite("extension_convexity", samples, [&](SuiteResult& r) {
    Rng rng(seed);
    double min_defect = std::numeric_limits<double>::infinity();
    for (long i = 0; i < samples; ++i) {
      const Vec3 a{rng.uniform(-1.0, 4.0), rng.uniform(-1.0, 4.0), rng.uniform(-3.0, 3.0)};
      Vec3 b{a};
      // Alternate long segments with short ones that resolve local curvature.
      const double len = (i % 2 == 0) ? 2.0 : 0.05;
      for (int k = 0; k < 3; ++k) b[k] += rng.uniform(-len, len);
      const Vec3 m{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
      const double fa = extension_eval(a[0], a[1], a[2], p);
      const double fb = extension_eval(b[0], b[1], b[2], p);
      const double fm = extension_eval(m[0], m[1], m[2], p);
      min_defect = std::min(min_defect, 0.5 * (fa + fb) - fm);
    }
    r.metrics.push_back({"min_midpoint_defect", min_defect, -tol, Metric::Kind::AtLeast});
  });
}

inline SuiteResult suite_hessian_psd(const WellParams& p, long samples, std::uint64_t seed, double eig_tol = 1e-8,
                                     double fd_tol = 1e-4) {
  return detail::timed_suite("hessian_psd_on_V", samples, [&](SuiteResult& r) {
    const HessianReport rep = probe_hessian_psd_on_V(p, samples, seed);
    r.metrics.push_back({"accepted_samples", static_cast<double>(rep.accepted), static_cast<double>(samples),
                         Metric::Kind::Equal});
    r.metrics.push_back({"min_eigenvalue_scaled", rep.min_eigenvalue_scaled, -eig_tol, Metric::Kind::AtLeast});
    r.metrics.push_back({"fd_compared_samples", static_cast<double>(rep.fd_compared), 0.5 * samples,
                         Metric::Kind::AtLeast});
    r.metrics.push_back({"max_fd_relative_mismatch", rep.max_fd_mismatch, fd_tol});
  });
}

namespace detail {

// Second-order one-sided derivatives of t -> fn(t) at t = 0.
template <class Fn>
std::pair<double, double> one_sided_derivatives(Fn&& fn, double h) {
  const double f0 = fn(0.0);
  const double left = (3.0 * f0 - 4.0 * fn(-h) + fn(-2.0 * h)) / (2.0 * h);
  const double right = (-3.0 * f0 + 4.0 * fn(h) - fn(2.0 * h)) / (2.0 * h);
  return {left, right};
}

}  // namespace detail

/// Jump of the derivative of f across each region boundary, measured along
/// a coordinate axis transversal to the boundary. Across x = phi(y, d) the
/// line is parametrised by z = sqrt(x^2 y^2 - d^2), in which g is smooth even
/// where phi approaches |d| / y, and the jump is converted with dz/dx = x y^2 / z.
inline SuiteResult suite_c1_matching(const WellParams& p, long samples, std::uint64_t seed, double tol = 1e-5,
                                     double h = 1e-4) {
  return detail::timed_suite("c1_matching", samples, [&](SuiteResult& r) {
    Rng rng(seed);
    double worst[4] = {0.0, 0.0, 0.0, 0.0};
    for (long i = 0; i < samples; ++i) {
      const double d = rng.uniform(-3.0, 3.0);
      const double pd = p_of_d(d, p);
      const int kind = static_cast<int>(i % 4);
      double jump = 0.0;
      if (kind < 2) {
        // kind 0: x = phi(y, d), y > p, line along x; kind 1: the mirror image.
        const double fixed = pd + rng.uniform(0.05, 3.0);
        const double moving = phi(fixed, d, p).x_star;
        const double z = detail::z_of({moving, fixed, d});
        const double hz = std::min(h, 0.1 * z);
        const auto line = [&](double t) {
          const double m = std::sqrt((z + t) * (z + t) + d * d) / fixed;
          return kind == 0 ? extension_eval(m, fixed, d, p) : extension_eval(fixed, m, d, p);
        };
        const auto [left, right] = detail::one_sided_derivatives(line, hz);
        jump = std::abs(left - right) * moving * fixed * fixed / z;
      } else {
        // kind 2: y = p, x < p, line along y; kind 3: x = p, y < p, line along x.
        const double other = rng.uniform(-1.0, pd - 0.05);
        const auto line = [&](double t) {
          return kind == 2 ? extension_eval(other, pd + t, d, p) : extension_eval(pd + t, other, d, p);
        };
        const auto [left, right] = detail::one_sided_derivatives(line, h);
        jump = std::abs(left - right);
      }
      worst[kind] = std::max(worst[kind], jump);
    }
    r.metrics.push_back({"max_jump_raise_x_vs_unrelaxed", worst[0], tol});
    r.metrics.push_back({"max_jump_raise_y_vs_unrelaxed", worst[1], tol});
    r.metrics.push_back({"max_jump_second_vs_raise_x", worst[2], tol});
    r.metrics.push_back({"max_jump_second_vs_raise_y", worst[3], tol});
  });
}

/// phi(., d) nonincreasing on a geometric grid of y for each d.
inline SuiteResult suite_phi_monotone(const WellParams& p, const std::vector<double>& ds, int n = 2000,
                                      double tol = 1e-10) {
  return detail::timed_suite("phi_monotone", static_cast<long>(ds.size()) * n, [&](SuiteResult& r) {
    double worst = -std::numeric_limits<double>::infinity();
    for (double d : ds) {
      double prev = std::numeric_limits<double>::infinity();
      for (int k = 0; k < n; ++k) {
        const double y = 0.02 * std::pow(500.0, static_cast<double>(k) / (n - 1));  // 0.02 .. 10
        const double v = phi(y, d, p).x_star;
        if (k > 0) worst = std::max(worst, v - prev);
        prev = v;
      }
    }
    r.metrics.push_back({"max_increase", worst, tol});
  });
}

inline SuiteResult suite_xi(const WellParams& p, long samples, std::uint64_t seed, double tol = 1e-9) {
  return detail::timed_suite("xi_nonnegative", samples, [&](SuiteResult& r) {
    const XiReport rep = probe_xi_nonneg(p, samples, seed);
    r.metrics.push_back({"min_xi_scaled", rep.min_xi_scaled, -tol, Metric::Kind::AtLeast});
    r.metrics.push_back({"min_mixed_partial_at_stationary", rep.min_mixed_partial_at_stationary, 0.0,
                         Metric::Kind::AtLeast});
    r.metrics.push_back({"stationary_mixed_partial_strictly_positive",
                         rep.min_mixed_partial_at_stationary > 0.0 ? 1.0 : 0.0, 1.0, Metric::Kind::Equal});
  });
}

/// Quartic candidates vs. the bracketed solver on random (y, d).
inline SuiteResult suite_quartic(const WellParams& p, long samples, std::uint64_t seed, double tol = 1e-7,
                                 double residual_tol = kDefaultSolverTol) {
  return detail::timed_suite("quartic_cross_check", samples, [&](SuiteResult& r) {
    Rng rng(seed);
    double worst = 0.0;
    long bad_count = 0, with_spurious = 0;
    for (long i = 0; i < samples; ++i) {
      const double y = rng.uniform(0.2, 5.0);
      const double d = rng.uniform(-4.0, 4.0);
      const double ref = phi(y, d, p).x_star;
      const std::vector<double> all = phi_quartic(y, d, p);
      const std::vector<double> kept = phi_quartic_filtered(y, d, p, residual_tol);
      if (kept.size() != 1) ++bad_count;
      if (all.size() > kept.size()) ++with_spurious;
      double best = std::numeric_limits<double>::infinity();
      for (double x : all) best = std::min(best, std::abs(x - ref));
      for (double x : kept) best = std::min(best, std::abs(x - ref));
      worst = std::max(worst, best / std::max(1.0, ref));
    }
    r.metrics.push_back({"max_scaled_error_vs_solver", worst, tol});
    r.metrics.push_back({"samples_without_unique_survivor", static_cast<double>(bad_count), 0.0,
                         Metric::Kind::Equal});
    r.metrics.push_back({"samples_with_spurious_root", static_cast<double>(with_spurious), 1.0,
                         Metric::Kind::AtLeast});
  });
}

/// The incompressible slice at this lambda reproduces the analytic zero set.
/// The five-region layout depends on lambda and the slice window, so it is
/// checked only on request.
inline SuiteResult suite_phase_slice(double lambda, int n = 201, bool check_layout = true, unsigned threads = 1) {
  return detail::timed_suite("phase_slice", static_cast<long>(n) * n, [&](SuiteResult& r) {
    SliceSpec s;
    s.lambda = lambda;
    s.a.n = n;
    s.b.n = n;
    const auto rows = compute_phase_diagram(s, threads);
    const SliceStructure st = analyze_slice(s, rows);
    r.metrics.push_back({"zero_set_mismatches", static_cast<double>(st.zero_set_mismatches), 0.0, Metric::Kind::Equal});
    r.metrics.push_back({"second_order_mismatches", static_cast<double>(st.second_order_mismatches), 0.0,
                         Metric::Kind::Equal});
    r.metrics.push_back({"kqc_flag_mismatches", static_cast<double>(st.kqc_flag_mismatches), 0.0, Metric::Kind::Equal});
    r.metrics.push_back({"kqc_rows_with_positive_energy", static_cast<double>(st.kqc_positive_energy), 0.0,
                         Metric::Kind::Equal});
    if (check_layout)
      r.metrics.push_back({"five_region_layout", st.five_region_layout() ? 1.0 : 0.0, 1.0, Metric::Kind::Equal});
  });
}

}  // namespace qcrelax
