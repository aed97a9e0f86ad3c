#pragma once

// Relaxed energy on the incompressible slice F = (a b; 0 1/a), det F = 1.
// The zero set of W^qc on the slice is K^qc = {(a ± b)^2 + 1/a^2 <= L}.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qcrelax/energy.hpp"
#include "qcrelax/errors.hpp"
#include "qcrelax/io.hpp"
#include "qcrelax/relaxation.hpp"

namespace qcrelax {

struct GridRange {
  double lo;
  double hi;
  int n;

  double at(int i) const { return i == n - 1 ? hi : lo + (hi - lo) * i / (n - 1); }
  double step() const { return (hi - lo) / (n - 1); }
};

struct SliceSpec {
  GridRange a{0.4, 2.0, 201};
  GridRange b{-1.0, 1.0, 201};
  double lambda = 1.5;
  std::string theta = "indicator_det1";

  void validate() const {
    for (const GridRange& r : {a, b})
      if (!(r.lo < r.hi) || r.n < 2) throw PreconditionViolated("slice ranges need lo < hi and n >= 2");
    if (!(lambda > 1.0)) throw PreconditionViolated("slice lambda must be > 1");
    if (!(a.lo > 0.0)) throw PreconditionViolated("slice requires a > 0 (F has entry 1/a)");
  }
};

/// Named theta variants accepted on the command line.
inline ThetaSpec theta_from_name(const std::string& name) {
  if (name == "zero") return ThetaSpec::zero();
  if (name == "indicator_det1") return ThetaSpec::indicator_det_one();
  if (name == "log_squared") return ThetaSpec::log_squared();
  throw PreconditionViolated("unknown theta '" + name + "' (zero | indicator_det1 | log_squared)");
}

inline Mat2 slice_matrix(double a, double b) { return {a, b, 0.0, 1.0 / a}; }

struct PhaseRow {
  double a;
  double b;
  EnergyValue W;
  EnergyValue Wqc;
  PhaseRegion region;
  bool kqc_member;
};

inline PhaseRow evaluate_slice_point(double a, double b, const WellParams& p, const ThetaSpec& th) {
  const Mat2 f = slice_matrix(a, b);
  return {a, b, W_eval(f, p, th), Wqc_eval(f, p, th), classify(coords(f), p), kqc_member(f, p)};
}

/// Thread count from QCRELAX_THREADS (default 1).
inline unsigned thread_count_from_env() {
  if (const char* s = std::getenv("QCRELAX_THREADS")) {
    const long v = std::strtol(s, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(std::min<long>(v, 256));
  }
  return 1;
}

/// Rows in row-major order: a outer, b inner. The order does not depend on
/// the number of threads.
inline std::vector<PhaseRow> compute_phase_diagram(const SliceSpec& s, unsigned threads = 1) {
  s.validate();
  const WellParams p(s.lambda);
  const ThetaSpec th = theta_from_name(s.theta);
  std::vector<PhaseRow> rows(static_cast<std::size_t>(s.a.n) * static_cast<std::size_t>(s.b.n));
  const auto work = [&](unsigned tid, unsigned nthreads) {
    for (int i = static_cast<int>(tid); i < s.a.n; i += static_cast<int>(nthreads))
      for (int j = 0; j < s.b.n; ++j)
        rows[static_cast<std::size_t>(i) * s.b.n + j] = evaluate_slice_point(s.a.at(i), s.b.at(j), p, th);
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(s.a.n)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& t : pool) t.join();
  }
  return rows;
}

struct Polyline {
  std::string curve;
  std::vector<std::array<double, 2>> points;
};

/// The four branches of (a + b)^2 + 1/a^2 = L and (a - b)^2 + 1/a^2 = L,
/// sampled in a and clipped to the slice.
inline std::vector<Polyline> boundary_curves(const SliceSpec& s, int samples = 401) {
  const WellParams p(s.lambda);
  const double L = p.L();
  const double a_min = std::max(s.a.lo, 1.0 / std::sqrt(L));
  std::vector<Polyline> out{{"plus_upper", {}}, {"plus_lower", {}}, {"minus_upper", {}}, {"minus_lower", {}}};
  if (a_min > s.a.hi) return out;
  for (int k = 0; k < samples; ++k) {
    const double a = k == samples - 1 ? s.a.hi : a_min + (s.a.hi - a_min) * k / (samples - 1);
    const double r = std::sqrt(std::max(0.0, L - 1.0 / (a * a)));
    const double bs[4] = {-a + r, -a - r, a + r, a - r};
    for (int c = 0; c < 4; ++c)
      if (bs[c] >= s.b.lo && bs[c] <= s.b.hi) out[static_cast<std::size_t>(c)].points.push_back({a, bs[c]});
  }
  return out;
}

inline bool slice_kqc_analytic(double a, double b, double L) {
  const double ia2 = 1.0 / (a * a);
  return (a + b) * (a + b) + ia2 <= L && (a - b) * (a - b) + ia2 <= L;
}

inline void write_phase_csv(std::ostream& os, const std::vector<PhaseRow>& rows) {
  os << "a,b,W,Wqc,region,kqc_member\n";
  for (const PhaseRow& r : rows)
    os << format_number(r.a) << ',' << format_number(r.b) << ',' << format_energy(r.W) << ','
       << format_energy(r.Wqc) << ',' << to_string(r.region) << ',' << (r.kqc_member ? "true" : "false")
       << '\n';
}

inline void write_boundaries_csv(std::ostream& os, const std::vector<Polyline>& curves) {
  os << "curve,a,b\n";
  for (const Polyline& c : curves)
    for (const auto& pt : c.points) os << c.curve << ',' << format_number(pt[0]) << ',' << format_number(pt[1]) << '\n';
}

inline nlohmann::json phase_json(const SliceSpec& s, const std::vector<PhaseRow>& rows,
                                 const std::vector<Polyline>& curves) {
  nlohmann::json pts = nlohmann::json::array();
  for (const PhaseRow& r : rows)
    pts.push_back({{"a", r.a},
                   {"b", r.b},
                   {"W", to_json(r.W)},
                   {"Wqc", to_json(r.Wqc)},
                   {"region", to_string(r.region)},
                   {"kqc_member", r.kqc_member}});
  nlohmann::json bnd = nlohmann::json::array();
  for (const Polyline& c : curves) {
    nlohmann::json line = nlohmann::json::array();
    for (const auto& pt : c.points) line.push_back({pt[0], pt[1]});
    bnd.push_back({{"curve", c.curve}, {"points", line}});
  }
  return {{"schema_version", kSchemaVersion},
          {"lambda", s.lambda},
          {"theta", s.theta},
          {"d", 1.0},
          {"a_range", {{"lo", s.a.lo}, {"hi", s.a.hi}, {"n", s.a.n}}},
          {"b_range", {{"lo", s.b.lo}, {"hi", s.b.hi}, {"n", s.b.n}}},
          {"points", pts},
          {"boundaries", bnd}};
}

/// Agreement of a computed slice with the analytic picture.
struct SliceStructure {
  /// Cells where {Wqc <= zero_tol} disagrees with the analytic K^qc set and the
  /// analytic set is constant over the cell's 3x3 neighbourhood.
  long zero_set_mismatches = 0;
  /// Same comparison for {region == second_order}.
  long second_order_mismatches = 0;
  /// Rows flagged kqc_member disagreeing with the analytic set away from the boundary.
  long kqc_flag_mismatches = 0;
  /// Rows with kqc_member = true and Wqc > zero_tol.
  long kqc_positive_energy = 0;
  /// Collapsed region sequence along b on the column nearest a = 1.
  std::vector<std::string> column_sequence;
  /// Collapsed region sequence along a on the row nearest b = 0.
  std::vector<std::string> row_sequence;
  long count_second = 0, count_first_top = 0, count_first_bottom = 0, count_unrelaxed_left = 0,
       count_unrelaxed_right = 0;

  bool five_region_layout() const {
    const std::vector<std::string> col{"first_order", "second_order", "first_order"};
    const std::vector<std::string> row{"unrelaxed", "second_order", "unrelaxed"};
    return column_sequence == col && row_sequence == row && count_second > 0 && count_first_top > 0 &&
           count_first_bottom > 0 && count_unrelaxed_left > 0 && count_unrelaxed_right > 0;
  }
  bool passed() const {
    return zero_set_mismatches == 0 && second_order_mismatches == 0 && kqc_flag_mismatches == 0 &&
           kqc_positive_energy == 0 && five_region_layout();
  }
};

inline std::string region_family(PhaseRegion r) {
  switch (r) {
    case PhaseRegion::FirstOrderRaiseX:
    case PhaseRegion::FirstOrderRaiseY: return "first_order";
    default: return to_string(r);
  }
}

inline SliceStructure analyze_slice(const SliceSpec& s, const std::vector<PhaseRow>& rows,
                                    double zero_tol = 1e-10) {
  const double L = WellParams(s.lambda).L();
  const auto idx = [&](int i, int j) { return static_cast<std::size_t>(i) * s.b.n + j; };
  const auto analytic = [&](int i, int j) { return slice_kqc_analytic(s.a.at(i), s.b.at(j), L); };
  const auto near_boundary = [&](int i, int j) {
    const bool c = analytic(i, j);
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        const int ii = i + di, jj = j + dj;
        if (ii < 0 || jj < 0 || ii >= s.a.n || jj >= s.b.n) continue;
        if (analytic(ii, jj) != c) return true;
      }
    return false;
  };

  SliceStructure out;
  for (int i = 0; i < s.a.n; ++i) {
    for (int j = 0; j < s.b.n; ++j) {
      const PhaseRow& r = rows[idx(i, j)];
      const bool zero = r.Wqc.is_finite() && r.Wqc.value() <= zero_tol;
      const bool in_k = analytic(i, j);
      if (r.kqc_member && !zero) ++out.kqc_positive_energy;
      if (!near_boundary(i, j)) {
        if (zero != in_k) ++out.zero_set_mismatches;
        if ((r.region == PhaseRegion::SecondOrder) != in_k) ++out.second_order_mismatches;
        if (r.kqc_member != in_k) ++out.kqc_flag_mismatches;
      }
    }
  }

  const auto nearest = [](const GridRange& g, double v) {
    int best = 0;
    for (int i = 1; i < g.n; ++i)
      if (std::abs(g.at(i) - v) < std::abs(g.at(best) - v)) best = i;
    return best;
  };
  const auto push_collapsed = [](std::vector<std::string>& seq, const std::string& s) {
    if (seq.empty() || seq.back() != s) seq.push_back(s);
  };
  const int ic = nearest(s.a, 1.0);
  for (int j = 0; j < s.b.n; ++j) push_collapsed(out.column_sequence, region_family(rows[idx(ic, j)].region));
  const int jc = nearest(s.b, 0.0);
  for (int i = 0; i < s.a.n; ++i) push_collapsed(out.row_sequence, region_family(rows[idx(i, jc)].region));

  for (int i = 0; i < s.a.n; ++i) {
    for (int j = 0; j < s.b.n; ++j) {
      const PhaseRow& r = rows[idx(i, j)];
      const std::string fam = region_family(r.region);
      if (fam == "second_order") ++out.count_second;
      if (fam == "first_order" && r.b > 0.0) ++out.count_first_top;
      if (fam == "first_order" && r.b < 0.0) ++out.count_first_bottom;
      if (fam == "unrelaxed" && i < ic) ++out.count_unrelaxed_left;
      if (fam == "unrelaxed" && i > ic) ++out.count_unrelaxed_right;
    }
  }
  return out;
}

}  // namespace qcrelax
