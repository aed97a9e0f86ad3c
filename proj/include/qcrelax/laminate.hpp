#pragma once

// Optimal laminates realising W^qc(F) as an average of W over rank-one
// compatible matrices. A split replaces F by F_{t+}, F_{t-} on a
// determinant-preserving rank-one line with mu t+ + (1 - mu) t- = 0, so that
// F = mu F_{t+} + (1 - mu) F_{t-}.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "qcrelax/energy.hpp"
#include "qcrelax/errors.hpp"
#include "qcrelax/mat2.hpp"
#include "qcrelax/relaxation.hpp"

namespace qcrelax {

struct SplitSolution {
  double t_plus;
  double t_minus;
  double mu;
};

struct Split {
  double mu;
  Direction direction;
  bool degenerate;  // F + t w⊗w (or v⊗v) instead of F(I + t v⊗w)
  double t_plus;
  double t_minus;
};

struct LaminateNode {
  Mat2 matrix;
  std::optional<Split> split;
  std::vector<LaminateNode> children;  // empty, or {plus, minus}

  bool is_leaf() const { return children.empty(); }
};

struct WeightedLeaf {
  double weight;
  Mat2 matrix;
};

class Laminate {
 public:
  Laminate(LaminateNode root, PhaseRegion region) : root_(std::move(root)), region_(region) {}

  const LaminateNode& root() const { return root_; }
  PhaseRegion region() const { return region_; }

  int depth() const { return depth_of(root_); }

  std::vector<WeightedLeaf> leaves() const {
    std::vector<WeightedLeaf> out;
    collect(root_, 1.0, out);
    return out;
  }

  /// Mutable access for building deliberately broken laminates in tests.
  LaminateNode& mutable_root() { return root_; }

 private:
  static int depth_of(const LaminateNode& n) {
    int d = 0;
    for (const auto& c : n.children) d = std::max(d, 1 + depth_of(c));
    return d;
  }
  static void collect(const LaminateNode& n, double w, std::vector<WeightedLeaf>& out) {
    if (n.is_leaf()) {
      out.push_back({w, n.matrix});
      return;
    }
    collect(n.children[0], w * n.split->mu, out);
    collect(n.children[1], w * (1.0 - n.split->mu), out);
  }

  LaminateNode root_;
  PhaseRegion region_;
};

/// Matrix on the split line through F at parameter t.
inline Mat2 split_line(const Mat2& f, Direction dir, bool degenerate, double t) {
  return degenerate ? degenerate_line(f, dir, t) : rank_one_line(f, dir, t);
}

namespace detail {

// Roots t- < 0 < t+ of |moving + t * fixed|^2 = target^2.
inline SplitSolution solve_split_quadratic(Vec2 fixed, Vec2 moving, double target) {
  const double a = dot(fixed, fixed);
  const double b = dot(fixed, moving);
  const double m = norm(moving);
  if (!(target > m))
    throw PreconditionViolated("split target must exceed the current coordinate");
  const double c = (m - target) * (m + target);
  const double disc = std::sqrt(b * b - a * c);
  double t_plus, t_minus;
  if (b >= 0.0) {
    const double q = -(b + disc);
    t_minus = q / a;
    t_plus = c / q;
  } else {
    const double q = disc - b;
    t_plus = q / a;
    t_minus = c / q;
  }
  return {t_plus, t_minus, -t_minus / (t_plus - t_minus)};
}

}  // namespace detail

/// Split parameters on the line F(I + t v⊗w) (RaiseY) or F(I + t w⊗v) (RaiseX)
/// bringing the moving coordinate to `target`.
inline SplitSolution solve_split(const Mat2& f, Direction dir, double target) {
  if (null_direction(f, dir))
    throw DegenerateDirection("solve_split: image of the fixed direction vanishes");
  const LineImages im = line_images(f, dir);
  return detail::solve_split_quadratic(im.fixed, im.moving, target);
}

/// Same for the replacement line F + t w⊗w (RaiseY) or F + t v⊗v (RaiseX).
inline SplitSolution solve_degenerate_split(const Mat2& f, Direction dir, double target) {
  if (!null_direction(f, dir))
    throw PreconditionViolated("solve_degenerate_split requires a vanishing fixed image");
  const Vec2 fixed = dir == Direction::RaiseY ? kDirW : kDirV;
  return detail::solve_split_quadratic(fixed, line_images(f, dir).moving, target);
}

namespace detail {

inline LaminateNode split_node(const Mat2& f, Direction dir, double target) {
  const bool degenerate = null_direction(f, dir);
  const SplitSolution s =
      degenerate ? solve_degenerate_split(f, dir, target) : solve_split(f, dir, target);
  LaminateNode node{f, Split{s.mu, dir, degenerate, s.t_plus, s.t_minus}, {}};
  node.children.push_back({split_line(f, dir, degenerate, s.t_plus), std::nullopt, {}});
  node.children.push_back({split_line(f, dir, degenerate, s.t_minus), std::nullopt, {}});
  return node;
}

}  // namespace detail

/// Laminate of order <= 2 whose leaves sit at the minimiser of g over
/// [x, inf) x [y, inf) at fixed det F.
inline Laminate build_laminate(const Mat2& f, const WellParams& p, double tol = kDefaultSolverTol) {
  if (!f.finite()) throw InadmissibleInput("build_laminate: non-finite matrix");
  const Coords c = coords(f);
  if (!detail::admissible(c)) throw InadmissibleInput("build_laminate: coordinates outside closure of O");
  const RelaxedPoint rp = relax(c, p, tol);
  switch (rp.region) {
    case PhaseRegion::FirstOrderRaiseX:
      return {detail::split_node(f, Direction::RaiseX, rp.target.x), rp.region};
    case PhaseRegion::FirstOrderRaiseY:
      return {detail::split_node(f, Direction::RaiseY, rp.target.y), rp.region};
    case PhaseRegion::SecondOrder: {
      LaminateNode node = detail::split_node(f, Direction::RaiseY, rp.target.y);
      for (auto& child : node.children)
        child = detail::split_node(child.matrix, Direction::RaiseX, rp.target.x);
      return {std::move(node), rp.region};
    }
    default:
      return {LaminateNode{f, std::nullopt, {}}, rp.region};
  }
}

struct LaminateReport {
  double barycenter_error = 0.0;
  double energy_gap = 0.0;
  std::vector<double> rank_one_defects;
  double max_leaf_distance_to_target_coords = 0.0;
  /// Mismatch between stored children and the line re-evaluated at t+, t-.
  double parameter_error = 0.0;
  int depth = 0;

  double max_rank_one_defect() const {
    return rank_one_defects.empty() ? 0.0
                                    : *std::max_element(rank_one_defects.begin(), rank_one_defects.end());
  }
  bool passed(double tol) const {
    return depth <= 2 && barycenter_error <= tol && energy_gap <= tol && max_rank_one_defect() <= tol &&
           max_leaf_distance_to_target_coords <= tol && parameter_error <= tol;
  }
};

namespace detail {

inline void verify_node(const LaminateNode& n, LaminateReport& r) {
  if (n.is_leaf()) return;
  const Split& s = *n.split;
  const Mat2& plus = n.children[0].matrix;
  const Mat2& minus = n.children[1].matrix;
  r.barycenter_error =
      std::max(r.barycenter_error, (n.matrix - (s.mu * plus + (1.0 - s.mu) * minus)).norm());
  r.rank_one_defects.push_back(std::abs(signed_singular_values(plus - minus).lam1));
  try {
    const double e =
        std::max((plus - split_line(n.matrix, s.direction, s.degenerate, s.t_plus)).norm(),
                 (minus - split_line(n.matrix, s.direction, s.degenerate, s.t_minus)).norm());
    r.parameter_error = std::max(r.parameter_error, e);
  } catch (const PreconditionViolated&) {
    r.parameter_error = std::numeric_limits<double>::infinity();
  }
  for (const auto& c : n.children) verify_node(c, r);
}

}  // namespace detail

/// Recomputes every laminate identity; failures are reported, not thrown.
inline LaminateReport verify_laminate(const Laminate& l, const WellParams& p, const ThetaSpec& th,
                                      double tol = kDefaultSolverTol) {
  LaminateReport r;
  r.depth = l.depth();
  detail::verify_node(l.root(), r);

  const Mat2& f = l.root().matrix;
  const EnergyValue relaxed = Wqc_eval(f, p, th);
  EnergyValue mixed(0.0);
  double finite_sum = 0.0;
  for (const auto& leaf : l.leaves()) {
    const EnergyValue w = W_eval(leaf.matrix, p, th);
    mixed = mixed + w;
    if (w.is_finite()) finite_sum += leaf.weight * w.value();
  }
  if (relaxed.is_infinite() || mixed.is_infinite())
    r.energy_gap = relaxed.is_infinite() == mixed.is_infinite() ? 0.0
                                                                : std::numeric_limits<double>::infinity();
  else
    r.energy_gap = std::abs(finite_sum - relaxed.value());

  const Coords c = coords(f);
  if (detail::admissible(c)) {
    const Coords target = relax(c, p, tol).target;
    for (const auto& leaf : l.leaves()) {
      const Coords lc = coords(leaf.matrix);
      r.max_leaf_distance_to_target_coords =
          std::max(r.max_leaf_distance_to_target_coords,
                   std::hypot(lc.x - target.x, lc.y - target.y, lc.d - target.d));
    }
  } else {
    r.max_leaf_distance_to_target_coords = std::numeric_limits<double>::infinity();
  }
  return r;
}

}  // namespace qcrelax
