#include <cmath>

#include <gtest/gtest.h>

#include "qcrelax/energy.hpp"
#include "qcrelax/laminate.hpp"
#include "qcrelax/random.hpp"
#include "qcrelax/relaxation.hpp"

namespace {

using namespace qcrelax;

const WellParams kP15(1.5);

TEST(SolveSplit, IdentityRaiseY) {
  const SplitSolution s = solve_split(Mat2::identity(), Direction::RaiseY, std::sqrt(2.0));
  EXPECT_NEAR(s.t_plus, 1.0, 1e-15);
  EXPECT_NEAR(s.t_minus, -1.0, 1e-15);
  EXPECT_NEAR(s.mu, 0.5, 1e-15);
}

TEST(SolveSplit, ReachesTargetOnBothSides) {
  Rng rng(51);
  for (int i = 0; i < 2000; ++i) {
    const Mat2 f{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    for (Direction dir : {Direction::RaiseX, Direction::RaiseY}) {
      const Coords c = coords(f);
      const double cur = dir == Direction::RaiseY ? c.y : c.x;
      const double target = cur + rng.uniform(0.01, 3.0);
      const SplitSolution s = solve_split(f, dir, target);
      EXPECT_GT(s.t_plus, 0.0);
      EXPECT_LT(s.t_minus, 0.0);
      EXPECT_GT(s.mu, 0.0);
      EXPECT_LT(s.mu, 1.0);
      for (double t : {s.t_plus, s.t_minus}) {
        const Coords e = coords(rank_one_line(f, dir, t));
        EXPECT_NEAR(dir == Direction::RaiseY ? e.y : e.x, target, 1e-10 * std::max(1.0, target));
      }
    }
  }
}

TEST(SolveSplit, Preconditions) {
  const Mat2 f = outer({1.0, 0.0}, kDirW);  // F v = 0
  EXPECT_THROW(solve_split(f, Direction::RaiseY, 2.0), DegenerateDirection);
  EXPECT_THROW(solve_degenerate_split(Mat2::identity(), Direction::RaiseY, 2.0), PreconditionViolated);
  EXPECT_THROW(solve_split(Mat2::identity(), Direction::RaiseY, 0.5), PreconditionViolated);
  const SplitSolution s = solve_degenerate_split(f, Direction::RaiseY, 2.0);
  EXPECT_GT(s.t_plus, 0.0);
  EXPECT_LT(s.t_minus, 0.0);
}

TEST(BuildLaminate, IdentityIsSecondOrderWithLeavesOnWells) {
  const Laminate l = build_laminate(Mat2::identity(), kP15);
  EXPECT_EQ(l.region(), PhaseRegion::SecondOrder);
  EXPECT_EQ(l.depth(), 2);
  const auto leaves = l.leaves();
  ASSERT_EQ(leaves.size(), 4u);
  double wsum = 0.0;
  for (const auto& leaf : leaves) {
    wsum += leaf.weight;
    EXPECT_LE(dist2_two_wells(leaf.matrix, kP15), 1e-10);
    EXPECT_NEAR(leaf.matrix.det(), 1.0, 1e-12);
  }
  EXPECT_NEAR(wsum, 1.0, 1e-15);
  const LaminateReport r = verify_laminate(l, kP15, ThetaSpec::indicator_det_one());
  EXPECT_TRUE(r.passed(1e-10));
  EXPECT_EQ(r.rank_one_defects.size(), 3u);
}

TEST(BuildLaminate, UnrelaxedIsSingleLeaf) {
  const Mat2 f = Mat2::diag(2.0, 0.5);
  const Laminate l = build_laminate(f, kP15);
  EXPECT_EQ(l.region(), PhaseRegion::Unrelaxed);
  EXPECT_EQ(l.depth(), 0);
  ASSERT_EQ(l.leaves().size(), 1u);
  EXPECT_NEAR(W_eval(l.leaves()[0].matrix, kP15, ThetaSpec::zero()).value(), 5.0 / 18.0, 1e-14);
}

TEST(BuildLaminate, WellsGiveTrivialReport) {
  for (const Mat2& u : {kP15.U1(), kP15.U2()}) {
    const Laminate l = build_laminate(u, kP15);
    EXPECT_EQ(l.leaves().size(), 1u);
    const LaminateReport r = verify_laminate(l, kP15, ThetaSpec::zero());
    EXPECT_EQ(r.depth, 0);
    EXPECT_EQ(r.barycenter_error, 0.0);
    EXPECT_LE(r.energy_gap, 1e-14);
    EXPECT_TRUE(r.rank_one_defects.empty());
    EXPECT_LE(r.max_leaf_distance_to_target_coords, 1e-14);
    EXPECT_EQ(r.parameter_error, 0.0);
  }
}

TEST(BuildLaminate, FirstOrderHasTwoLeavesAtTarget) {
  // x below phi(2, 1) with y = 2: raise x only.
  const Mat2 f = [] {
    const Coords c{0.7, 2.0, 1.0};
    // Rebuild a matrix with these coordinates: columns Fv, Fw in the frame (v, w).
    const double z = std::sqrt(c.x * c.x * c.y * c.y - c.d * c.d);
    const Vec2 fv{c.x, 0.0}, fw{z / c.x, -c.d / c.x};
    return outer(fv, kDirV) + outer(fw, kDirW);
  }();
  const Coords c = coords(f);
  ASSERT_NEAR(c.x, 0.7, 1e-14);
  ASSERT_NEAR(c.y, 2.0, 1e-14);
  ASSERT_NEAR(c.d, 1.0, 1e-14);
  const Laminate l = build_laminate(f, kP15);
  EXPECT_EQ(l.region(), PhaseRegion::FirstOrderRaiseX);
  EXPECT_EQ(l.depth(), 1);
  const double xs = phi(2.0, 1.0, kP15).x_star;
  for (const auto& leaf : l.leaves()) {
    const Coords lc = coords(leaf.matrix);
    EXPECT_NEAR(lc.x, xs, 1e-12);
    EXPECT_NEAR(lc.y, 2.0, 1e-12);
    EXPECT_NEAR(lc.d, 1.0, 1e-12);
  }
  EXPECT_TRUE(verify_laminate(l, kP15, ThetaSpec::zero()).passed(1e-10));
}

TEST(BuildLaminate, SingularRankOneMatrix) {
  // F v = 0: the first split runs along the replacement line F + t w⊗w.
  const Mat2 f = outer({0.3, 0.1}, kDirW);
  ASSERT_TRUE(null_direction(f, Direction::RaiseY));
  const Laminate l = build_laminate(f, kP15);
  ASSERT_TRUE(l.root().split.has_value());
  EXPECT_TRUE(l.root().split->degenerate);
  const LaminateReport r = verify_laminate(l, kP15, ThetaSpec::zero());
  EXPECT_TRUE(r.passed(1e-10)) << r.barycenter_error << " " << r.energy_gap << " " << r.max_rank_one_defect();
  EXPECT_LE(r.depth, 2);
}

TEST(BuildLaminate, GenericRankOneMatrix) {
  const Mat2 f = outer({1.0, 0.0}, {1.0, 0.0});
  const Laminate l = build_laminate(f, kP15);
  EXPECT_EQ(l.region(), PhaseRegion::SecondOrder);
  EXPECT_TRUE(verify_laminate(l, kP15, ThetaSpec::zero()).passed(1e-10));
}

TEST(BuildLaminate, ZeroMatrix) {
  const Laminate l = build_laminate(Mat2{}, kP15);
  EXPECT_TRUE(verify_laminate(l, kP15, ThetaSpec::zero()).passed(1e-10));
}

TEST(BuildLaminate, RejectsNonFinite) {
  EXPECT_THROW(build_laminate(Mat2{NAN, 0.0, 0.0, 1.0}, kP15), InadmissibleInput);
  EXPECT_THROW(build_laminate(Mat2{INFINITY, 0.0, 0.0, 1.0}, kP15), InadmissibleInput);
}

TEST(VerifyLaminate, DetectsPerturbedWeight) {
  Laminate l = build_laminate(Mat2::identity(), kP15);
  l.mutable_root().split->mu += 0.1;
  const LaminateReport r = verify_laminate(l, kP15, ThetaSpec::zero());
  EXPECT_GT(r.barycenter_error, 1e-3);
  EXPECT_FALSE(r.passed(1e-6));
}

TEST(VerifyLaminate, DetectsNonCompatibleChildren) {
  Laminate l = build_laminate(Mat2::diag(1.0, 1.0), kP15);
  l.mutable_root().children[0].matrix = l.mutable_root().children[0].matrix + Mat2::diag(1e-3, 0.0);
  const LaminateReport r = verify_laminate(l, kP15, ThetaSpec::zero());
  EXPECT_GT(r.parameter_error, 1e-4);
  EXPECT_FALSE(r.passed(1e-6));
}

TEST(VerifyLaminate, RandomMatricesRecoverRelaxation) {
  for (double lam : {1.0001, 1.5, 5.0}) {
    const WellParams p(lam);
    Rng rng(52);
    for (int i = 0; i < 2000; ++i) {
      const Mat2 f{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
      const LaminateReport r = verify_laminate(build_laminate(f, p), p, ThetaSpec::zero());
      const double w = W_eval(f, p, ThetaSpec::zero()).value();
      EXPECT_LE(r.energy_gap, 1e-6 * std::max(1.0, w)) << lam;
      EXPECT_LE(r.barycenter_error, 1e-10 * std::max(1.0, f.norm()));
      EXPECT_LE(r.max_rank_one_defect(), 1e-10 * std::max(1.0, f.norm_sq()));
      EXPECT_LE(r.depth, 2);
    }
  }
}

}  // namespace
