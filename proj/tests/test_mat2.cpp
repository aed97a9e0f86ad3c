#include <cmath>

#include <gtest/gtest.h>

#include "qcrelax/errors.hpp"
#include "qcrelax/mat2.hpp"
#include "qcrelax/random.hpp"

namespace {

using namespace qcrelax;

Mat2 random_matrix(Rng& rng, double w) {
  return {rng.uniform(-w, w), rng.uniform(-w, w), rng.uniform(-w, w), rng.uniform(-w, w)};
}

TEST(Mat2, BasicAlgebra) {
  const Mat2 a{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(a(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(a(1, 0), 3.0);
  EXPECT_DOUBLE_EQ(a.det(), -2.0);
  EXPECT_DOUBLE_EQ(a.norm_sq(), 30.0);
  EXPECT_EQ(a * Mat2::identity(), a);
  EXPECT_EQ(a.transposed().transposed(), a);
  const Vec2 c = a.col(1);
  EXPECT_DOUBLE_EQ(c.x, 2.0);
  EXPECT_DOUBLE_EQ(c.y, 4.0);
  const Vec2 im = a * Vec2{1.0, 1.0};
  EXPECT_DOUBLE_EQ(im.x, 3.0);
  EXPECT_DOUBLE_EQ(im.y, 7.0);
  EXPECT_TRUE(a.finite());
  EXPECT_FALSE((Mat2{1.0, NAN, 0.0, 1.0}).finite());
}

TEST(Mat2, OuterProductHasRankOne) {
  const Mat2 o = outer({1.0, 2.0}, {3.0, -1.0});
  EXPECT_DOUBLE_EQ(o.det(), 0.0);
  EXPECT_DOUBLE_EQ(o(1, 0), 6.0);
}

TEST(Coords, Identity) {
  const Coords c = coords(Mat2::identity());
  EXPECT_NEAR(c.x, 1.0, 1e-15);
  EXPECT_NEAR(c.y, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(c.d, 1.0);
}

TEST(Coords, WellU1) {
  const double lam = 1.5;
  const double L = lam * lam + 1.0 / (lam * lam);
  const Coords c = coords(Mat2::diag(lam, 1.0 / lam));
  EXPECT_NEAR(c.x, std::sqrt(L / 2.0), 1e-15);
  EXPECT_NEAR(c.y, std::sqrt(L / 2.0), 1e-15);
  EXPECT_NEAR(c.x, 1.160699023098677, 1e-15);
  EXPECT_NEAR(c.d, 1.0, 1e-15);
}

TEST(Coords, DiagTwoHalfMatchesComponentwise) {
  const Mat2 f = Mat2::diag(2.0, 0.5);
  const Coords c = coords(f);
  // |F v|^2 = ((2 + 0)^2 + (0 + 0.5)^2) / 2 computed by hand.
  const double x_ref = std::sqrt((4.0 + 0.25) / 2.0);
  EXPECT_NEAR(c.x, std::sqrt(2.125), 1e-15);
  EXPECT_NEAR(c.x, x_ref, 1e-15);
  EXPECT_NEAR(c.y, x_ref, 1e-15);
  EXPECT_NEAR(c.x, 1.457737973711325, 1e-14);
  EXPECT_DOUBLE_EQ(c.d, 1.0);
}

TEST(Coords, CauchySchwarzOnRandomMatrices) {
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    const Mat2 f = random_matrix(rng, 5.0);
    const Coords c = coords(f);
    EXPECT_GE(c.x * c.y, std::abs(c.d) - 1e-12 * std::max(1.0, f.norm_sq()));
    // |Fv . Fw| = sqrt(x^2 y^2 - d^2)
    const double cross = std::abs(dot(f * kDirV, f * kDirW));
    EXPECT_NEAR(cross * cross, c.x * c.x * c.y * c.y - c.d * c.d, 1e-10 * std::max(1.0, f.norm_sq() * f.norm_sq()));
  }
}

TEST(SignedSingularValues, SpecExamples) {
  auto s = signed_singular_values(Mat2::diag(2.0, 0.5));
  EXPECT_NEAR(s.lam1, 0.5, 1e-15);
  EXPECT_NEAR(s.lam2, 2.0, 1e-15);
  s = signed_singular_values(Mat2::diag(-2.0, 0.5));
  EXPECT_NEAR(s.lam1, -0.5, 1e-15);
  EXPECT_NEAR(s.lam2, 2.0, 1e-15);
  s = signed_singular_values(Mat2{});
  EXPECT_EQ(s.lam1, 0.0);
  EXPECT_EQ(s.lam2, 0.0);
}

TEST(SignedSingularValues, InvariantsOnRandomMatrices) {
  Rng rng(12);
  for (int i = 0; i < 10000; ++i) {
    const Mat2 f = random_matrix(rng, 5.0);
    const auto s = signed_singular_values(f);
    const double scale = std::max(1.0, f.norm_sq());
    EXPECT_GE(s.lam2, std::abs(s.lam1) - 1e-12 * scale);
    EXPECT_NEAR(s.lam1 * s.lam2, f.det(), 1e-12 * scale);
    EXPECT_NEAR(s.lam1 + s.lam2, std::sqrt(std::max(0.0, f.norm_sq() + 2.0 * f.det())), 1e-10 * scale);
  }
}

TEST(RankOneLine, IdentityExamples) {
  EXPECT_EQ(rank_one_line(Mat2::identity(), Direction::RaiseY, 0.0), Mat2::identity());
  for (double t : {-2.0, -0.3, 0.7, 3.0}) {
    const Coords c = coords(rank_one_line(Mat2::identity(), Direction::RaiseY, t));
    EXPECT_NEAR(c.x, 1.0, 1e-15);
    EXPECT_NEAR(c.y, std::sqrt(1.0 + t * t), 1e-14);
    EXPECT_NEAR(c.d, 1.0, 1e-15);
  }
}

TEST(RankOneLine, PreservesDetAndFixedCoordinate) {
  Rng rng(13);
  for (int i = 0; i < 10000; ++i) {
    const Mat2 f = random_matrix(rng, 3.0);
    const double t = rng.uniform(-5.0, 5.0);
    const Coords c0 = coords(f);
    const double scale = std::max(1.0, f.norm_sq()) * std::max(1.0, std::abs(t));
    const Coords cy = coords(rank_one_line(f, Direction::RaiseY, t));
    EXPECT_NEAR(cy.d, c0.d, 1e-12 * scale);
    EXPECT_NEAR(cy.x, c0.x, 1e-12 * scale);
    EXPECT_NEAR(cy.y, norm(f * kDirW + t * (f * kDirV)), 1e-12 * scale);
    const Coords cx = coords(rank_one_line(f, Direction::RaiseX, t));
    EXPECT_NEAR(cx.d, c0.d, 1e-12 * scale);
    EXPECT_NEAR(cx.y, c0.y, 1e-12 * scale);
    EXPECT_NEAR(cx.x, norm(f * kDirV + t * (f * kDirW)), 1e-12 * scale);
  }
}

TEST(RankOneLine, DifferenceIsRankOne) {
  Rng rng(14);
  for (int i = 0; i < 1000; ++i) {
    const Mat2 f = random_matrix(rng, 3.0);
    const Mat2 a = rank_one_line(f, Direction::RaiseY, 0.8);
    const Mat2 b = rank_one_line(f, Direction::RaiseY, -1.3);
    EXPECT_NEAR((a - b).det(), 0.0, 1e-12 * std::max(1.0, f.norm_sq()));
  }
}

TEST(DegenerateLine, ZeroMatrix) {
  const Mat2 g = degenerate_line(Mat2{}, Direction::RaiseY, 1.0);
  EXPECT_EQ(g, outer(kDirW, kDirW));
  const Coords c = coords(g);
  EXPECT_NEAR(c.x, 0.0, 1e-15);
  EXPECT_NEAR(c.y, 1.0, 1e-15);
  EXPECT_NEAR(c.d, 0.0, 1e-15);
}

TEST(DegenerateLine, ExpansionAndDeterminant) {
  const Vec2 a{1.0, 0.0};
  const Mat2 f = outer(a, kDirW);  // F v = 0
  ASSERT_TRUE(null_direction(f, Direction::RaiseY));
  for (double t : {-3.0, -0.5, 0.25, 2.0}) {
    const Mat2 g = degenerate_line(f, Direction::RaiseY, t);
    EXPECT_EQ(g, f + t * outer(kDirW, kDirW));
    EXPECT_NEAR(g.det(), 0.0, 1e-15);
    const Coords c = coords(g);
    EXPECT_NEAR(c.x, 0.0, 1e-15);
    EXPECT_NEAR(c.y, norm(a + t * kDirW), 1e-14);
  }
  const Mat2 h = outer({0.3, -2.0}, kDirV);  // F w = 0
  ASSERT_TRUE(null_direction(h, Direction::RaiseX));
  EXPECT_NEAR(degenerate_line(h, Direction::RaiseX, 1.7).det(), 0.0, 1e-15);
}

TEST(DegenerateLine, RejectsNonNullDirection) {
  EXPECT_THROW(degenerate_line(Mat2::identity(), Direction::RaiseY, 1.0), PreconditionViolated);
  EXPECT_THROW(degenerate_line(Mat2::identity(), Direction::RaiseX, 1.0), PreconditionViolated);
}

}  // namespace
