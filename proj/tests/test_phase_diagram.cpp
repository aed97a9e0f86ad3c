#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "qcrelax/io.hpp"
#include "qcrelax/phase_diagram.hpp"

namespace {

using namespace qcrelax;

SliceSpec small_slice() {
  SliceSpec s;
  s.a = {0.4, 2.0, 33};
  s.b = {-1.0, 1.0, 41};
  return s;
}

TEST(Slice, Validation) {
  SliceSpec s;
  EXPECT_NO_THROW(s.validate());
  s.a = {1.0, 0.5, 10};
  EXPECT_THROW(s.validate(), PreconditionViolated);
  s = SliceSpec{};
  s.b.n = 1;
  EXPECT_THROW(s.validate(), PreconditionViolated);
  s = SliceSpec{};
  s.lambda = 1.0;
  EXPECT_THROW(s.validate(), PreconditionViolated);
  s = SliceSpec{};
  s.a = {-0.5, 1.0, 10};
  EXPECT_THROW(s.validate(), PreconditionViolated);
  EXPECT_THROW(theta_from_name("quadratic"), PreconditionViolated);
}

TEST(Slice, GridEndpointsExact) {
  const GridRange g{0.4, 2.0, 201};
  EXPECT_EQ(g.at(0), 0.4);
  EXPECT_EQ(g.at(200), 2.0);
  EXPECT_NEAR(g.at(75), 1.0, 1e-15);
}

TEST(Slice, IdentityRow) {
  const PhaseRow r = evaluate_slice_point(1.0, 0.0, WellParams(1.5), ThetaSpec::indicator_det_one());
  EXPECT_EQ(r.region, PhaseRegion::SecondOrder);
  EXPECT_NEAR(r.Wqc.value(), 0.0, 1e-12);
  EXPECT_TRUE(r.kqc_member);
}

TEST(Slice, DefaultSliceZeroSetAndLayout) {
  const SliceSpec s;
  const auto rows = compute_phase_diagram(s, 4);
  ASSERT_EQ(rows.size(), 201u * 201u);
  const SliceStructure st = analyze_slice(s, rows);
  EXPECT_EQ(st.zero_set_mismatches, 0);
  EXPECT_EQ(st.second_order_mismatches, 0);
  EXPECT_EQ(st.kqc_flag_mismatches, 0);
  EXPECT_EQ(st.kqc_positive_energy, 0);
  EXPECT_TRUE(st.five_region_layout());
  EXPECT_TRUE(st.passed());
  for (const PhaseRow& r : rows) {
    if (r.kqc_member) {
      EXPECT_LE(r.Wqc.value(), 1e-10);
    }
    EXPECT_TRUE(r.W.is_infinite() || r.Wqc.value() <= r.W.value() + 1e-12);
  }
}

TEST(Slice, DeterministicAcrossThreadCounts) {
  const SliceSpec s = small_slice();
  const auto serial = compute_phase_diagram(s, 1);
  std::ostringstream a;
  write_phase_csv(a, serial);
  for (unsigned t : {2u, 3u, 8u}) {
    std::ostringstream b;
    write_phase_csv(b, compute_phase_diagram(s, t));
    EXPECT_EQ(a.str(), b.str()) << t;
  }
}

TEST(Slice, CsvHeaderAndFormat) {
  SliceSpec s;
  s.a = {0.9, 1.1, 3};
  s.b = {-0.1, 0.1, 3};
  std::ostringstream os;
  write_phase_csv(os, compute_phase_diagram(s));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "a,b,W,Wqc,region,kqc_member");
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
  }
  EXPECT_EQ(n, 9);
  EXPECT_EQ(format_energy(EnergyValue::infinity()), "inf");
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
}

TEST(Slice, JsonCarriesSchemaAndBoundaries) {
  const SliceSpec s = small_slice();
  const nlohmann::json j = phase_json(s, compute_phase_diagram(s), boundary_curves(s));
  EXPECT_EQ(j.at("schema_version"), "1");
  EXPECT_EQ(j.at("points").size(), 33u * 41u);
  ASSERT_EQ(j.at("boundaries").size(), 4u);
  const double L = WellParams(1.5).L();
  for (const auto& c : j.at("boundaries"))
    for (const auto& pt : c.at("points")) {
      const double a = pt[0], b = pt[1];
      const double plus = (a + b) * (a + b) + 1.0 / (a * a), minus = (a - b) * (a - b) + 1.0 / (a * a);
      EXPECT_NEAR(std::min(std::abs(plus - L), std::abs(minus - L)), 0.0, 1e-12);
    }
}

TEST(Slice, TransitionsAlongUnitColumnMatchBoundaries) {
  // At a = 1: (1 +- b)^2 + 1 = L, so |b| = sqrt(L - 1) - 1.
  SliceSpec s;
  s.a = {0.99, 1.01, 3};
  s.b = {-1.0, 1.0, 2001};
  const auto rows = compute_phase_diagram(s);
  const double bstar = std::sqrt(WellParams(1.5).L() - 1.0) - 1.0;
  const double cell = s.b.step();
  for (int j = 0; j < s.b.n; ++j) {
    const PhaseRow& r = rows[static_cast<std::size_t>(s.b.n) + j];  // a = 1 row
    if (std::abs(std::abs(r.b) - bstar) <= cell) continue;
    EXPECT_EQ(r.region == PhaseRegion::SecondOrder, std::abs(r.b) < bstar) << r.b;
  }
}

}  // namespace
