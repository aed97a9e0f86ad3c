// Acceptance run: one PASS/FAIL line per criterion, metrics underneath.
// Exit status is nonzero if any criterion fails.

#include <cstdio>
#include <string>
#include <vector>

#include "qcrelax/io.hpp"
#include "qcrelax/verify.hpp"

namespace {

using namespace qcrelax;

constexpr std::uint64_t kSeed = 20240601;

struct Criterion {
  std::string id;
  std::string title;
  std::vector<SuiteResult> suites;
  double time_limit = 0.0;  // seconds, 0 = none

  double seconds() const {
    double t = 0.0;
    for (const auto& s : suites) t += s.seconds;
    return t;
  }
  bool passed() const {
    for (const auto& s : suites)
      if (!s.passed()) return false;
    return time_limit <= 0.0 || seconds() < time_limit;
  }
};

void report(const Criterion& c) {
  std::printf("[%s] %s %s (%.2f s", c.passed() ? "PASS" : "FAIL", c.id.c_str(), c.title.c_str(), c.seconds());
  if (c.time_limit > 0.0) std::printf(", limit %.0f s", c.time_limit);
  std::printf(")\n");
  for (const auto& s : c.suites) {
    std::printf("    %s %s, %ld samples\n", s.passed() ? "ok " : "BAD", s.name.c_str(), s.samples);
    if (!s.error.empty()) std::printf("        error: %s\n", s.error.c_str());
    for (const auto& m : s.metrics)
      std::printf("        %s %s = %s (threshold %g)\n", m.ok() ? "ok " : "BAD", m.name.c_str(),
                  format_number(m.value).c_str(), m.threshold);
  }
  std::fflush(stdout);
}

}  // namespace

int main() {
  const std::vector<double> lambdas{1.1, 1.5, 2.0, 5.0};
  const WellParams p15(1.5);
  const unsigned threads = thread_count_from_env();

  std::vector<Criterion> all;
  const auto run = [&](Criterion c) {
    report(c);
    all.push_back(std::move(c));
  };

  run({"AC1", "well distance identity", {suite_well_distance(lambdas, 10'000, kSeed, 10'000)}, 30.0});
  run({"AC2", "anchor point", {suite_anchor_point(lambdas)}});
  run({"AC3", "envelope vs grid oracle", {suite_envelope(p15, 1'000, kSeed, 200, 3)}, 120.0});
  run({"AC4", "laminate upper bound", {suite_laminates(p15, 1'000, kSeed)}});
  run({"AC5", "phase diagram slice", {suite_phase_slice(1.5, 201, true, threads)}, 60.0});
  run({"AC6",
       "convexity battery",
       {suite_rank_one_convexity(p15, 10'000, kSeed), suite_extension_convexity(p15, 10'000, kSeed),
        suite_hessian_psd(p15, 10'000, kSeed), suite_c1_matching(p15, 1'000, kSeed)}});
  run({"AC7", "monotonicity and Xi bound", {suite_phi_monotone(p15, {-1.0, 0.0, 1.0, 2.0}), suite_xi(p15, 100'000, kSeed)}});
  run({"AC8", "quartic cross-check", {suite_quartic(p15, 1'000, kSeed)}});

  int failed = 0;
  for (const auto& c : all) failed += !c.passed();
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
