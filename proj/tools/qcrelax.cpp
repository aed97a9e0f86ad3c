// qcrelax: pointwise evaluation, phase-diagram export, laminate inspection
// and the verification battery for the relaxed two-well energy.
//
// Exit codes: 0 ok, 1 verification/laminate check failed, 2 malformed flags,
// 3 I/O failure.

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcrelax/energy.hpp"
#include "qcrelax/io.hpp"
#include "qcrelax/laminate.hpp"
#include "qcrelax/phase_diagram.hpp"
#include "qcrelax/relaxation.hpp"
#include "qcrelax/verify.hpp"

namespace {

using namespace qcrelax;

constexpr int kExitCheckFailed = 1;
constexpr int kExitBadFlags = 2;
constexpr int kExitIo = 3;

struct FlagError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Mat2 matrix_from(const std::vector<double>& m) {
  if (m.size() != 4) throw FlagError("--matrix takes exactly 4 numbers (row-major)");
  const Mat2 f(m[0], m[1], m[2], m[3]);
  if (!f.finite()) throw FlagError("--matrix entries must be finite");
  return f;
}

WellParams params_from(double lambda) {
  try {
    return WellParams(lambda);
  } catch (const PreconditionViolated& e) {
    throw FlagError(e.what());
  }
}

ThetaSpec theta_from(const std::string& name) {
  try {
    return theta_from_name(name);
  } catch (const PreconditionViolated& e) {
    throw FlagError(e.what());
  }
}

GridRange range_from(const std::vector<double>& v, const char* flag) {
  if (v.size() != 3 || v[2] != static_cast<double>(static_cast<int>(v[2])))
    throw FlagError(std::string(flag) + " takes LO HI N");
  return {v[0], v[1], static_cast<int>(v[2])};
}

int cmd_eval(const std::vector<double>& matrix, double lambda, const std::string& theta) {
  const Mat2 f = matrix_from(matrix);
  const WellParams p = params_from(lambda);
  const ThetaSpec th = theta_from(theta);
  const Coords c = coords(f);
  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"matrix", to_json(f)},
                   {"lambda", lambda},
                   {"theta", theta},
                   {"W", to_json(W_eval(f, p, th))},
                   {"Wqc", to_json(Wqc_eval(f, p, th))},
                   {"coords", to_json(c)},
                   {"region", to_string(classify(c, p))},
                   {"kqc_member", kqc_member(f, p)}};
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_phase_diagram(SliceSpec s, const std::string& out, const std::string& format) {
  try {
    s.validate();
  } catch (const PreconditionViolated& e) {
    throw FlagError(e.what());
  }
  theta_from(s.theta);
  const auto rows = compute_phase_diagram(s, thread_count_from_env());
  const auto curves = boundary_curves(s);

  std::ofstream os(out, std::ios::binary);
  if (!os) {
    std::cerr << "error: cannot open " << out << " for writing\n";
    return kExitIo;
  }
  if (format == "json") {
    os << phase_json(s, rows, curves).dump() << '\n';
  } else {
    write_phase_csv(os, rows);
    const std::filesystem::path side = std::filesystem::path(out).replace_extension("").string() + "_boundaries.csv";
    std::ofstream bs(side, std::ios::binary);
    if (!bs) {
      std::cerr << "error: cannot open " << side.string() << " for writing\n";
      return kExitIo;
    }
    write_boundaries_csv(bs, curves);
    if (!bs.flush()) return kExitIo;
  }
  if (!os.flush()) {
    std::cerr << "error: write to " << out << " failed\n";
    return kExitIo;
  }
  return 0;
}

int cmd_laminate(const std::vector<double>& matrix, double lambda, const std::string& theta) {
  const Mat2 f = matrix_from(matrix);
  const WellParams p = params_from(lambda);
  const ThetaSpec th = theta_from(theta);
  const Laminate l = build_laminate(f, p);
  const LaminateReport rep = verify_laminate(l, p, th);
  const bool ok = rep.passed(1e-6);
  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"lambda", lambda},
                   {"theta", theta},
                   {"matrix", to_json(f)},
                   {"Wqc", to_json(Wqc_eval(f, p, th))},
                   {"laminate", to_json(l, p, th)},
                   {"report", to_json(rep)},
                   {"passed", ok}};
  std::cout << j.dump(2) << '\n';
  return ok ? 0 : kExitCheckFailed;
}

int cmd_verify(double lambda, std::uint64_t seed, long samples, bool json) {
  const WellParams p = params_from(lambda);
  if (samples < 10) throw FlagError("--samples must be >= 10");
  const long tenth = std::max(1L, samples / 10);
  std::vector<SuiteResult> results;
  results.push_back(suite_well_distance({lambda}, samples, seed));
  results.push_back(suite_anchor_point({lambda}));
  results.push_back(suite_envelope(p, tenth, seed));
  results.push_back(suite_laminates(p, samples, seed));
  results.push_back(suite_rank_one_convexity(p, samples, seed));
  results.push_back(suite_extension_convexity(p, samples, seed));
  results.push_back(suite_hessian_psd(p, samples, seed));
  results.push_back(suite_c1_matching(p, tenth, seed));
  results.push_back(suite_phi_monotone(p, {-1.0, 0.0, 1.0, 2.0}));
  results.push_back(suite_xi(p, 10 * samples, seed));
  results.push_back(suite_quartic(p, tenth, seed));
  results.push_back(suite_phase_slice(lambda, 101, false, thread_count_from_env()));

  bool all = true;
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& r : results) {
    all = all && r.passed();
    if (json) {
      summary.push_back(to_json(r));
      continue;
    }
    std::cout << (r.passed() ? "PASS " : "FAIL ") << r.name << " (" << r.samples << " samples)";
    if (!r.error.empty()) std::cout << " error: " << r.error;
    std::cout << '\n';
    for (const auto& m : r.metrics)
      std::cout << "    " << (m.ok() ? "ok  " : "BAD ") << m.name << " = " << format_number(m.value) << '\n';
  }
  if (json)
    std::cout << nlohmann::json{{"schema_version", kSchemaVersion}, {"lambda", lambda}, {"seed", seed},
                                {"samples", samples}, {"passed", all}, {"suites", summary}}
                     .dump(2)
              << '\n';
  else
    std::cout << (all ? "all suites passed" : "some suites FAILED") << '\n';
  return all ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxed two-well energy: evaluation, phase diagrams, laminates, verification"};
  app.require_subcommand(1);

  std::vector<double> matrix;
  double lambda = 1.5;
  std::string theta = "zero";

  auto* eval = app.add_subcommand("eval", "Evaluate W, W^qc, coordinates and region at one matrix");
  eval->add_option("--matrix", matrix, "F as four numbers, row-major")->required()->expected(4);
  eval->add_option("--lambda", lambda, "Well stretch lambda > 1")->capture_default_str();
  eval->add_option("--theta", theta, "zero | indicator_det1 | log_squared")->capture_default_str();

  SliceSpec slice;
  std::vector<double> a_range, b_range;
  std::string out, format = "csv";
  auto* pd = app.add_subcommand("phase-diagram", "Export W^qc on the slice F = (a b; 0 1/a)");
  pd->add_option("--out", out, "Output file")->required();
  pd->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  pd->add_option("--a-range", a_range, "LO HI N (default 0.4 2 201)")->expected(3);
  pd->add_option("--b-range", b_range, "LO HI N (default -1 1 201)")->expected(3);
  pd->add_option("--lambda", slice.lambda, "Well stretch lambda > 1")->capture_default_str();
  pd->add_option("--theta", slice.theta, "zero | indicator_det1 | log_squared")->capture_default_str();

  std::string lam_theta = "zero";
  auto* lam = app.add_subcommand("laminate", "Build and check the optimal laminate at one matrix");
  lam->add_option("--matrix", matrix, "F as four numbers, row-major")->required()->expected(4);
  lam->add_option("--lambda", lambda, "Well stretch lambda > 1")->capture_default_str();
  lam->add_option("--theta", lam_theta, "zero | indicator_det1 | log_squared")->capture_default_str();

  std::uint64_t seed = 42;
  long samples = 10000;
  bool json = false;
  auto* ver = app.add_subcommand("verify", "Run the randomised verification battery");
  ver->add_option("--lambda", lambda, "Well stretch lambda > 1")->capture_default_str();
  ver->add_option("--seed", seed, "Random seed")->capture_default_str();
  ver->add_option("--samples", samples, "Base sample count per suite")->capture_default_str();
  ver->add_flag("--json", json, "Emit a JSON summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitBadFlags;
  }

  try {
    if (*eval) return cmd_eval(matrix, lambda, theta);
    if (*pd) {
      if (!a_range.empty()) slice.a = range_from(a_range, "--a-range");
      if (!b_range.empty()) slice.b = range_from(b_range, "--b-range");
      return cmd_phase_diagram(slice, out, format);
    }
    if (*lam) return cmd_laminate(matrix, lambda, lam_theta);
    if (*ver) return cmd_verify(lambda, seed, samples, json);
  } catch (const FlagError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadFlags;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitBadFlags;
}
