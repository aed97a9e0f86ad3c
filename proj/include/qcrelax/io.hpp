#pragma once

// JSON views of the library's value types. Infinite energies are written as
// the string "inf".

#include <cstdio>
#include <string>

#include <json.hpp>

#include "qcrelax/energy.hpp"
#include "qcrelax/laminate.hpp"
#include "qcrelax/mat2.hpp"
#include "qcrelax/oracle.hpp"
#include "qcrelax/relaxation.hpp"

namespace qcrelax {

inline constexpr const char* kSchemaVersion = "1";

/// %.17g, or "inf".
inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_energy(EnergyValue e) {
  return e.is_infinite() ? "inf" : format_number(e.value());
}

inline nlohmann::json to_json(EnergyValue e) {
  if (e.is_infinite()) return "inf";
  return e.value();
}

inline nlohmann::json to_json(const Mat2& f) {
  const auto& m = f.entries();
  return nlohmann::json::array({m[0], m[1], m[2], m[3]});
}

inline nlohmann::json to_json(const Coords& c) { return {{"x", c.x}, {"y", c.y}, {"d", c.d}}; }

inline nlohmann::json node_to_json(const LaminateNode& n, double weight, const WellParams& p,
                                   const ThetaSpec& th) {
  nlohmann::json j;
  j["matrix"] = to_json(n.matrix);
  j["weight"] = weight;
  if (n.is_leaf()) {
    j["coords"] = to_json(coords(n.matrix));
    j["W"] = to_json(W_eval(n.matrix, p, th));
    return j;
  }
  const Split& s = *n.split;
  j["split"] = {{"mu", s.mu},
                {"direction", to_string(s.direction)},
                {"degenerate", s.degenerate},
                {"t_plus", s.t_plus},
                {"t_minus", s.t_minus}};
  j["children"] = nlohmann::json::array({node_to_json(n.children[0], weight * s.mu, p, th),
                                         node_to_json(n.children[1], weight * (1.0 - s.mu), p, th)});
  return j;
}

inline nlohmann::json to_json(const LaminateReport& r) {
  auto finite_or_inf = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return "inf";
    return v;
  };
  nlohmann::json defects = nlohmann::json::array();
  for (double d : r.rank_one_defects) defects.push_back(finite_or_inf(d));
  return {{"barycenter_error", finite_or_inf(r.barycenter_error)},
          {"energy_gap", finite_or_inf(r.energy_gap)},
          {"rank_one_defects", defects},
          {"max_leaf_distance_to_target_coords", finite_or_inf(r.max_leaf_distance_to_target_coords)},
          {"parameter_error", finite_or_inf(r.parameter_error)},
          {"depth", r.depth}};
}

inline nlohmann::json to_json(const Laminate& l, const WellParams& p, const ThetaSpec& th) {
  nlohmann::json leaves = nlohmann::json::array();
  for (const auto& leaf : l.leaves())
    leaves.push_back({{"weight", leaf.weight},
                      {"matrix", to_json(leaf.matrix)},
                      {"coords", to_json(coords(leaf.matrix))},
                      {"W", to_json(W_eval(leaf.matrix, p, th))}});
  return {{"region", to_string(l.region())},
          {"order", l.depth()},
          {"root", node_to_json(l.root(), 1.0, p, th)},
          {"leaves", leaves}};
}

inline nlohmann::json to_json(const XiReport& r) {
  return {{"samples", r.samples},
          {"min_xi_scaled", r.min_xi_scaled},
          {"min_mixed_partial_scaled", r.min_mixed_partial_scaled},
          {"stationary_samples", r.stationary_samples},
          {"min_mixed_partial_at_stationary", r.min_mixed_partial_at_stationary},
          {"passed", r.passed()}};
}

inline nlohmann::json to_json(const HessianReport& r) {
  return {{"requested", r.requested},
          {"accepted", r.accepted},
          {"attempts", r.attempts},
          {"min_eigenvalue_scaled", r.min_eigenvalue_scaled},
          {"fd_compared", r.fd_compared},
          {"max_fd_mismatch", r.max_fd_mismatch},
          {"passed", r.passed()}};
}

}  // namespace qcrelax
