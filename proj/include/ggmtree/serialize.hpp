#pragma once

#include <json.hpp>

#include "ggmtree/boundary_law.hpp"
#include "ggmtree/ggm_layer.hpp"
#include "ggmtree/simplex_dynamics.hpp"
#include "ggmtree/thresholds.hpp"

namespace ggmtree {

inline void to_json(nlohmann::json& j, const SimplexVector& v) { j = v.entries(); }

inline void to_json(nlohmann::json& j, const EigenvalueEntry& e) {
  j = {{"j", e.j}, {"value", e.value}, {"multiplicity", e.multiplicity}};
}

inline void to_json(nlohmann::json& j, const SpectrumReport& rep) {
  j = {{"q", rep.q},
       {"d", rep.d},
       {"eigenvalues", rep.eigenvalues},
       {"unstable_dim", rep.unstable_dim},
       {"neutral_indices", rep.neutral_indices}};
  if (rep.tau) j["tau"] = *rep.tau;
}

inline void to_json(nlohmann::json& j, const RadialBoundaryLaw& law) {
  j = {{"q", law.q},     {"d", law.d},           {"depth", law.depth},
       {"seed", law.seed}, {"inbound", law.inbound}, {"outbound", law.outbound}};
  if (law.truncated) j["truncated"] = law.diagnostic;
}

inline void to_json(nlohmann::json& j, const EdgeMarginal& m) {
  nlohmann::json probs = nlohmann::json::object();
  for (const auto& [k, p] : m.probs) probs[std::to_string(k)] = p;
  j = {{"probs", probs}, {"tail_mass", m.tail_mass}};
}

inline void to_json(nlohmann::json& j, const PathIncrementDistribution& dist) {
  nlohmann::json probs = nlohmann::json::object();
  for (const auto& [k, p] : dist.probs) probs[std::to_string(k)] = p;
  j = {{"probs", probs}, {"tail_mass", dist.tail_mass}};
}

inline void to_json(nlohmann::json& j, const TiResult& t) {
  j = {{"value", t.value}, {"shift", t.shift}};
}

inline void to_json(nlohmann::json& j, const QScanRow& row) {
  j = {{"q", row.q},
       {"exists", row.exists},
       {"unstable_dim", row.unstable_dim},
       {"max_modulus", row.max_modulus},
       {"neutral", row.neutral}};
}

inline void to_json(nlohmann::json& j, const DobrushinResult& r) {
  j = {{"conclusive", r.conclusive}, {"unique", r.unique}, {"delta_q", r.delta_q}};
}

inline void to_json(nlohmann::json& j, const ThresholdReport& rep) {
  j = {{"model", rep.model}, {"d", rep.d}, {"q_max", rep.q_max},
       {"region_all_q", rep.region_all_q}, {"per_q", rep.scan.rows}};
  for (const auto& [name, value] : rep.params) j["params"][name] = value;
  switch (rep.kind) {
    case ThresholdReport::PeriodKind::value: j["minimal_period"] = rep.minimal_period; break;
    case ThresholdReport::PeriodKind::all_q: j["minimal_period"] = "all q >= 2"; break;
    case ThresholdReport::PeriodKind::none: j["minimal_period"] = "none <= q_max"; break;
  }
  if (rep.closed_form_period) j["closed_form_period"] = *rep.closed_form_period;
  nlohmann::json dob = nlohmann::json::array();
  for (const auto& [q, r] : rep.dobrushin) {
    nlohmann::json row = r;
    row["q"] = q;
    dob.push_back(row);
  }
  j["dobrushin"] = dob;
  if (!rep.notes.empty()) j["notes"] = rep.notes;
}

} // namespace ggmtree
