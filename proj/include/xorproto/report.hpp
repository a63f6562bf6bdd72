#pragma once

// Text and JSON renderings of analysis results. The JSON field names are
// listed in docs/output-schema.md. Timings are left out of the JSON so that
// identical inputs give byte-identical output.

#include <string>
#include <vector>

#include <json.hpp>

#include "xorproto/attack.hpp"
#include "xorproto/dsl.hpp"
#include "xorproto/nut.hpp"
#include "xorproto/unify_combined.hpp"

namespace xorproto {
namespace report {

using Json = nlohmann::ordered_json;

inline Json to_json(const Substitution& s) {
  Json out = Json::object();
  for (const auto& [x, t] : s.bindings()) out[x.to_string()] = t.to_string();
  return out;
}

inline Json to_json(const std::vector<Substitution>& ss) {
  Json out = Json::array();
  for (const auto& s : ss) out.push_back(to_json(s));
  return out;
}

inline Json to_json(const Equation& e) { return Json{{"lhs", e.lhs.to_string()}, {"rhs", e.rhs.to_string()}}; }

inline Json to_json(const ConstraintSequence& cs) {
  Json out = Json::array();
  for (const auto& c : cs.constraints) {
    Json terms = Json::array();
    for (const auto& t : c.terms) terms.push_back(t.to_string());
    out.push_back(Json{{"target", c.target.to_string()}, {"terms", terms}});
  }
  return out;
}

inline Json to_json(const std::vector<SolveStep>& path) {
  Json out = Json::array();
  for (const auto& st : path) {
    out.push_back(Json{{"rule", rule_name(st.rule)}, {"active", st.active}, {"choice", st.choice}});
  }
  return out;
}

inline Json unify_json(const UnificationProblem& p, const UnifierSet& u) {
  Json eqs = Json::array();
  for (const auto& e : p.equations) eqs.push_back(to_json(e));
  return Json{{"command", "unify"}, {"equations", eqs}, {"count", u.size()}, {"unifiers", to_json(u.unifiers)}};
}

inline std::string unify_text(const UnifierSet& u) {
  if (u.empty()) return "no unifiers\n";
  std::string out = std::to_string(u.size()) + (u.size() == 1 ? " unifier\n" : " unifiers\n");
  for (const auto& s : u) out += "  " + s.to_string() + "\n";
  return out;
}

inline Json nut_json(const std::string& command, const NutReport& r) {
  Json conds = Json::array();
  for (const auto& [name, pass] : r.conditions) conds.push_back(Json{{"name", name}, {"pass", pass}});
  Json ws = Json::array();
  for (const auto& w : r.witnesses) {
    ws.push_back(Json{{"condition", w.condition},
                      {"first", w.first.to_string()},
                      {"second", w.second.to_string()},
                      {"unifier", to_json(w.unifier)}});
  }
  return Json{{"command", command}, {"ok", r.ok()}, {"conditions", conds}, {"witnesses", ws}};
}

inline std::string nut_text(const NutReport& r) {
  std::string out = r.ok() ? "passes\n" : "fails\n";
  for (const auto& [name, pass] : r.conditions) out += "  " + name + ": " + (pass ? "pass" : "FAIL") + "\n";
  for (const auto& w : r.witnesses) out += "  witness " + w.to_string() + "\n";
  return out;
}

inline Json solve_json(const SolveResult& r) {
  Json paths = Json::array();
  for (const auto& p : r.paths) paths.push_back(to_json(p));
  return Json{{"command", "solve"},
              {"satisfiable", r.satisfiable()},
              {"truncated", r.truncated},
              {"nodes", r.nodes},
              {"solutions", to_json(r.solutions)},
              {"paths", paths}};
}

inline std::string solve_text(const SolveResult& r) {
  std::string out;
  if (r.satisfiable()) {
    out = std::to_string(r.solutions.size()) + (r.solutions.size() == 1 ? " solution" : " solutions");
  } else {
    out = "no solution";
  }
  out += r.truncated ? " (search truncated)\n" : "\n";
  for (std::size_t i = 0; i < r.solutions.size(); ++i) {
    out += "  " + r.solutions[i].to_string() + "\n";
    if (i < r.paths.size()) {
      std::string steps;
      for (const auto& st : r.paths[i]) steps += (steps.empty() ? "" : " ") + std::string(rule_name(st.rule));
      if (!steps.empty()) out += "    rules: " + steps + "\n";
    }
  }
  return out;
}

/// The solution a trace is drawn for: an ill-typed one when there is one.
inline const Substitution* trace_solution(const AttackWitness& w) {
  if (w.solutions.empty()) return nullptr;
  for (const auto& s : w.solutions) {
    if (!is_well_typed(s)) return &s;
  }
  return &w.solutions.front();
}

inline std::vector<std::string> trace_of(const AttackReport& r) {
  if (!r.witness) return {};
  const Substitution* s = trace_solution(*r.witness);
  return s ? render_trace(r.bundle, *r.witness, *s) : std::vector<std::string>{};
}

inline Json attack_json(const AttackReport& r) {
  Json out{{"kind", attack_kind_name(r.kind)},
           {"verdict", verdict_name(r.verdict)},
           {"sequences", r.sequences},
           {"solver_nodes", r.solver_nodes},
           {"truncated", r.truncated}};
  if (r.witness) {
    const auto& w = *r.witness;
    Json order = Json::array();
    for (const auto& n : w.sequence.interleaving) order.push_back(Json{{"strand", n.strand}, {"node", n.node}});
    Json trace = Json::array();
    for (const auto& l : trace_of(r)) trace.push_back(l);
    out["witness"] = Json{{"interleaving", order},
                          {"constraints", to_json(w.solved)},
                          {"secret", w.secret ? Json(w.secret->to_string()) : Json(nullptr)},
                          {"type_flaw", w.type_flaw},
                          {"solutions", to_json(w.solutions)},
                          {"well_typed", to_json(w.well_typed)},
                          {"trace", trace}};
  } else {
    out["witness"] = nullptr;
  }
  Json notes = Json::array();
  for (const auto& n : r.notes) notes.push_back(n);
  out["notes"] = notes;
  return out;
}

inline std::string attack_text(const AttackReport& r) {
  std::string out = std::string(attack_kind_name(r.kind)) + ": " + verdict_name(r.verdict) + " (" +
                    std::to_string(r.sequences) + " sequences, " + std::to_string(r.solver_nodes) + " nodes" +
                    (r.truncated ? ", truncated" : "") + ")\n";
  for (const auto& n : r.notes) out += "  note: " + n + "\n";
  if (!r.witness) return out;
  const auto& w = *r.witness;
  if (w.secret) out += "  secret " + w.secret->to_string() + "\n";
  out += "  constraints:\n";
  for (const auto& c : w.solved.constraints) out += "    " + c.to_string() + "\n";
  out += "  solutions:\n";
  for (const auto& s : w.solutions) {
    out += "    " + s.to_string() + (is_well_typed(s) ? "" : "  (ill-typed)") + "\n";
  }
  auto lines = trace_of(r);
  if (!lines.empty()) {
    out += "  trace:\n";
    for (const auto& l : lines) out += "    " + l + "\n";
  }
  return out;
}

inline Json multi_json(const MultiProtocolReport& r) {
  return Json{{"command", "multi"},
              {"verdict", verdict_name(r.verdict)},
              {"combined", attack_json(r.combined)},
              {"isolated", attack_json(r.isolated)}};
}

inline std::string multi_text(const MultiProtocolReport& r) {
  return std::string("multi-protocol attack: ") + (r.verdict == Verdict::Violated ? "found" : verdict_name(r.verdict)) +
         "\ncombined " + attack_text(r.combined) + "isolated " + attack_text(r.isolated);
}

}  // namespace report
}  // namespace xorproto
