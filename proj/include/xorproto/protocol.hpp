#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "xorproto/substitution.hpp"
#include "xorproto/term.hpp"
#include "xorproto/term_algebra.hpp"

namespace xorproto {

class IllTypedInstantiation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FreshReuse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Sign { Send, Recv };

struct Node {
  Sign sign;
  Term term;
  int message = 0;   // number of the protocol message this node comes from
  std::string peer;  // role on the other side of the message

  bool is_send() const { return sign == Sign::Send; }
  friend bool operator==(const Node& a, const Node& b) {
    return a.sign == b.sign && a.term == b.term && a.message == b.message && a.peer == b.peer;
  }
};

struct Message {
  int number = 0;
  std::string sender;
  std::string receiver;
  Term term;
  friend bool operator==(const Message& a, const Message& b) {
    return a.number == b.number && a.sender == b.sender && a.receiver == b.receiver && a.term == b.term;
  }
};

struct Role {
  std::string name;
  Term agent;  // the variable (or constant) naming the role's agent
  std::vector<Node> nodes;
  std::set<Term> vars;
  std::set<Term> fresh;   // fresh variables originated by this role
  std::set<Term> secret;  // subset of `fresh`

  std::set<Term> agent_vars() const {
    std::set<Term> out;
    for (const auto& v : vars) {
      if (v.declared_type() == TypeExpr::sort(sorts::kAgent)) out.insert(v);
    }
    return out;
  }
};

/// A message script with declarations. Roles are the signed projections of
/// the script onto each agent name.
class Protocol {
 public:
  std::string name;
  std::vector<Term> variables;  // declaration order
  std::vector<Term> constants;  // declaration order
  std::set<Term> fresh;
  std::set<Term> secret;
  std::vector<Term> ltkeys_declared;
  std::vector<Message> messages;

  friend bool operator==(const Protocol&, const Protocol&) = default;

  std::vector<Term> terms() const {
    std::vector<Term> out;
    for (const auto& m : messages) out.push_back(m.term);
    return out;
  }

  std::optional<Term> lookup(const std::string& id) const {
    for (const auto& v : variables) {
      if (v.name() == id) return v;
    }
    for (const auto& c : constants) {
      if (c.name() == id) return c;
    }
    return std::nullopt;
  }

  /// Role names in order of first appearance in the script.
  std::vector<std::string> role_names() const {
    std::vector<std::string> out;
    auto add = [&](const std::string& n) {
      if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    };
    for (const auto& m : messages) {
      add(m.sender);
      add(m.receiver);
    }
    return out;
  }

  std::vector<Role> roles() const {
    std::vector<Role> out;
    for (const auto& rn : role_names()) {
      Role r;
      r.name = rn;
      auto agent = lookup(rn);
      r.agent = agent ? *agent : make_const(rn, sorts::kAgent);
      std::set<Term> seen;
      for (const auto& m : messages) {
        if (m.sender != rn && m.receiver != rn) continue;
        // A message an agent sends to itself yields both nodes.
        const bool sends = m.sender == rn;
        const bool recvs = m.receiver == rn;
        if (sends) {
          for (const auto& v : vars_of(m.term)) {
            if (!seen.count(v) && fresh.count(v)) r.fresh.insert(v);
          }
          r.nodes.push_back({Sign::Send, m.term, m.number, m.receiver});
        }
        if (recvs) r.nodes.push_back({Sign::Recv, m.term, m.number, m.sender});
        auto vs = vars_of(m.term);
        seen.insert(vs.begin(), vs.end());
      }
      r.vars = seen;
      if (r.agent.is_var()) r.vars.insert(r.agent);
      for (const auto& f : r.fresh) {
        if (secret.count(f)) r.secret.insert(f);
      }
      out.push_back(std::move(r));
    }
    return out;
  }

  std::optional<Role> role(const std::string& rn) const {
    for (auto& r : roles()) {
      if (r.name == rn) return r;
    }
    return std::nullopt;
  }

  /// All sh(_,_) subterms of the protocol plus declared long-term keys.
  std::set<Term> ltkeys() const {
    std::set<Term> out(ltkeys_declared.begin(), ltkeys_declared.end());
    for (const auto& s : subterms(terms())) {
      if (s.kind() == Kind::Sh) out.insert(s);
    }
    return out;
  }

  std::set<Term> tag_constants() const {
    std::set<Term> out;
    for (const auto& c : constants) {
      if (c.declared_type() == TypeExpr::sort(sorts::kTag)) out.insert(c);
    }
    for (const auto& s : subterms(terms())) {
      if (s.is_const() && s.declared_type() == TypeExpr::sort(sorts::kTag)) out.insert(s);
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Design assumptions as checks.

struct AssumptionFinding {
  std::string assumption;  // "A2" or "A3"
  Term witness;
  Term context;
  std::string explanation;
};

struct AssumptionReport {
  bool a2 = true;
  bool a3 = true;
  std::vector<AssumptionFinding> findings;
  bool ok() const { return a2 && a3; }
};

/// A2: no long-term key is an interm of a protocol term. A3: no variable
/// that is an interm of an encryption key is readable in a sent message.
inline AssumptionReport check_assumptions(const Protocol& p) {
  AssumptionReport rep;
  auto subs = subterms(p.terms());
  auto lt = p.ltkeys();
  for (const auto& t : p.terms()) {
    for (const auto& i : interms(t)) {
      if (lt.count(i)) {
        rep.a2 = false;
        rep.findings.push_back({"A2", i, t, "long-term key " + i.to_string() + " is sent as payload"});
      }
    }
  }
  for (const auto& e : subs) {
    if (e.kind() != Kind::PEnc && e.kind() != Kind::SEnc) continue;
    const Term& k = e.arg(1);
    for (const auto& x : interms(k)) {
      if (!x.is_var()) continue;
      for (const auto& t : p.terms()) {
        if (is_interm(x, t)) {
          rep.a3 = false;
          rep.findings.push_back({"A3", x, t,
                                  "key variable " + x.to_string() + " of " + e.to_string() +
                                      " is readable in " + t.to_string()});
          break;
        }
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Strands and semi-bundles.

struct StrandPlan {
  std::string role;
  Substitution bindings;  // role variable -> constant

  std::string to_string() const {
    std::string out = role + "{";
    bool first = true;
    for (const auto& [k, v] : bindings) {
      if (!first) out += ",";
      first = false;
      out += k.name() + "=" + v.to_string();
    }
    return out + "}";
  }
};

using SessionPlan = std::vector<StrandPlan>;

struct Strand {
  std::string protocol;
  std::string role;
  std::size_t index = 0;  // position in the semi-bundle
  std::vector<Node> nodes;
  Substitution sigma;  // role -> strand
  std::set<Term> fresh_consts;
  std::set<Term> secret_consts;
  std::size_t plan_class = 0;  // strands with equal class are interchangeable
};

struct SemiBundle {
  std::vector<Strand> strands;
  std::set<Term> fresh;
  std::set<Term> secrets;
  std::set<Term> iik;
};

inline std::string lowercase(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

struct InstantiateOptions {
  std::string fresh_prefix;     // distinguishes fresh pools of different bundles
  std::size_t first_index = 0;  // strand numbering offset
};

/// Adds the attacker's baseline knowledge for `p` and the non-fresh
/// instantiating constants to `iik`.
inline void add_base_knowledge(const Protocol& p, const std::set<Term>& non_fresh_consts, std::set<Term>& iik) {
  iik.insert(attacker());
  iik.insert(zero());
  iik.insert(pk(attacker()));
  for (const auto& t : p.tag_constants()) iik.insert(t);
  std::set<Term> agents;
  for (const auto& c : p.constants) {
    if (c.declared_type() == TypeExpr::sort(sorts::kAgent)) agents.insert(c);
  }
  for (const auto& s : subterms(p.terms())) {
    if (s.is_const() && s.declared_type() == TypeExpr::sort(sorts::kAgent)) agents.insert(s);
  }
  for (const auto& c : non_fresh_consts) {
    iik.insert(c);
    if (c.declared_type() == TypeExpr::sort(sorts::kAgent)) agents.insert(c);
  }
  for (const auto& a : agents) {
    iik.insert(a);
    iik.insert(pk(a));
  }
}

/// Builds one strand per plan entry. Role variables are renamed apart with
/// a strand suffix, fresh variables originated by the role become fresh
/// constants, and the plan's bindings are applied.
inline SemiBundle instantiate(const Protocol& p, const SessionPlan& plan, const InstantiateOptions& opt = {}) {
  SemiBundle sb;
  std::set<Term> non_fresh;
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& entry = plan[i];
    auto role = p.role(entry.role);
    if (!role) throw std::invalid_argument("unknown role " + entry.role + " in session plan");
    const std::size_t idx = opt.first_index + i;
    const std::string suffix = "_" + std::to_string(idx + 1);
    Strand s;
    s.protocol = p.name;
    s.role = role->name;
    s.index = idx;
    for (const auto& [x, value] : entry.bindings) {
      if (!role->vars.count(x)) {
        throw std::invalid_argument("session plan binds " + x.to_string() + " which role " + role->name +
                                    " does not use");
      }
      if (!is_well_typed_binding(x, value)) {
        throw IllTypedInstantiation("binding " + value.to_string() + "/" + x.to_string() + " is not well-typed");
      }
    }
    for (const auto& x : role->vars) {
      if (auto b = entry.bindings.lookup(x)) {
        if (role->fresh.count(x)) {
          if (sb.fresh.count(*b)) throw FreshReuse("fresh constant " + b->to_string() + " reused");
          s.fresh_consts.insert(*b);
        } else if (b->is_const()) {
          non_fresh.insert(*b);
        }
        s.sigma.bind(x, *b);
      } else if (role->fresh.count(x)) {
        Term c = make_const(opt.fresh_prefix + lowercase(x.name()) + suffix, x.declared_type());
        if (sb.fresh.count(c)) throw FreshReuse("fresh constant " + c.to_string() + " reused");
        s.fresh_consts.insert(c);
        s.sigma.bind(x, c);
      } else {
        s.sigma.bind(x, make_var(x.name() + suffix, x.declared_type()));
      }
    }
    // Secrets only count when every agent of the strand is an honest constant.
    bool honest = true;
    for (const auto& a : role->agent_vars()) {
      Term v = s.sigma.apply(a);
      if (!v.is_const() || v == attacker()) honest = false;
    }
    if (role->agent.is_const() && role->agent == attacker()) honest = false;
    for (const auto& x : role->secret) {
      Term v = s.sigma.apply(x);
      if (honest && v.is_const()) s.secret_consts.insert(v);
    }
    for (const auto& n : role->nodes) s.nodes.push_back({n.sign, s.sigma.apply(n.term), n.message, n.peer});
    sb.fresh.insert(s.fresh_consts.begin(), s.fresh_consts.end());
    sb.secrets.insert(s.secret_consts.begin(), s.secret_consts.end());
    std::string key = p.name + "/" + entry.to_string();
    auto it = std::find(keys.begin(), keys.end(), key);
    s.plan_class = static_cast<std::size_t>(it - keys.begin());
    if (it == keys.end()) keys.push_back(key);
    sb.strands.push_back(std::move(s));
  }
  add_base_knowledge(p, non_fresh, sb.iik);
  return sb;
}

/// Merges two bundles. Their fresh pools must be disjoint.
inline SemiBundle merge(const SemiBundle& a, const SemiBundle& b) {
  for (const auto& f : b.fresh) {
    if (a.fresh.count(f)) throw FreshReuse("fresh constant " + f.to_string() + " shared by two bundles");
  }
  SemiBundle out = a;
  std::size_t class_offset = 0;
  for (const auto& s : a.strands) class_offset = std::max(class_offset, s.plan_class + 1);
  for (auto s : b.strands) {
    s.plan_class += class_offset;
    out.strands.push_back(std::move(s));
  }
  out.fresh.insert(b.fresh.begin(), b.fresh.end());
  out.secrets.insert(b.secrets.begin(), b.secrets.end());
  out.iik.insert(b.iik.begin(), b.iik.end());
  return out;
}

/// One strand per role: the first role binds its own agent variable, the
/// others bind every agent variable to the lowercased variable name.
inline SessionPlan default_plan(const Protocol& p, std::size_t strands_per_role = 1) {
  SessionPlan plan;
  auto roles = p.roles();
  for (std::size_t copy = 0; copy < strands_per_role; ++copy) {
    for (std::size_t i = 0; i < roles.size(); ++i) {
      StrandPlan sp{roles[i].name, {}};
      for (const auto& a : roles[i].agent_vars()) {
        if (i == 0 && !(a == roles[i].agent)) continue;
        sp.bindings.bind(a, make_const(lowercase(a.name()), a.declared_type()));
      }
      plan.push_back(std::move(sp));
    }
  }
  // Group strands of the same role together.
  std::stable_sort(plan.begin(), plan.end(), [&](const StrandPlan& x, const StrandPlan& y) {
    auto pos = [&](const std::string& r) {
      for (std::size_t i = 0; i < roles.size(); ++i) {
        if (roles[i].name == r) return i;
      }
      return roles.size();
    };
    return pos(x.role) < pos(y.role);
  });
  return plan;
}

/// Parses `Role{Var=const,...} Role{...}`; an empty string or a number n
/// selects the default plan with n strands per role.
inline SessionPlan parse_session_plan(const Protocol& p, const std::string& text) {
  std::string trimmed;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) trimmed += ch;
  }
  if (trimmed.empty()) return default_plan(p, 1);
  if (std::all_of(trimmed.begin(), trimmed.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
    return default_plan(p, static_cast<std::size_t>(std::stoul(trimmed)));
  }
  SessionPlan plan;
  std::size_t pos = 0;
  while (pos < trimmed.size()) {
    auto open = trimmed.find('{', pos);
    if (open == std::string::npos) throw std::invalid_argument("session plan: expected '{' after role name");
    auto close = trimmed.find('}', open);
    if (close == std::string::npos) throw std::invalid_argument("session plan: missing '}'");
    std::string rn = trimmed.substr(pos, open - pos);
    if (rn.starts_with(",")) rn.erase(0, 1);
    auto role = p.role(rn);
    if (!role) throw std::invalid_argument("session plan: unknown role '" + rn + "'");
    StrandPlan sp{rn, {}};
    std::stringstream body(trimmed.substr(open + 1, close - open - 1));
    std::string item;
    while (std::getline(body, item, ',')) {
      if (item.empty()) continue;
      auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("session plan: expected Var=const in '" + item + "'");
      std::string vn = item.substr(0, eq);
      std::string cn = item.substr(eq + 1);
      std::optional<Term> var;
      for (const auto& v : role->vars) {
        if (v.name() == vn) var = v;
      }
      if (!var) throw std::invalid_argument("session plan: role " + rn + " has no variable " + vn);
      Term value = cn == kAttackerName ? attacker() : make_const(cn, var->declared_type());
      if (auto declared = p.lookup(cn); declared && declared->is_const()) value = *declared;
      sp.bindings.bind(*var, value);
    }
    plan.push_back(std::move(sp));
    pos = close + 1;
  }
  return plan;
}

inline std::string to_string(const SessionPlan& plan) {
  std::string out;
  for (const auto& sp : plan) {
    if (!out.empty()) out += " ";
    out += sp.to_string();
  }
  return out;
}

}  // namespace xorproto
