#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "xorproto/substitution.hpp"
#include "xorproto/term.hpp"
#include "xorproto/term_algebra.hpp"
#include "xorproto/unify_combined.hpp"

namespace xorproto {

class AllSimple : public std::logic_error {
 public:
  AllSimple() : std::logic_error("constraint sequence has no active constraint") {}
};

class RuleNotApplicable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// m : T. The term set is kept sorted and duplicate free.
struct Constraint {
  Term target;
  std::vector<Term> terms;

  Constraint() = default;
  Constraint(Term m, std::vector<Term> ts) : target(std::move(m)), terms(std::move(ts)) {
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  }

  bool simple() const { return target.is_var(); }
  bool contains(const Term& t) const { return std::binary_search(terms.begin(), terms.end(), t); }

  Constraint applied(const Substitution& s) const {
    std::vector<Term> ts;
    ts.reserve(terms.size());
    for (const auto& t : terms) ts.push_back(s.apply(t));
    return Constraint(s.apply(target), std::move(ts));
  }

  friend bool operator==(const Constraint& a, const Constraint& b) {
    return a.target == b.target && a.terms == b.terms;
  }

  std::string to_string() const {
    std::string out = target.to_string() + " : {";
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (i) out += ", ";
      out += terms[i].to_string();
    }
    return out + "}";
  }
};

struct ConstraintSequence {
  std::vector<Constraint> constraints;
  Substitution accumulated;

  bool simple() const {
    return std::all_of(constraints.begin(), constraints.end(), [](const Constraint& c) { return c.simple(); });
  }
  std::optional<std::size_t> active_index() const {
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      if (!constraints[i].simple()) return i;
    }
    return std::nullopt;
  }
  std::set<Term> vars() const {
    std::set<Term> out;
    for (const auto& c : constraints) {
      collect_vars(c.target, out);
      for (const auto& t : c.terms) collect_vars(t, out);
    }
    return out;
  }

  friend bool operator==(const ConstraintSequence& a, const ConstraintSequence& b) {
    return a.constraints == b.constraints && a.accumulated == b.accumulated;
  }

  std::string to_string() const {
    std::string out;
    for (const auto& c : constraints) out += c.to_string() + "\n";
    return out;
  }
};

/// First non-simple constraint.
inline const Constraint& active(const ConstraintSequence& cs) {
  auto i = cs.active_index();
  if (!i) throw AllSimple();
  return cs.constraints[*i];
}

namespace detail {

inline void flatten_into(const Term& t, std::vector<Term>& out) {
  if (t.kind() == Kind::Sequence) {
    for (const auto& a : t.args()) flatten_into(a, out);
  } else if (!t.is_var()) {
    out.push_back(t);
  }
}

inline void normalize_constraint(const Term& m, const std::vector<Term>& flat_terms, std::vector<Constraint>& out) {
  if (m.kind() == Kind::Sequence) {
    for (const auto& a : m.args()) normalize_constraint(a, flat_terms, out);
    return;
  }
  out.emplace_back(m, flat_terms);
}

inline bool constraint_is_normal(const Constraint& c) {
  if (c.target.kind() == Kind::Sequence) return false;
  return std::none_of(c.terms.begin(), c.terms.end(),
                      [](const Term& t) { return t.is_var() || t.kind() == Kind::Sequence; });
}

}  // namespace detail

/// Splits sequence targets of the active constraint and flattens sequences
/// (dropping bare variables) in its term set, until the active constraint
/// is normal.
inline ConstraintSequence normalize(ConstraintSequence cs) {
  while (true) {
    auto i = cs.active_index();
    if (!i) return cs;
    const Constraint& c = cs.constraints[*i];
    if (detail::constraint_is_normal(c)) return cs;
    std::vector<Term> flat;
    for (const auto& t : c.terms) detail::flatten_into(t, flat);
    std::vector<Constraint> repl;
    detail::normalize_constraint(c.target, flat, repl);
    std::vector<Constraint> next(cs.constraints.begin(), cs.constraints.begin() + static_cast<std::ptrdiff_t>(*i));
    next.insert(next.end(), repl.begin(), repl.end());
    next.insert(next.end(), cs.constraints.begin() + static_cast<std::ptrdiff_t>(*i) + 1, cs.constraints.end());
    cs.constraints = std::move(next);
  }
}

inline bool is_normal(const ConstraintSequence& cs) {
  auto i = cs.active_index();
  return !i || detail::constraint_is_normal(cs.constraints[*i]);
}

enum class Rule { Un, Ksub, Pdec, Sdec, XorR, Penc, Senc, Hash, Sig, XorL, Concat, Split };

inline const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Un: return "un";
    case Rule::Ksub: return "ksub";
    case Rule::Pdec: return "pdec";
    case Rule::Sdec: return "sdec";
    case Rule::XorR: return "xor_r";
    case Rule::Penc: return "penc";
    case Rule::Senc: return "senc";
    case Rule::Hash: return "hash";
    case Rule::Sig: return "sig";
    case Rule::XorL: return "xor_l";
    case Rule::Concat: return "concat";
    case Rule::Split: return "split";
  }
  return "?";
}

inline std::optional<Rule> rule_from_name(const std::string& s) {
  for (Rule r : {Rule::Un, Rule::Ksub, Rule::Pdec, Rule::Sdec, Rule::XorR, Rule::Penc, Rule::Senc, Rule::Hash,
                 Rule::Sig, Rule::XorL, Rule::Concat, Rule::Split}) {
    if (s == rule_name(r)) return r;
  }
  if (s == "join" || s == "pair") return Rule::Concat;
  return std::nullopt;
}

struct RuleApplication {
  Rule rule;
  std::string choice;  // human-readable description of the selected element
  ConstraintSequence result;
  Substitution unifier;  // empty unless rule is un or ksub
};

struct SolveOptions {
  std::size_t max_depth = 64;        // rule applications per branch
  std::size_t max_nodes = 100000;    // search nodes in total
  bool first_only = false;           // stop at the first solution
  std::size_t xor_subset_limit = 10; // larger XOR targets split by single summands only
  bool prune_unreachable = true;     // drop states with a target no rule can reach
  BscaOptions bsca;
};

/// A step on the path from the root to a solution.
struct SolveStep {
  Rule rule;
  std::string active;
  std::string choice;
  Substitution unifier;
};

struct SolveResult {
  std::vector<Substitution> solutions;  // sorted, restricted to input variables
  std::vector<std::vector<SolveStep>> paths;  // parallel to `solutions`
  bool truncated = false;               // a bound cut the search short
  std::size_t nodes = 0;
  double seconds = 0;

  bool satisfiable() const { return !solutions.empty(); }
};

/// Rule application engine and bounded depth-first search.
class Solver {
 public:
  explicit Solver(SolveOptions opt = {}) : opt_(std::move(opt)) {}

  const SolveOptions& options() const { return opt_; }

  const UnifierSet& unify(const Term& a, const Term& b) {
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    if (capped_.count(key)) capped_hit_ = true;
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    try {
      return cache_.emplace(key, unify_sua(UnificationProblem{{{a, b}}, Theory::Combined}, opt_.bsca)).first->second;
    } catch (const CapExceeded&) {
      // Too many variables to enumerate: the branch is cut and the search
      // reported as truncated.
      capped_.insert(key);
      capped_hit_ = true;
      return cache_.emplace(key, UnifierSet{}).first->second;
    }
  }

  /// All applications of `rule` to the active constraint of the normal
  /// sequence `cs`.
  std::vector<RuleApplication> apply_rule(Rule rule, const ConstraintSequence& cs) {
    if (!is_normal(cs)) throw std::invalid_argument("apply_rule: constraint sequence is not normal");
    auto ai = cs.active_index();
    if (!ai) throw AllSimple();
    const std::size_t idx = *ai;
    const Constraint& c = cs.constraints[idx];
    const Term& m = c.target;
    std::vector<RuleApplication> out;

    auto replace = [&](std::vector<Constraint> repl) {
      ConstraintSequence n;
      n.accumulated = cs.accumulated;
      n.constraints.reserve(cs.constraints.size() + repl.size());
      n.constraints.insert(n.constraints.end(), cs.constraints.begin(),
                           cs.constraints.begin() + static_cast<std::ptrdiff_t>(idx));
      n.constraints.insert(n.constraints.end(), repl.begin(), repl.end());
      n.constraints.insert(n.constraints.end(), cs.constraints.begin() + static_cast<std::ptrdiff_t>(idx) + 1,
                           cs.constraints.end());
      return n;
    };
    auto without = [&](const Term& t) {
      std::vector<Term> ts;
      ts.reserve(c.terms.size());
      for (const auto& u : c.terms) {
        if (!(u == t)) ts.push_back(u);
      }
      return ts;
    };
    auto with = [](std::vector<Term> ts, std::initializer_list<Term> extra) {
      ts.insert(ts.end(), extra.begin(), extra.end());
      return ts;
    };
    auto substituted = [&](const Substitution& tau, std::optional<Constraint> keep) {
      ConstraintSequence n;
      n.accumulated = cs.accumulated.then(tau);
      for (std::size_t i = 0; i < cs.constraints.size(); ++i) {
        if (i == idx) {
          if (keep) n.constraints.push_back(keep->applied(tau));
          continue;
        }
        n.constraints.push_back(cs.constraints[i].applied(tau));
      }
      return n;
    };

    switch (rule) {
      case Rule::Un:
        for (const auto& t : c.terms) {
          if (!may_unify(m, t)) continue;
          for (const auto& tau : unify(m, t)) {
            Substitution fresh_tau = rename_introduced(tau, m, t);
            out.push_back({rule, t.to_string(), substituted(fresh_tau, std::nullopt), fresh_tau});
          }
        }
        break;
      case Rule::Ksub:
        for (const auto& t : c.terms) {
          if (t.kind() != Kind::PEnc) continue;
          const Term& k = t.arg(1);
          const Term target_key = pk(attacker());
          if (k == target_key || k.is_ground()) continue;
          if (!may_unify(k, target_key)) continue;
          for (const auto& tau : unify(k, target_key)) {
            if (tau.empty()) continue;
            Substitution fresh_tau = rename_introduced(tau, k, target_key);
            out.push_back({rule, t.to_string(), substituted(fresh_tau, c), fresh_tau});
          }
        }
        break;
      case Rule::Pdec:
        for (const auto& t : c.terms) {
          if (t.kind() != Kind::PEnc || !(t.arg(1) == pk(attacker()))) continue;
          out.push_back({rule, t.to_string(), replace({Constraint(m, with(without(t), {t.arg(0)}))}), {}});
        }
        break;
      case Rule::Sdec:
        for (const auto& t : c.terms) {
          if (t.kind() != Kind::SEnc) continue;
          auto rest = without(t);
          out.push_back({rule, t.to_string(),
                         replace({Constraint(t.arg(1), rest), Constraint(m, with(rest, {t.arg(0), t.arg(1)}))}),
                         {}});
        }
        break;
      case Rule::XorR:
        for (const auto& t : c.terms) {
          if (!t.is_xor()) continue;
          auto rest = without(t);
          for (std::size_t i = 0; i < t.arity(); ++i) {
            std::vector<Term> others;
            for (std::size_t j = 0; j < t.arity(); ++j) {
              if (j != i) others.push_back(t.arg(j));
            }
            Term remainder = xor_of(std::move(others));
            out.push_back({rule, t.to_string() + " peeling " + t.arg(i).to_string(),
                           replace({Constraint(remainder, rest), Constraint(m, with(rest, {t.arg(i)}))}), {}});
          }
        }
        break;
      case Rule::Penc:
      case Rule::Senc:
        if (m.kind() == (rule == Rule::Penc ? Kind::PEnc : Kind::SEnc)) {
          out.push_back({rule, "", replace({Constraint(m.arg(1), c.terms), Constraint(m.arg(0), c.terms)}), {}});
        }
        break;
      case Rule::Hash:
        if (m.kind() == Kind::Hash) out.push_back({rule, "", replace({Constraint(m.arg(0), c.terms)}), {}});
        break;
      case Rule::Sig:
        if (m.kind() == Kind::Sig) out.push_back({rule, "", replace({Constraint(m.arg(0), c.terms)}), {}});
        break;
      case Rule::XorL:
        if (m.is_xor()) {
          const std::size_t n = m.arity();
          auto emit = [&](const std::vector<Term>& picked, const std::vector<Term>& rest) {
            Term p = xor_of(picked);
            Term r = xor_of(rest);
            out.push_back({rule, p.to_string(), replace({Constraint(r, c.terms), Constraint(p, c.terms)}), {}});
          };
          if (n > opt_.xor_subset_limit) {
            for (std::size_t i = 0; i < n; ++i) {
              std::vector<Term> rest;
              for (std::size_t j = 0; j < n; ++j) {
                if (j != i) rest.push_back(m.arg(j));
              }
              emit({m.arg(i)}, rest);
            }
          } else {
            // Subsets containing the first summand, excluding the full set.
            for (std::uint64_t mask = 0; mask + 1 < (std::uint64_t{1} << (n - 1)); ++mask) {
              std::vector<Term> picked{m.arg(0)};
              std::vector<Term> rest;
              for (std::size_t j = 1; j < n; ++j) {
                ((mask >> (j - 1)) & 1U ? picked : rest).push_back(m.arg(j));
              }
              emit(picked, rest);
            }
          }
        }
        break;
      case Rule::Concat:
      case Rule::Split:
        // Both are carried out by normalization.
        break;
    }
    return out;
  }

  /// Every application of every rule, in search order.
  std::vector<RuleApplication> successors(const ConstraintSequence& cs) {
    std::vector<RuleApplication> out;
    // A target already in its term set is discharged by un with the empty
    // unifier; every other branch only yields instances of that one.
    if (auto ai = cs.active_index(); ai && cs.constraints[*ai].contains(cs.constraints[*ai].target)) {
      ConstraintSequence n = cs;
      n.constraints.erase(n.constraints.begin() + static_cast<std::ptrdiff_t>(*ai));
      out.push_back({Rule::Un, cs.constraints[*ai].target.to_string(), std::move(n), {}});
      return out;
    }
    // With pk(eps) at hand pdec loses nothing, since the attacker can encrypt
    // the body again. It is taken first and alone.
    if (auto ai = cs.active_index(); ai && cs.constraints[*ai].contains(pk(attacker()))) {
      auto apps = apply_rule(Rule::Pdec, cs);
      if (!apps.empty()) {
        out.push_back(std::move(apps.front()));
        return out;
      }
    }
    for (Rule r : {Rule::Un, Rule::Ksub, Rule::Pdec, Rule::Sdec, Rule::XorR, Rule::Penc, Rule::Senc, Rule::Hash,
                   Rule::Sig, Rule::XorL}) {
      auto apps = apply_rule(r, cs);
      for (auto& a : apps) out.push_back(std::move(a));
    }
    return out;
  }

  SolveResult solve(const ConstraintSequence& input) {
    auto start = std::chrono::steady_clock::now();
    SolveResult res;
    roots_ = input.vars();
    visited_.clear();
    capped_hit_ = false;
    std::map<Substitution, std::vector<SolveStep>> found;
    std::vector<SolveStep> path;
    ConstraintSequence root = normalize(input);
    root.accumulated = Substitution{};
    dfs(root, 0, path, found, res);
    if (capped_hit_) res.truncated = true;
    for (auto& [s, p] : found) {
      res.solutions.push_back(s);
      res.paths.push_back(std::move(p));
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
  }

 private:
  // Cheap rejection before calling the unifier: two standard-rooted terms
  // with different head symbols or distinct constants never unify.
  static bool may_unify(const Term& a, const Term& b) {
    if (a.is_var() || b.is_var() || a.is_xor() || b.is_xor()) return true;
    if (a.is_ground() && b.is_ground()) return a == b;
    if (a.kind() != b.kind() || a.arity() != b.arity()) return false;
    if (a.is_const()) return a == b;
    if (a.kind() == Kind::Sh) return true;
    for (std::size_t i = 0; i < a.arity(); ++i) {
      if (!may_unify(a.arg(i), b.arg(i))) return false;
    }
    return true;
  }

  // Over-approximation of what the attacker could ever learn from ts:
  // every decryption whose key might become available is assumed to succeed
  // and every xor is assumed to give up its summands. Variables stay as
  // wildcards. If a target lies outside this no rule sequence reaches it.
  static bool reachable(const Term& m, const std::vector<Term>& ts) {
    std::vector<Term> known;
    std::vector<Term> sealed;  // senc bodies waiting for their key
    std::set<Term> seen;
    bool wildcard = false;
    std::vector<Term> todo(ts.begin(), ts.end());
    const Term eps_key = pk(attacker());
    auto drain = [&] {
      while (!todo.empty()) {
        Term t = todo.back();
        todo.pop_back();
        if (!seen.insert(t).second) continue;
        known.push_back(t);
        if (t.is_var()) wildcard = true;
        switch (t.kind()) {
          case Kind::Sequence:
          case Kind::Xor:
            for (std::size_t i = 0; i < t.arity(); ++i) todo.push_back(t.arg(i));
            break;
          case Kind::PEnc:
            if (may_unify(t.arg(1), eps_key)) todo.push_back(t.arg(0));
            break;
          case Kind::SEnc:
            sealed.push_back(t);
            break;
          default:
            break;
        }
      }
    };
    std::function<bool(const Term&)> derivable = [&](const Term& u) {
      if (u.is_var() || u.is_xor() || u.kind() == Kind::Zero) return true;
      for (const auto& k : known) {
        // A sum of non-variable summands only meets a standard term when all
        // but one cancel, and those summands are in known already.
        if (k.is_xor()) {
          for (std::size_t i = 0; i < k.arity(); ++i) {
            if (k.arg(i).is_var()) return true;
          }
          continue;
        }
        if (may_unify(u, k)) return true;
      }
      switch (u.kind()) {
        case Kind::Sequence:
        case Kind::PEnc:
        case Kind::SEnc:
          for (std::size_t i = 0; i < u.arity(); ++i) {
            if (!derivable(u.arg(i))) return false;
          }
          return true;
        case Kind::Hash:
        case Kind::Sig:
          return derivable(u.arg(0));
        default:
          return false;
      }
    };
    drain();
    for (bool grew = true; grew && !wildcard;) {
      grew = false;
      for (auto it = sealed.begin(); it != sealed.end();) {
        if (derivable(it->arg(1))) {
          todo.push_back(it->arg(0));
          it = sealed.erase(it);
          grew = true;
        } else {
          ++it;
        }
      }
      drain();
    }
    return wildcard || derivable(m);
  }

  static bool feasible(const ConstraintSequence& cs) {
    for (const auto& c : cs.constraints) {
      if (!c.simple() && !reachable(c.target, c.terms)) return false;
    }
    return true;
  }

  /// Variables introduced by the unifier get names unique to this search.
  Substitution rename_introduced(const Substitution& tau, const Term& a, const Term& b) {
    std::set<Term> known = vars_of(a);
    collect_vars(b, known);
    Substitution ren;
    for (const auto& [_, v] : tau) {
      for (const auto& x : vars_of(v)) {
        if (!known.count(x) && !ren.binds(x)) {
          ren.bind(x, make_var("_V" + std::to_string(++fresh_counter_), x.declared_type()));
        }
      }
    }
    if (ren.empty()) return tau;
    Substitution out;
    for (const auto& [k, v] : tau) out.bind(k, ren.apply(v));
    return out;
  }

  static std::string state_key(const ConstraintSequence& cs) {
    std::string key;
    for (const auto& c : cs.constraints) {
      key += c.target.to_string();
      key += '|';
      for (const auto& t : c.terms) {
        key += t.to_string();
        key += ',';
      }
      key += '\n';
    }
    key += cs.accumulated.to_string();
    return key;
  }

  bool dfs(const ConstraintSequence& cs, std::size_t depth, std::vector<SolveStep>& path,
           std::map<Substitution, std::vector<SolveStep>>& found, SolveResult& res) {
    if (cs.simple()) {
      Substitution s = cs.accumulated.restricted(roots_);
      found.emplace(std::move(s), path);
      return opt_.first_only;
    }
    if (!visited_.insert(state_key(cs)).second) return false;
    if (opt_.prune_unreachable && !feasible(cs)) return false;
    if (depth >= opt_.max_depth || res.nodes >= opt_.max_nodes) {
      res.truncated = true;
      return false;
    }
    ++res.nodes;
    const std::string active_text = active(cs).to_string();
    for (auto& app : successors(cs)) {
      path.push_back({app.rule, active_text, app.choice, app.unifier});
      bool stop = dfs(normalize(std::move(app.result)), depth + 1, path, found, res);
      path.pop_back();
      if (stop) return true;
      if (res.nodes >= opt_.max_nodes) {
        res.truncated = true;
        return false;
      }
    }
    return false;
  }

  SolveOptions opt_;
  std::map<std::pair<Term, Term>, UnifierSet> cache_;
  std::set<std::pair<Term, Term>> capped_;
  bool capped_hit_ = false;
  std::unordered_set<std::string> visited_;
  std::set<Term> roots_;
  std::size_t fresh_counter_ = 0;
};

/// Convenience wrapper around Solver::solve.
inline SolveResult solve(const ConstraintSequence& cs, const SolveOptions& opt = {}) {
  Solver s(opt);
  return s.solve(cs);
}

inline std::vector<RuleApplication> apply_rule(Rule rule, const ConstraintSequence& cs, const SolveOptions& opt = {}) {
  Solver s(opt);
  return s.apply_rule(rule, cs);
}

}  // namespace xorproto
