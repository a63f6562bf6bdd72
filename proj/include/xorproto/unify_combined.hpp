#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "xorproto/substitution.hpp"
#include "xorproto/term.hpp"
#include "xorproto/term_algebra.hpp"
#include "xorproto/unify_elementary.hpp"

namespace xorproto {

/// Thrown when the number of variables exceeds the combination cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by `combine` when the given order violates the dependencies of the
/// per-theory unifiers.
class OrderIncompatible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FreshDef {
  Term var;
  Term value;
  Theory theory;
};

/// Output of the purification steps. `gamma1` holds the problem after every
/// alien subterm has been abstracted (equations may still mix theories); the
/// split `std_eqs`/`acun_eqs` is gamma2.
struct Purified {
  std::vector<Equation> gamma1;
  std::vector<Equation> std_eqs;
  std::vector<Equation> acun_eqs;
  std::vector<FreshDef> defs;
  std::set<Term> original_vars;

  std::vector<Equation> gamma2() const {
    auto out = std_eqs;
    out.insert(out.end(), acun_eqs.begin(), acun_eqs.end());
    return out;
  }
  std::set<Term> vars() const { return UnificationProblem{gamma2(), Theory::Combined}.vars(); }
  std::optional<Term> fresh_var_for(const Term& value) const {
    for (const auto& d : defs) {
      if (d.value == value) return d.var;
    }
    return std::nullopt;
  }
};

namespace detail {

enum class Side { Neutral, Std, Acun };

inline Side side_of(const Term& t) {
  if (t.is_var() || t.is_const()) return Side::Neutral;
  if (t.is_xor() || t.is_zero()) return Side::Acun;
  return Side::Std;
}

inline Theory theory_of(Side s) { return s == Side::Acun ? Theory::Acun : Theory::Std; }

class Purifier {
 public:
  explicit Purifier(std::string prefix) : prefix_(std::move(prefix)) {}

  Term purify_root(const Term& t) {
    if (t.is_atom()) return t;
    Theory own = theory_of(side_of(t));
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const auto& a : t.args()) args.push_back(purify_in(a, own));
    return rebuild(t, std::move(args));
  }

  Term abstract(const Term& t) {
    auto it = alien_vars_.find(t);
    if (it != alien_vars_.end()) return it->second;
    Term inner = purify_root(t);
    Term v = make_var(prefix_ + std::to_string(++counter_), type_of(t));
    alien_vars_.emplace(t, v);
    defs_.push_back({v, inner, theory_of(side_of(t))});
    return v;
  }

  std::vector<FreshDef>& defs() { return defs_; }

 private:
  Term purify_in(const Term& t, Theory ctx) {
    if (t.is_var() || t.is_const()) return t;
    if (theory_of(side_of(t)) == ctx) {
      std::vector<Term> args;
      args.reserve(t.arity());
      for (const auto& a : t.args()) args.push_back(purify_in(a, ctx));
      return rebuild(t, std::move(args));
    }
    return abstract(t);
  }

  std::string prefix_;
  int counter_ = 0;
  std::map<Term, Term> alien_vars_;
  std::vector<FreshDef> defs_;
};

}  // namespace detail

/// Steps 1-2 of the combination procedure: abstract alien subterms by fresh
/// variables (one per distinct alien subterm) and split every equation into
/// equations whose two sides are pure in the same theory.
inline Purified purify(const UnificationProblem& p, const std::string& prefix = "_P") {
  detail::Purifier pur(prefix);
  Purified out;
  out.original_vars = p.vars();
  std::vector<std::pair<Equation, detail::Side>> top;
  for (const auto& e : p.equations) {
    Term l = pur.purify_root(e.lhs);
    Term r = pur.purify_root(e.rhs);
    out.gamma1.push_back({l, r});
    auto sl = detail::side_of(e.lhs);
    auto sr = detail::side_of(e.rhs);
    if (sl == detail::Side::Neutral && sr == detail::Side::Neutral) {
      top.push_back({{l, r}, detail::Side::Std});
    } else if (sl == detail::Side::Neutral || sl == sr) {
      top.push_back({{l, r}, sr});
    } else if (sr == detail::Side::Neutral) {
      top.push_back({{l, r}, sl});
    } else {
      Term w = pur.abstract(e.lhs);
      top.push_back({{w, r}, sr});
    }
  }
  for (const auto& d : pur.defs()) {
    (d.theory == Theory::Std ? out.std_eqs : out.acun_eqs).push_back({d.var, d.value});
  }
  for (auto& [eq, side] : top) {
    (side == detail::Side::Acun ? out.acun_eqs : out.std_eqs).push_back(eq);
  }
  out.defs = pur.defs();
  // gamma1 lists the abstraction equations first, like gamma2.
  std::vector<Equation> g1;
  for (const auto& d : out.defs) g1.push_back({d.var, d.value});
  g1.insert(g1.end(), out.gamma1.begin(), out.gamma1.end());
  out.gamma1 = std::move(g1);
  return out;
}

/// A set partition of variables plus the substitution sending every
/// variable to the least member of its block.
struct Identification {
  std::vector<std::vector<Term>> blocks;
  Substitution rho;

  std::string to_string() const {
    std::string out = "{";
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (i) out += ", ";
      out += "{";
      for (std::size_t j = 0; j < blocks[i].size(); ++j) {
        if (j) out += ", ";
        out += blocks[i][j].to_string();
      }
      out += "}";
    }
    return out + "}";
  }
};

inline Identification make_identification(std::vector<std::vector<Term>> blocks) {
  Identification id;
  for (auto& b : blocks) std::sort(b.begin(), b.end());
  std::sort(blocks.begin(), blocks.end());
  for (const auto& b : blocks) {
    for (std::size_t i = 1; i < b.size(); ++i) id.rho.bind(b[i], b.front());
  }
  id.blocks = std::move(blocks);
  return id;
}

/// Calls `fn` for every set partition of `vars` in restricted-growth-string
/// order. Returning false from `fn` stops the enumeration.
inline void for_each_identification(const std::set<Term>& vars, std::size_t cap,
                                    const std::function<bool(const Identification&)>& fn) {
  if (vars.size() > cap) {
    throw CapExceeded("variable identification over " + std::to_string(vars.size()) +
                      " variables exceeds cap " + std::to_string(cap));
  }
  std::vector<Term> vs(vars.begin(), vars.end());
  const std::size_t n = vs.size();
  std::vector<std::size_t> code(n, 0);
  std::vector<std::size_t> maxes(n, 0);
  while (true) {
    std::size_t nblocks = 0;
    for (std::size_t i = 0; i < n; ++i) nblocks = std::max(nblocks, code[i] + 1);
    std::vector<std::vector<Term>> blocks(n == 0 ? 0 : nblocks);
    for (std::size_t i = 0; i < n; ++i) blocks[code[i]].push_back(vs[i]);
    if (!fn(make_identification(std::move(blocks)))) return;
    // Next restricted growth string.
    std::size_t i = n;
    while (i > 1) {
      --i;
      std::size_t prefix_max = 0;
      for (std::size_t j = 0; j < i; ++j) prefix_max = std::max(prefix_max, code[j]);
      if (code[i] <= prefix_max) {
        ++code[i];
        for (std::size_t j = i + 1; j < n; ++j) code[j] = 0;
        goto next;
      }
    }
    return;
  next:;
  }
}

inline std::vector<Identification> enumerate_identifications(const std::set<Term>& vars,
                                                             std::size_t cap = 8) {
  std::vector<Identification> out;
  for_each_identification(vars, cap, [&](const Identification& id) {
    out.push_back(id);
    return true;
  });
  return out;
}

/// Steps 4-5: split into the two pure problems and freeze the variables of
/// the opposite block as fresh constants.
struct SplitResult {
  std::vector<Equation> gamma41;
  std::vector<Equation> gamma42;
  std::vector<Equation> gamma51;
  std::vector<Equation> gamma52;
  std::set<Term> v1;
  std::set<Term> v2;
  Substitution alpha;  // v2 -> constants, applied to the std side
  Substitution beta;   // v1 -> constants, applied to the acun side
  std::map<Term, Term> unfreeze;  // constant -> variable
};

inline Term frozen_constant(const Term& var) { return make_const("#" + var.name(), var.declared_type()); }

inline std::vector<Equation> apply_all(const std::vector<Equation>& eqs, const Substitution& s) {
  std::vector<Equation> out;
  out.reserve(eqs.size());
  for (const auto& e : eqs) {
    Term l = s.apply(e.lhs);
    Term r = s.apply(e.rhs);
    if (!(l == r)) out.push_back({l, r});
  }
  return out;
}

inline SplitResult split_and_abstract(const std::vector<Equation>& std_eqs, const std::vector<Equation>& acun_eqs,
                                      const std::set<Term>& v1, const std::set<Term>& v2) {
  SplitResult r;
  r.gamma41 = std_eqs;
  r.gamma42 = acun_eqs;
  r.v1 = v1;
  r.v2 = v2;
  for (const auto& v : v2) {
    Term c = frozen_constant(v);
    r.alpha.bind(v, c);
    r.unfreeze.emplace(c, v);
  }
  for (const auto& v : v1) {
    Term c = frozen_constant(v);
    r.beta.bind(v, c);
    r.unfreeze.emplace(c, v);
  }
  r.gamma51 = apply_all(std_eqs, r.alpha);
  r.gamma52 = apply_all(acun_eqs, r.beta);
  return r;
}

inline Term unfreeze(const Term& t, const std::map<Term, Term>& back) {
  if (t.is_const()) {
    auto it = back.find(t);
    return it == back.end() ? t : it->second;
  }
  if (t.is_atom()) return t;
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const auto& a : t.args()) args.push_back(unfreeze(a, back));
  return rebuild(t, std::move(args));
}

namespace detail {
// Y must precede X whenever the frozen constant of Y occurs in the binding of X.
inline std::map<Term, std::set<Term>> combination_deps(const Substitution& s1, const Substitution& s2,
                                                       const SplitResult& sp) {
  std::map<Term, std::set<Term>> deps;
  auto scan = [&](const Substitution& s) {
    for (const auto& [x, v] : s) {
      for (const auto& c : constants_of(v)) {
        auto it = sp.unfreeze.find(c);
        if (it != sp.unfreeze.end()) deps[x].insert(it->second);
      }
    }
  };
  scan(s1);
  scan(s2);
  return deps;
}
}  // namespace detail

/// A linear order on v1 u v2 compatible with the dependencies of (s1, s2),
/// ties broken by the term order; nullopt when the dependencies are cyclic.
inline std::optional<std::vector<Term>> admissible_order(const Substitution& s1, const Substitution& s2,
                                                         const SplitResult& sp) {
  auto deps = detail::combination_deps(s1, s2, sp);
  std::set<Term> all = sp.v1;
  all.insert(sp.v2.begin(), sp.v2.end());
  std::vector<Term> order;
  std::set<Term> placed;
  while (placed.size() < all.size()) {
    bool progressed = false;
    for (const auto& x : all) {
      if (placed.count(x)) continue;
      bool ready = true;
      for (const auto& y : deps[x]) {
        if (!placed.count(y)) {
          ready = false;
          break;
        }
      }
      if (ready) {
        order.push_back(x);
        placed.insert(x);
        progressed = true;
        break;
      }
    }
    if (!progressed) return std::nullopt;
  }
  return order;
}

/// The combined unifier s1 (.) s2 along `order`: the least variables take
/// their own theory's binding; every later variable takes its theory's
/// binding with the already combined part applied. Frozen constants of the
/// opposite block are turned back into their variables first.
inline Substitution combine(const Substitution& s1, const Substitution& s2, const SplitResult& sp,
                            const std::vector<Term>& order) {
  auto deps = detail::combination_deps(s1, s2, sp);
  std::map<Term, std::size_t> pos;
  for (std::size_t i = 0; i < order.size(); ++i) pos.emplace(order[i], i);
  for (const auto& [x, ys] : deps) {
    for (const auto& y : ys) {
      if (!pos.count(x) || !pos.count(y) || pos[y] >= pos[x]) {
        throw OrderIncompatible("order places " + x.to_string() + " before " + y.to_string() +
                                " but its binding depends on it");
      }
    }
  }
  Substitution sigma;
  for (const auto& x : order) {
    const Substitution& own = sp.v1.count(x) ? s1 : s2;
    auto b = own.lookup(x);
    if (!b) continue;
    sigma.bind(x, sigma.apply(unfreeze(*b, sp.unfreeze)));
  }
  return sigma;
}

inline Substitution combine(const Substitution& s1, const Substitution& s2, const SplitResult& sp) {
  auto order = admissible_order(s1, s2, sp);
  if (!order) throw OrderIncompatible("no admissible linear order for the candidate pair");
  return combine(s1, s2, sp, *order);
}

/// Record of one branch (identification x two-way partition) of the
/// combination procedure.
struct BscaTrace {
  std::vector<Equation> gamma1;
  std::vector<Equation> gamma2;
  Identification identification;
  std::vector<Equation> gamma3;
  SplitResult split;
  std::vector<Substitution> std_unifiers;
  std::vector<Substitution> acun_unifiers;
  std::vector<std::vector<Term>> orders;
  std::vector<Substitution> combined;
  std::vector<std::string> notes;

  bool succeeded() const { return !combined.empty(); }
};

struct BscaOptions {
  std::size_t var_cap = 8;
  /// Solve the free part (decomposition of standard constructors, variable
  /// elimination, pure ACUN residues) directly before the combination.
  bool preprocess = true;
  /// When set, every successful branch is appended here.
  std::vector<BscaTrace>* traces = nullptr;
};

namespace detail {

/// Renames variables outside `keep` occurring in the range, in first
/// occurrence order, so that unifiers equal up to such renaming compare equal.
inline Substitution canonical_renaming(const Substitution& s, const std::set<Term>& keep) {
  Substitution ren;
  int counter = 0;
  std::function<void(const Term&)> visit = [&](const Term& t) {
    if (t.is_ground()) return;
    if (t.is_var()) {
      if (!keep.count(t) && !ren.binds(t)) {
        ren.bind(t, make_var("_U" + std::to_string(++counter), t.declared_type()));
      }
      return;
    }
    for (const auto& a : t.args()) visit(a);
  };
  for (const auto& [_, v] : s) visit(v);
  Substitution out;
  for (const auto& [k, v] : s) out.bind(k, ren.apply(v));
  return out;
}

inline std::vector<Substitution> acun_solutions(const std::vector<Equation>& eqs) {
  UnificationProblem p{eqs, Theory::Acun};
  auto vars_set = p.vars();
  std::vector<Term> vars(vars_set.begin(), vars_set.end());
  std::vector<Substitution> out;
  // Each variable order selects different pivots, i.e. a different but
  // equally general parameterization of the same solution space. The
  // constant restrictions of the combination favour different ones.
  do {
    auto r = unify_acun(p, vars);
    if (r.empty()) return {};
    out.push_back(r.unifiers.front());
  } while (std::next_permutation(vars.begin(), vars.end()));
  dedupe(out);
  return out;
}

inline void run_branch(const Purified& pur, const Identification& id, const std::set<Term>& v1,
                       const std::set<Term>& v2, BscaTrace& trace) {
  trace.gamma1 = pur.gamma1;
  trace.gamma2 = pur.gamma2();
  trace.identification = id;
  auto std3 = apply_all(pur.std_eqs, id.rho);
  auto acun3 = apply_all(pur.acun_eqs, id.rho);
  trace.gamma3 = std3;
  trace.gamma3.insert(trace.gamma3.end(), acun3.begin(), acun3.end());
  trace.split = split_and_abstract(std3, acun3, v1, v2);
  const auto& sp = trace.split;
  auto s1 = unify_std(UnificationProblem{sp.gamma51, Theory::Std});
  trace.std_unifiers = s1.unifiers;
  if (s1.empty()) {
    trace.notes.push_back("std part has no unifier");
    return;
  }
  if (!is_acun_atom_problem(sp.gamma52)) {
    trace.notes.push_back("acun part is not pure");
    return;
  }
  trace.acun_unifiers = acun_solutions(sp.gamma52);
  if (trace.acun_unifiers.empty()) {
    std::string ground;
    for (const auto& e : sp.gamma52) {
      if (e.lhs.is_ground() && e.rhs.is_ground()) {
        ground += (ground.empty() ? "" : ", ") + e.to_string();
      }
    }
    trace.notes.push_back(ground.empty() ? "acun part has no unifier"
                                         : "acun part has no unifier: ground failure " + ground);
    return;
  }
  std::set<Term> orig = pur.original_vars;
  for (const auto& a : trace.std_unifiers) {
    for (const auto& b : trace.acun_unifiers) {
      auto order = admissible_order(a, b, sp);
      if (!order) continue;
      Substitution sigma = combine(a, b, sp, *order);
      for (const auto& [x, rep] : id.rho) sigma.bind(x, sigma.apply(rep));
      trace.orders.push_back(*order);
      trace.combined.push_back(sigma);
    }
  }
  if (trace.combined.empty()) trace.notes.push_back("no admissible linear order");
}

inline UnifierSet finish(std::vector<Substitution> raw, const std::vector<Equation>& eqs,
                         const std::set<Term>& orig) {
  UnifierSet out;
  for (auto& s : raw) {
    auto r = canonical_renaming(s.restricted(orig), orig);
    if (solves(r, eqs)) out.unifiers.push_back(std::move(r));
  }
  dedupe(out.unifiers);
  return out;
}

/// The full enumeration over identifications and two-way partitions.
inline std::vector<Substitution> bsca_enumerate(const UnificationProblem& p, const BscaOptions& opt) {
  Purified pur = purify(p);
  std::set<Term> vars = pur.vars();
  std::set<Term> std_defined;
  for (const auto& d : pur.defs) {
    if (d.theory == Theory::Std) std_defined.insert(d.var);
  }
  std::vector<Substitution> raw;
  for_each_identification(vars, opt.var_cap, [&](const Identification& id) {
    auto std3 = apply_all(pur.std_eqs, id.rho);
    // Freezing variables only restricts solutions, so a failure with every
    // variable free rules out all two-way partitions of this identification.
    if (unify_std(UnificationProblem{std3, Theory::Std}).empty()) return true;
    std::vector<Term> choosable;
    std::set<Term> forced_v1;
    for (const auto& b : id.blocks) {
      bool forced = std::any_of(b.begin(), b.end(), [&](const Term& v) { return std_defined.count(v) != 0; });
      if (forced) {
        forced_v1.insert(b.front());
      } else {
        choosable.push_back(b.front());
      }
    }
    if (choosable.size() >= 63) throw CapExceeded("too many blocks");
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << choosable.size()); ++mask) {
      std::set<Term> v1 = forced_v1, v2;
      for (std::size_t i = 0; i < choosable.size(); ++i) {
        ((mask >> i) & 1U ? v2 : v1).insert(choosable[i]);
      }
      BscaTrace trace;
      run_branch(pur, id, v1, v2, trace);
      if (trace.succeeded()) {
        raw.insert(raw.end(), trace.combined.begin(), trace.combined.end());
        if (opt.traces) opt.traces->push_back(std::move(trace));
      }
    }
    return true;
  });
  return raw;
}

// Free-part preprocessing. Returns false when a clash makes the branch fail.
inline bool std_only_path(const Term& var, const Term& t) {
  if (t == var) return true;
  if (t.is_xor() || t.is_atom()) return false;
  for (const auto& a : t.args()) {
    if (std_only_path(var, a)) return true;
  }
  return false;
}

// An XOR without variable summands is zero only if its summands cancel in
// pairs, and summands with different head symbols are never equal.
inline bool heads_unbalanced(const Term& sum) {
  if (sum.is_zero() || sum.is_var()) return false;
  if (!sum.is_xor()) return true;
  std::map<std::string, int> parity;
  for (const auto& t : sum.args()) {
    if (t.is_var()) return false;
    std::string key = t.is_const() ? "c:" + t.name() : std::string(kind_name(t.kind())) + "/" + std::to_string(t.arity());
    parity[key] ^= 1;
  }
  return std::any_of(parity.begin(), parity.end(), [](const auto& kv) { return kv.second != 0; });
}

inline void preprocess(std::vector<Equation> work, Substitution s, std::vector<Equation> residual,
                       std::vector<std::pair<Substitution, std::vector<Equation>>>& out) {
  while (!work.empty()) {
    Equation e = std::move(work.back());
    work.pop_back();
    Term l = s.apply(e.lhs);
    Term r = s.apply(e.rhs);
    if (l == r) continue;
    if (!l.is_var() && r.is_var()) std::swap(l, r);
    if (l.is_var()) {
      if (!occurs(l, r)) {
        Substitution single;
        single.bind(l, r);
        s = s.then(single);
        continue;
      }
      if (std_only_path(l, r)) return;
      residual.push_back({l, r});
      continue;
    }
    auto sl = side_of(l);
    auto sr = side_of(r);
    if (sl == Side::Acun || sr == Side::Acun) {
      if (heads_unbalanced(xor_of(l, r))) return;
      residual.push_back({l, r});
      continue;
    }
    // Both sides are constants or standard constructors.
    if (l.kind() != r.kind() || l.arity() != r.arity() || l.is_const()) return;
    if (l.kind() == Kind::Sh) {
      auto alt = work;
      alt.push_back({l.arg(0), r.arg(1)});
      alt.push_back({l.arg(1), r.arg(0)});
      preprocess(std::move(alt), s, residual, out);
    }
    for (std::size_t i = 0; i < l.arity(); ++i) work.push_back({l.arg(i), r.arg(i)});
  }
  out.push_back({s, apply_all(residual, s)});
}

// Groups equations that share variables.
inline std::vector<std::vector<Equation>> components(const std::vector<Equation>& eqs) {
  std::vector<std::size_t> parent(eqs.size());
  for (std::size_t i = 0; i < eqs.size(); ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    return parent[i] == i ? i : parent[i] = find(parent[i]);
  };
  std::map<Term, std::size_t> owner;
  for (std::size_t i = 0; i < eqs.size(); ++i) {
    std::set<Term> vs = vars_of(eqs[i].lhs);
    collect_vars(eqs[i].rhs, vs);
    for (const auto& v : vs) {
      auto [it, fresh] = owner.emplace(v, i);
      if (!fresh) parent[find(i)] = find(it->second);
    }
  }
  std::map<std::size_t, std::vector<Equation>> groups;
  for (std::size_t i = 0; i < eqs.size(); ++i) groups[find(i)].push_back(eqs[i]);
  std::vector<std::vector<Equation>> out;
  for (auto& [_, g] : groups) out.push_back(std::move(g));
  return out;
}

inline std::vector<Substitution> solve_component(const std::vector<Equation>& eqs, const BscaOptions& opt,
                                                 std::size_t tag) {
  UnificationProblem p{eqs, Theory::Combined};
  std::set<Term> vars = p.vars();
  std::vector<Substitution> sols;
  if (is_acun_atom_problem(eqs)) {
    sols = unify_acun(UnificationProblem{eqs, Theory::Acun}).unifiers;
  } else {
    sols = finish(bsca_enumerate(p, opt), eqs, vars).unifiers;
  }
  // Introduced variables are made distinct across components.
  for (auto& s : sols) {
    Substitution ren;
    for (const auto& [_, t] : s) {
      for (const auto& v : vars_of(t)) {
        if (!vars.count(v) && !ren.binds(v)) {
          ren.bind(v, make_var(v.name() + "c" + std::to_string(tag), v.declared_type()));
        }
      }
    }
    if (ren.empty()) continue;
    Substitution r;
    for (const auto& [k, t] : s) r.bind(k, ren.apply(t));
    s = std::move(r);
  }
  return sols;
}

}  // namespace detail

/// Complete set of unifiers modulo the union of the standard theory and
/// ACUN, by the Baader-Schulz combination. Unifiers are restricted to the
/// problem's variables, deduplicated up to renaming of introduced variables
/// and returned in a deterministic order.
inline UnifierSet unify_sua(const UnificationProblem& p, const BscaOptions& opt = {}) {
  std::set<Term> orig = p.vars();
  std::vector<Substitution> raw;
  if (!opt.preprocess) {
    raw = detail::bsca_enumerate(p, opt);
    return detail::finish(std::move(raw), p.equations, orig);
  }
  std::vector<std::pair<Substitution, std::vector<Equation>>> pre;
  std::vector<Equation> work(p.equations.rbegin(), p.equations.rend());
  detail::preprocess(std::move(work), {}, {}, pre);
  for (auto& [s, residual] : pre) {
    if (residual.empty()) {
      raw.push_back(s);
      continue;
    }
    // Variable-disjoint parts are solved separately and their unifiers
    // joined.
    std::vector<Substitution> rest{Substitution{}};
    auto parts = detail::components(residual);
    for (std::size_t k = 0; k < parts.size() && !rest.empty(); ++k) {
      auto sols = detail::solve_component(parts[k], opt, k);
      std::vector<Substitution> next;
      for (const auto& r : rest) {
        for (const auto& q : sols) {
          Substitution u = r;
          for (const auto& [v, t] : q) u.bind(v, t);
          next.push_back(std::move(u));
        }
      }
      rest = std::move(next);
    }
    for (const auto& t : rest) raw.push_back(s.then(t));
  }
  return detail::finish(std::move(raw), p.equations, orig);
}

inline UnifierSet unify_sua(const Term& a, const Term& b, const BscaOptions& opt = {}) {
  return unify_sua(UnificationProblem{{{a, b}}, Theory::Combined}, opt);
}

/// Runs a single branch of the combination on `p` (no preprocessing).
inline BscaTrace bsca_branch(const UnificationProblem& p, const Identification& id, const std::set<Term>& v1,
                             const std::set<Term>& v2) {
  BscaTrace trace;
  detail::run_branch(purify(p), id, v1, v2, trace);
  return trace;
}

}  // namespace xorproto
