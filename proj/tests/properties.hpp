#pragma once

// Property checks shared by the unit tests and the acceptance runner. Each
// returns an empty optional on success and a description of the
// counterexample otherwise.

#include <optional>
#include <random>
#include <string>

#include "generators.hpp"
#include "oracles.hpp"
#include "xorproto/nut.hpp"
#include "xorproto/unify_combined.hpp"

namespace props {

using namespace xorproto;

/// Soundness of every unifier and coverage of every ground solution over
/// the XOR span of the problem's atoms.
inline std::optional<std::string> combined_completeness(const UnificationProblem& p, const BscaOptions& opt = {}) {
  UnifierSet us;
  try {
    us = unify_sua(p, opt);
  } catch (const CapExceeded& e) {
    return std::string("cap exceeded: ") + e.what();
  }
  for (const auto& u : us) {
    if (!oracle::sound(u, p.equations)) return "unsound " + u.to_string() + " for " + p.to_string();
  }
  std::set<Term> atoms;
  for (const auto& e : p.equations) {
    for (const auto& c : constants_of(e.lhs)) atoms.insert(c);
    for (const auto& c : constants_of(e.rhs)) atoms.insert(c);
  }
  if (atoms.empty()) atoms.insert(make_const("a", sorts::kAgent));
  auto domain = oracle::xor_span({atoms.begin(), atoms.end()});
  auto vs = p.vars();
  std::vector<Term> vars(vs.begin(), vs.end());
  for (const auto& g : oracle::ground_solutions(vars, domain, p.equations)) {
    bool covered = false;
    for (const auto& u : us) {
      if (oracle::is_instance(g, u, vars, domain)) {
        covered = true;
        break;
      }
    }
    if (!covered) {
      std::string gs;
      for (const auto& [n, r] : g) gs += n + "=" + oracle::norm(r) + " ";
      return "ground solution " + gs + "not covered for " + p.to_string();
    }
  }
  return std::nullopt;
}

/// Two well-typed instances of one std-pure pattern unify only well-typed.
inline std::optional<std::string> well_typed_transfer(std::mt19937& rng, bool* unified = nullptr) {
  auto tp = gen::random_pattern(rng, 3);
  Term t1 = gen::random_typed_instance(rng, tp.vars, "'1").apply(tp.pattern);
  Term t2 = gen::random_typed_instance(rng, tp.vars, "'2").apply(tp.pattern);
  auto us = unify_std(t1, t2);
  if (unified) *unified = !us.empty();
  for (const auto& u : us) {
    if (!is_well_typed(u)) return "ill-typed " + u.to_string() + " for " + t1.to_string() + " ~ " + t2.to_string();
    if (!oracle::sound(u, {{t1, t2}})) return "unsound " + u.to_string();
  }
  return std::nullopt;
}

/// combine(s1, {}) is s1 whenever the second block is empty.
inline std::optional<std::string> empty_second_unifier(std::mt19937& rng) {
  auto al = gen::small_alphabet(3, 3);
  std::vector<Equation> std_eqs;
  for (int i = 0; i < 2; ++i) {
    Term l = gen::random_term(rng, al, 2);
    Term r = gen::random_term(rng, al, 2);
    if (!is_pure(l, Theory::Std) || !is_pure(r, Theory::Std)) continue;
    std_eqs.push_back({l, r});
  }
  std::set<Term> v1(al.vars.begin(), al.vars.end());
  auto sp = split_and_abstract(std_eqs, {}, v1, {});
  auto s1 = unify_std(UnificationProblem{sp.gamma51, Theory::Std});
  for (const auto& s : s1) {
    Substitution c = combine(s, Substitution{}, sp);
    if (!(c == s)) return "combine changed " + s.to_string() + " into " + c.to_string();
  }
  return std::nullopt;
}

/// No free variable is an XOR summand of any subterm.
inline bool xor_summands_closed(const Term& t) {
  for (const auto& x : subterms(t)) {
    if (!x.is_xor()) continue;
    for (const auto& s : x.args()) {
      if (s.is_var()) return false;
    }
  }
  return true;
}

/// Every successful branch of the raw combination on `p` has a ground ACUN
/// part and only empty ACUN unifiers. Sets `*solvable` when the problem has
/// a unifier.
inline std::optional<std::string> acun_part_constants_only(const UnificationProblem& p, bool* solvable = nullptr,
                                                           BscaOptions opt = {}) {
  std::vector<BscaTrace> traces;
  opt.preprocess = false;
  opt.traces = &traces;
  auto us = unify_sua(p, opt);
  if (solvable) *solvable = !us.empty();
  if (us.empty()) return std::nullopt;
  for (const auto& t : traces) {
    for (const auto& e : t.split.gamma52) {
      for (const auto& side : {e.lhs, e.rhs}) {
        for (const auto& x : subterms(side)) {
          if (x.is_var()) return "variable " + x.to_string() + " in acun part of " + p.to_string();
        }
      }
    }
    for (const auto& u : t.acun_unifiers) {
      if (!u.empty()) return "acun unifier " + u.to_string() + " for " + p.to_string();
    }
  }
  return std::nullopt;
}

/// The weaker form that holds when an Xor term sits below a standard
/// constructor: every variable left in the acun part abstracts such an Xor
/// alien, and the acun unifier maps those variables to frozen constants only.
inline std::optional<std::string> acun_part_nested_only(const UnificationProblem& p, BscaOptions opt = {}) {
  std::vector<BscaTrace> traces;
  opt.preprocess = false;
  opt.traces = &traces;
  unify_sua(p, opt);
  Purified pur = purify(p);
  std::set<Term> xor_aliens;
  for (const auto& d : pur.defs) {
    if (d.theory == Theory::Acun && d.value.is_xor()) xor_aliens.insert(d.var);
  }
  for (const auto& t : traces) {
    for (const auto& e : t.split.gamma52) {
      for (const auto& side : {e.lhs, e.rhs}) {
        for (const auto& x : subterms(side)) {
          if (x.is_var() && !xor_aliens.count(x)) return "variable " + x.to_string() + " in acun part of " + p.to_string();
        }
      }
    }
    for (const auto& u : t.acun_unifiers) {
      for (const auto& [x, v] : u.bindings()) {
        if (!xor_aliens.count(x) || !v.is_ground()) return "acun unifier " + u.to_string() + " for " + p.to_string();
      }
    }
  }
  return std::nullopt;
}

/// Unification problems between renamed-apart instances of the subterms of
/// a NUT-passing protocol, restricted to those without variable summands.
inline std::vector<UnificationProblem> protocol_problems(const Protocol& p, std::size_t limit) {
  std::vector<Term> pool;
  for (const auto& t : subterms(p.terms())) {
    if (!t.is_atom() && xor_summands_closed(t)) pool.push_back(t);
  }
  std::vector<UnificationProblem> out;
  for (std::size_t i = 0; i < pool.size() && out.size() < limit; ++i) {
    for (std::size_t j = i; j < pool.size() && out.size() < limit; ++j) {
      if (!pool[i].is_xor() && !pool[j].is_xor() && pool[i].kind() != pool[j].kind()) continue;
      Term a = renaming(vars_of(pool[i]), "'1").apply(pool[i]);
      Term b = renaming(vars_of(pool[j]), "'2").apply(pool[j]);
      if (vars_of(a).size() + vars_of(b).size() > 4) continue;
      out.push_back(UnificationProblem{{{a, b}}, Theory::Combined});
    }
  }
  return out;
}

}  // namespace props
