#pragma once

#include <set>
#include <string>
#include <vector>

#include "xorproto/substitution.hpp"
#include "xorproto/term.hpp"

namespace xorproto {

enum class Theory { Std, Acun, Combined };

inline const char* theory_name(Theory th) {
  switch (th) {
    case Theory::Std: return "std";
    case Theory::Acun: return "acun";
    case Theory::Combined: return "std+acun";
  }
  return "?";
}

/// Rebuilds `t` bottom-up through the canonicalizing constructors.
inline Term canonicalize(const Term& t) {
  if (t.is_atom()) return t;
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const auto& a : t.args()) args.push_back(canonicalize(a));
  return rebuild(t, std::move(args));
}

namespace detail {
inline void collect_subterms(const Term& t, std::set<Term>& out) {
  if (!out.insert(t).second) return;
  for (const auto& a : t.args()) collect_subterms(a, out);
}

inline void collect_interms(const Term& t, std::set<Term>& out) {
  if (!out.insert(t).second) return;
  switch (t.kind()) {
    case Kind::Sequence:
    case Kind::Xor:
      for (const auto& a : t.args()) collect_interms(a, out);
      break;
    case Kind::PEnc:
    case Kind::SEnc: collect_interms(t.arg(0), out); break;
    default: break;
  }
}
}  // namespace detail

/// Reflexive-transitive closure of the direct-argument relation.
inline std::set<Term> subterms(const Term& t) {
  std::set<Term> out;
  detail::collect_subterms(t, out);
  return out;
}

inline std::set<Term> subterms(const std::vector<Term>& ts) {
  std::set<Term> out;
  for (const auto& t : ts) detail::collect_subterms(t, out);
  return out;
}

/// The readable-payload relation: descends into sequence elements, XOR
/// summands and encryption plaintexts, never into keys, hashes or signatures.
inline std::set<Term> interms(const Term& t) {
  std::set<Term> out;
  detail::collect_interms(t, out);
  return out;
}

inline bool is_interm(const Term& inner, const Term& outer) { return interms(outer).count(inner) != 0; }

inline bool occurs(const Term& var, const Term& t) {
  if (t.is_ground()) return false;
  if (t == var) return true;
  for (const auto& a : t.args()) {
    if (occurs(var, a)) return true;
  }
  return false;
}

inline void collect_vars(const Term& t, std::set<Term>& out) {
  if (t.is_ground()) return;
  if (t.is_var()) {
    out.insert(t);
    return;
  }
  for (const auto& a : t.args()) collect_vars(a, out);
}

inline std::set<Term> vars_of(const Term& t) {
  std::set<Term> out;
  collect_vars(t, out);
  return out;
}

inline void collect_constants(const Term& t, std::set<Term>& out) {
  if (t.is_const()) {
    out.insert(t);
    return;
  }
  for (const auto& a : t.args()) collect_constants(a, out);
}

inline std::set<Term> constants_of(const Term& t) {
  std::set<Term> out;
  collect_constants(t, out);
  return out;
}

/// type(f(t1..tn)) = f(type(t1)..type(tn)). XOR argument types are sorted so
/// that the type of a canonical XOR does not depend on summand order.
inline TypeExpr type_of(const Term& t) {
  switch (t.kind()) {
    case Kind::Zero:
    case Kind::Constant:
    case Kind::Variable: return t.declared_type();
    default: break;
  }
  std::vector<TypeExpr> args;
  args.reserve(t.arity());
  for (const auto& a : t.args()) args.push_back(type_of(a));
  if (t.is_xor() || t.kind() == Kind::Sh) std::sort(args.begin(), args.end());
  return TypeExpr::constructed(kind_name(t.kind()), std::move(args));
}

inline bool is_well_typed_binding(const Term& var, const Term& value) {
  return type_of(var) == type_of(value);
}

inline bool is_well_typed(const Substitution& s) {
  for (const auto& [k, v] : s) {
    if (!is_well_typed_binding(k, v)) return false;
  }
  return true;
}

/// True when the root operator of `t` belongs to the signature of `th`.
/// Variables and constants belong to both signatures; Zero only to ACUN.
inline bool root_in_signature(const Term& t, Theory th) {
  switch (t.kind()) {
    case Kind::Variable:
    case Kind::Constant: return true;
    case Kind::Zero:
    case Kind::Xor: return th != Theory::Std;
    default: return th != Theory::Acun;
  }
}

inline bool is_pure(const Term& t, Theory th) {
  if (!root_in_signature(t, th)) return false;
  for (const auto& a : t.args()) {
    if (!is_pure(a, th)) return false;
  }
  return true;
}

namespace detail {
inline void collect_aliens(const Term& t, Theory th, std::set<Term>& out) {
  if (!root_in_signature(t, th)) {
    out.insert(t);
    return;
  }
  for (const auto& a : t.args()) collect_aliens(a, th, out);
}
}  // namespace detail

/// Maximal subterms of `t` whose root lies outside the signature of `th`.
inline std::set<Term> alien_subterms(const Term& t, Theory th) {
  std::set<Term> out;
  detail::collect_aliens(t, th, out);
  return out;
}

inline bool is_encryption_like(const Term& t) {
  switch (t.kind()) {
    case Kind::PEnc:
    case Kind::SEnc:
    case Kind::Hash:
    case Kind::Sig: return true;
    default: return false;
  }
}

/// Encrypted, hashed and signed subterms.
inline std::set<Term> encrypted_subterms(const std::vector<Term>& ts) {
  std::set<Term> out;
  for (const auto& s : subterms(ts)) {
    if (is_encryption_like(s)) out.insert(s);
  }
  return out;
}

inline std::set<Term> xor_subterms(const std::vector<Term>& ts) {
  std::set<Term> out;
  for (const auto& s : subterms(ts)) {
    if (s.is_xor()) out.insert(s);
  }
  return out;
}

/// Renames every variable of `t` by appending `suffix`, keeping its type.
inline Substitution renaming(const std::set<Term>& vars, const std::string& suffix) {
  Substitution s;
  for (const auto& v : vars) s.bind(v, make_var(v.name() + suffix, v.declared_type()));
  return s;
}

}  // namespace xorproto
