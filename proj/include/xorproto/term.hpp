#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace xorproto {

/// Structural type of a term. Atomic sorts (Agent, Nonce, ...) have no
/// arguments; constructed types mirror the shape of the term they describe.
struct TypeExpr {
  std::string op;
  std::vector<TypeExpr> args;
  bool atomic = true;

  static TypeExpr sort(std::string name) { return TypeExpr{std::move(name), {}, true}; }
  static TypeExpr constructed(std::string op, std::vector<TypeExpr> args) {
    return TypeExpr{std::move(op), std::move(args), false};
  }

  friend bool operator==(const TypeExpr&, const TypeExpr&) = default;
  friend std::strong_ordering operator<=>(const TypeExpr& a, const TypeExpr& b) {
    if (auto c = a.atomic <=> b.atomic; c != 0) return c;
    if (auto c = a.op.compare(b.op) <=> 0; c != 0) return c;
    return std::lexicographical_compare_three_way(a.args.begin(), a.args.end(), b.args.begin(),
                                                  b.args.end());
  }

  std::string to_string() const {
    if (atomic) return op;
    std::string out = op + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) out += ",";
      out += args[i].to_string();
    }
    return out + ")";
  }
};

inline std::ostream& operator<<(std::ostream& os, const TypeExpr& t) { return os << t.to_string(); }

namespace sorts {
inline const std::string kAgent = "Agent";
inline const std::string kNonce = "Nonce";
inline const std::string kKey = "Key";
inline const std::string kTag = "Tag";
inline const std::string kNumber = "Number";
inline const std::string kText = "Text";
inline const std::string kZero = "Zero";
}  // namespace sorts

/// Constructor tag. The declaration order is the first key of the total
/// term order used for canonical XOR summand lists.
enum class Kind : std::uint8_t {
  Zero,
  Constant,
  Variable,
  Sequence,
  PEnc,
  SEnc,
  Pk,
  Sh,
  Hash,
  Sig,
  Xor,
};

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Zero: return "zero";
    case Kind::Constant: return "constant";
    case Kind::Variable: return "variable";
    case Kind::Sequence: return "sequence";
    case Kind::PEnc: return "penc";
    case Kind::SEnc: return "senc";
    case Kind::Pk: return "pk";
    case Kind::Sh: return "sh";
    case Kind::Hash: return "h";
    case Kind::Sig: return "sig";
    case Kind::Xor: return "xor";
  }
  return "?";
}

class Term;

namespace detail {
struct Node {
  Kind kind;
  std::string name;  // constants and variables
  TypeExpr type;     // declared type, constants and variables only
  std::vector<Term> args;
  std::size_t hash = 0;
  std::size_t size = 1;
  bool ground = true;
};
}  // namespace detail

/// Immutable, shared message term. Every Term produced through the factory
/// functions below is in ACUN canonical form: XOR nodes are flat, sorted by
/// the total term order, free of Zero and of pairwise-equal summands, and
/// have at least two summands. Sh arguments are kept sorted.
class Term {
 public:
  Term() = default;

  Kind kind() const { return node_->kind; }
  const std::string& name() const { return node_->name; }
  const TypeExpr& declared_type() const { return node_->type; }
  std::span<const Term> args() const { return node_->args; }
  const Term& arg(std::size_t i) const { return node_->args.at(i); }
  std::size_t arity() const { return node_->args.size(); }
  std::size_t hash() const { return node_->hash; }
  std::size_t size() const { return node_->size; }
  bool is_ground() const { return node_->ground; }
  bool valid() const { return node_ != nullptr; }

  bool is_var() const { return kind() == Kind::Variable; }
  bool is_const() const { return kind() == Kind::Constant; }
  bool is_zero() const { return kind() == Kind::Zero; }
  bool is_xor() const { return kind() == Kind::Xor; }
  bool is_atom() const { return is_var() || is_const() || is_zero(); }

  friend bool operator==(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return true;
    if (a.node_->hash != b.node_->hash) return false;
    return compare(a, b) == 0;
  }
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return std::strong_ordering::equal;
    return compare(a, b);
  }

  std::string to_string() const;

 private:
  explicit Term(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}

  static std::strong_ordering compare(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return std::strong_ordering::equal;
    const auto& x = *a.node_;
    const auto& y = *b.node_;
    if (auto c = x.kind <=> y.kind; c != 0) return c;
    if (auto c = x.name.compare(y.name) <=> 0; c != 0) return c;
    if (auto c = x.args.size() <=> y.args.size(); c != 0) return c;
    for (std::size_t i = 0; i < x.args.size(); ++i) {
      if (auto c = compare(x.args[i], y.args[i]); c != 0) return c;
    }
    return x.type <=> y.type;
  }

  static Term make(Kind kind, std::string name, TypeExpr type, std::vector<Term> args);

  friend Term make_var(std::string name, TypeExpr type);
  friend Term make_const(std::string name, TypeExpr type);
  friend Term zero();
  friend Term seq(std::vector<Term> elems);
  friend Term penc(Term plain, Term key);
  friend Term senc(Term plain, Term key);
  friend Term pk(Term agent);
  friend Term sh(Term a, Term b);
  friend Term hash_of(Term body);
  friend Term sig(Term body, Term key);
  friend Term xor_of(std::vector<Term> summands);
  friend Term rebuild(const Term& t, std::vector<Term> args);

  std::shared_ptr<const detail::Node> node_;
};

inline std::ostream& operator<<(std::ostream& os, const Term& t) { return os << t.to_string(); }

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

inline Term Term::make(Kind kind, std::string name, TypeExpr type, std::vector<Term> args) {
  auto n = std::make_shared<detail::Node>();
  n->kind = kind;
  std::size_t h = std::hash<std::uint8_t>{}(static_cast<std::uint8_t>(kind)) * 0x9e3779b97f4a7c15ULL;
  h ^= std::hash<std::string>{}(name) + 0x9e3779b9 + (h << 6) + (h >> 2);
  n->ground = kind != Kind::Variable;
  for (const auto& a : args) {
    h ^= a.hash() + 0x9e3779b9 + (h << 6) + (h >> 2);
    n->size += a.size();
    n->ground = n->ground && a.is_ground();
  }
  n->hash = h;
  n->name = std::move(name);
  n->type = std::move(type);
  n->args = std::move(args);
  return Term(std::move(n));
}

inline Term make_var(std::string name, TypeExpr type) {
  return Term::make(Kind::Variable, std::move(name), std::move(type), {});
}
inline Term make_var(std::string name, const std::string& sort) {
  return make_var(std::move(name), TypeExpr::sort(sort));
}
inline Term make_const(std::string name, TypeExpr type) {
  return Term::make(Kind::Constant, std::move(name), std::move(type), {});
}
inline Term make_const(std::string name, const std::string& sort) {
  return make_const(std::move(name), TypeExpr::sort(sort));
}
inline Term zero() {
  static const Term z = Term::make(Kind::Zero, "zero", TypeExpr::sort(sorts::kZero), {});
  return z;
}
inline Term seq(std::vector<Term> elems) {
  return Term::make(Kind::Sequence, "", {}, std::move(elems));
}
inline Term penc(Term plain, Term key) {
  return Term::make(Kind::PEnc, "", {}, {std::move(plain), std::move(key)});
}
inline Term senc(Term plain, Term key) {
  return Term::make(Kind::SEnc, "", {}, {std::move(plain), std::move(key)});
}
inline Term pk(Term agent) { return Term::make(Kind::Pk, "", {}, {std::move(agent)}); }
inline Term sh(Term a, Term b) {
  if (b < a) std::swap(a, b);
  return Term::make(Kind::Sh, "", {}, {std::move(a), std::move(b)});
}
inline Term hash_of(Term body) { return Term::make(Kind::Hash, "", {}, {std::move(body)}); }
inline Term sig(Term body, Term key) {
  return Term::make(Kind::Sig, "", {}, {std::move(body), std::move(key)});
}

/// Builds the ACUN normal form of the XOR of `summands`.
inline Term xor_of(std::vector<Term> summands) {
  std::vector<Term> flat;
  flat.reserve(summands.size());
  for (auto& s : summands) {
    if (s.is_zero()) continue;
    if (s.is_xor()) {
      for (const auto& inner : s.args()) flat.push_back(inner);
    } else {
      flat.push_back(std::move(s));
    }
  }
  std::sort(flat.begin(), flat.end());
  std::vector<Term> kept;
  kept.reserve(flat.size());
  for (std::size_t i = 0; i < flat.size();) {
    std::size_t j = i;
    while (j < flat.size() && flat[j] == flat[i]) ++j;
    if ((j - i) % 2 == 1) kept.push_back(flat[i]);
    i = j;
  }
  if (kept.empty()) return zero();
  if (kept.size() == 1) return kept.front();
  return Term::make(Kind::Xor, "", {}, std::move(kept));
}

inline Term xor_of(const Term& a, const Term& b) { return xor_of(std::vector<Term>{a, b}); }

/// Same constructor as `t`, new arguments, re-canonicalized.
inline Term rebuild(const Term& t, std::vector<Term> args) {
  switch (t.kind()) {
    case Kind::Zero:
    case Kind::Constant:
    case Kind::Variable: return t;
    case Kind::Sequence: return seq(std::move(args));
    case Kind::PEnc: return penc(std::move(args.at(0)), std::move(args.at(1)));
    case Kind::SEnc: return senc(std::move(args.at(0)), std::move(args.at(1)));
    case Kind::Pk: return pk(std::move(args.at(0)));
    case Kind::Sh: return sh(std::move(args.at(0)), std::move(args.at(1)));
    case Kind::Hash: return hash_of(std::move(args.at(0)));
    case Kind::Sig: return sig(std::move(args.at(0)), std::move(args.at(1)));
    case Kind::Xor: return xor_of(std::move(args));
  }
  throw std::logic_error("rebuild: unknown kind");
}

/// Summands of `t` viewed as an XOR: empty for Zero, {t} for a non-XOR term.
inline std::vector<Term> summands_of(const Term& t) {
  if (t.is_zero()) return {};
  if (t.is_xor()) return {t.args().begin(), t.args().end()};
  return {t};
}

/// Name of the attacker constant. It is always of sort Agent.
inline const std::string kAttackerName = "eps";
inline Term attacker() {
  static const Term e = make_const(kAttackerName, sorts::kAgent);
  return e;
}

inline std::string Term::to_string() const {
  const auto& n = *node_;
  auto join = [&](const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < n.args.size(); ++i) {
      if (i) out += sep;
      out += n.args[i].to_string();
    }
    return out;
  };
  switch (n.kind) {
    case Kind::Zero: return "zero";
    case Kind::Constant:
    case Kind::Variable: return n.name;
    case Kind::Sequence: return "[" + join(", ") + "]";
    case Kind::PEnc: return "penc(" + join(", ") + ")";
    case Kind::SEnc: return "senc(" + join(", ") + ")";
    case Kind::Pk: return "pk(" + join(", ") + ")";
    case Kind::Sh: return "sh(" + join(", ") + ")";
    case Kind::Hash: return "h(" + join(", ") + ")";
    case Kind::Sig: return "sig(" + join(", ") + ")";
    case Kind::Xor: return join(" xor ");
  }
  return "?";
}

}  // namespace xorproto

template <>
struct std::hash<xorproto::Term> {
  std::size_t operator()(const xorproto::Term& t) const noexcept { return t.hash(); }
};
