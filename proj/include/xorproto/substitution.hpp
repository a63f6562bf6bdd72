#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xorproto/term.hpp"

namespace xorproto {

/// Finite map from variables to terms. Application is homomorphic and
/// re-canonicalizes, so `apply` always returns ACUN normal forms.
class Substitution {
 public:
  using Map = std::map<Term, Term>;

  Substitution() = default;
  Substitution(std::initializer_list<std::pair<const Term, Term>> init) : bindings_(init) {}

  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }
  const Map& bindings() const { return bindings_; }
  auto begin() const { return bindings_.begin(); }
  auto end() const { return bindings_.end(); }

  void bind(const Term& var, Term value) {
    if (!var.is_var()) throw std::invalid_argument("Substitution::bind: not a variable: " + var.to_string());
    if (value == var) {
      bindings_.erase(var);
      return;
    }
    bindings_.insert_or_assign(var, std::move(value));
  }
  void erase(const Term& var) { bindings_.erase(var); }

  std::optional<Term> lookup(const Term& var) const {
    auto it = bindings_.find(var);
    if (it == bindings_.end()) return std::nullopt;
    return it->second;
  }
  bool binds(const Term& var) const { return bindings_.count(var) != 0; }

  std::vector<Term> domain() const {
    std::vector<Term> out;
    for (const auto& [k, _] : bindings_) out.push_back(k);
    return out;
  }

  Term apply(const Term& t) const {
    if (bindings_.empty() || t.is_ground()) return t;
    if (t.is_var()) {
      auto it = bindings_.find(t);
      return it == bindings_.end() ? t : it->second;
    }
    std::vector<Term> args;
    args.reserve(t.arity());
    bool changed = false;
    for (const auto& a : t.args()) {
      args.push_back(apply(a));
      changed = changed || !(args.back() == a);
    }
    return changed ? rebuild(t, std::move(args)) : t;
  }

  /// r = this ; then `next`: apply(apply(t,*this),next) == apply(t, r).
  Substitution then(const Substitution& next) const {
    Substitution r;
    for (const auto& [k, v] : bindings_) r.bind(k, next.apply(v));
    for (const auto& [k, v] : next.bindings_) {
      if (!bindings_.count(k)) r.bind(k, v);
    }
    return r;
  }

  /// Keeps only bindings whose variable is in `vars`.
  Substitution restricted(const std::set<Term>& vars) const {
    Substitution r;
    for (const auto& [k, v] : bindings_) {
      if (vars.count(k)) r.bindings_.emplace(k, v);
    }
    return r;
  }

  bool is_idempotent() const {
    for (const auto& [_, v] : bindings_) {
      if (!(apply(v) == v)) return false;
    }
    return true;
  }

  friend bool operator==(const Substitution&, const Substitution&) = default;
  friend auto operator<=>(const Substitution& a, const Substitution& b) {
    return a.bindings_ <=> b.bindings_;
  }

  /// `{t1/X1, t2/X2}` in variable order.
  std::string to_string() const {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : bindings_) {
      if (!first) out += ", ";
      first = false;
      out += v.to_string() + "/" + k.to_string();
    }
    return out + "}";
  }

 private:
  Map bindings_;
};

inline std::ostream& operator<<(std::ostream& os, const Substitution& s) { return os << s.to_string(); }

inline Term apply(const Term& t, const Substitution& s) { return s.apply(t); }

inline Substitution compose(const Substitution& first, const Substitution& second) {
  return first.then(second);
}

}  // namespace xorproto
