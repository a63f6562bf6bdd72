#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "xorproto/substitution.hpp"
#include "xorproto/term.hpp"
#include "xorproto/term_algebra.hpp"

namespace xorproto {

struct Equation {
  Term lhs;
  Term rhs;
  friend bool operator==(const Equation&, const Equation&) = default;
  friend auto operator<=>(const Equation&, const Equation&) = default;
  std::string to_string() const { return lhs.to_string() + " = " + rhs.to_string(); }
};

struct UnificationProblem {
  std::vector<Equation> equations;
  Theory theory = Theory::Combined;

  std::set<Term> vars() const {
    std::set<Term> out;
    for (const auto& e : equations) {
      collect_vars(e.lhs, out);
      collect_vars(e.rhs, out);
    }
    return out;
  }
  std::string to_string() const {
    std::string out = "{";
    for (std::size_t i = 0; i < equations.size(); ++i) {
      if (i) out += ", ";
      out += equations[i].to_string();
    }
    return out + "}";
  }
};

enum class UnifyFailure { None, OccursViolation, SignatureClash };

/// A finite set of unifiers. An empty set means the problem has no solution;
/// `failure` then says why when the cause is known.
struct UnifierSet {
  std::vector<Substitution> unifiers;
  UnifyFailure failure = UnifyFailure::None;

  bool empty() const { return unifiers.empty(); }
  std::size_t size() const { return unifiers.size(); }
  auto begin() const { return unifiers.begin(); }
  auto end() const { return unifiers.end(); }
};

/// True when `s` makes both sides of every equation identical (terms are
/// canonical, so identity is ACUN equality).
inline bool solves(const Substitution& s, const std::vector<Equation>& eqs) {
  for (const auto& e : eqs) {
    if (!(s.apply(e.lhs) == s.apply(e.rhs))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Syntactic unification for the standard operators.

namespace detail {

struct StdSolver {
  std::vector<Substitution> found;
  UnifyFailure failure = UnifyFailure::None;

  void note(UnifyFailure f) {
    if (failure == UnifyFailure::None) failure = f;
  }

  static bool bind_into(Substitution& s, const Term& var, const Term& value) {
    Substitution single;
    single.bind(var, value);
    s = s.then(single);
    return true;
  }

  // Sh is commutative and XOR is treated as a rigid commutative symbol, so
  // both may branch; everything else decomposes positionally.
  void run(std::vector<Equation> work, Substitution s) {
    while (!work.empty()) {
      Equation e = std::move(work.back());
      work.pop_back();
      Term l = s.apply(e.lhs);
      Term r = s.apply(e.rhs);
      if (l == r) continue;
      if (!l.is_var() && r.is_var()) std::swap(l, r);
      if (l.is_var()) {
        if (occurs(l, r)) {
          note(UnifyFailure::OccursViolation);
          return;
        }
        bind_into(s, l, r);
        continue;
      }
      if (l.kind() != r.kind() || l.arity() != r.arity()) {
        note(UnifyFailure::SignatureClash);
        return;
      }
      switch (l.kind()) {
        case Kind::Zero:
        case Kind::Constant: note(UnifyFailure::SignatureClash); return;
        case Kind::Sh: {
          auto alt = work;
          alt.push_back({l.arg(0), r.arg(1)});
          alt.push_back({l.arg(1), r.arg(0)});
          run(std::move(alt), s);
          work.push_back({l.arg(0), r.arg(0)});
          work.push_back({l.arg(1), r.arg(1)});
          break;
        }
        case Kind::Xor: {
          std::vector<std::size_t> perm(r.arity());
          for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
          bool first = true;
          std::vector<Equation> chosen;
          do {
            auto alt = work;
            for (std::size_t i = 0; i < perm.size(); ++i) alt.push_back({l.arg(i), r.arg(perm[i])});
            if (first) {
              chosen = std::move(alt);
              first = false;
            } else {
              run(std::move(alt), s);
            }
          } while (std::next_permutation(perm.begin(), perm.end()));
          work = std::move(chosen);
          break;
        }
        default:
          for (std::size_t i = 0; i < l.arity(); ++i) work.push_back({l.arg(i), r.arg(i)});
          break;
      }
    }
    found.push_back(std::move(s));
  }
};

inline void dedupe(std::vector<Substitution>& subs) {
  std::sort(subs.begin(), subs.end());
  subs.erase(std::unique(subs.begin(), subs.end()), subs.end());
}

}  // namespace detail

/// Complete set of most general unifiers modulo the standard identities.
/// XOR nodes, if present, are compared as rigid commutative symbols.
inline UnifierSet unify_std(const UnificationProblem& p) {
  detail::StdSolver solver;
  std::vector<Equation> work(p.equations.rbegin(), p.equations.rend());
  solver.run(std::move(work), {});
  UnifierSet out;
  for (auto& s : solver.found) {
    if (solves(s, p.equations)) out.unifiers.push_back(std::move(s));
  }
  detail::dedupe(out.unifiers);
  if (out.unifiers.empty()) {
    out.failure = solver.failure == UnifyFailure::None ? UnifyFailure::SignatureClash : solver.failure;
  }
  return out;
}

inline UnifierSet unify_std(const Term& a, const Term& b) {
  return unify_std(UnificationProblem{{{a, b}}, Theory::Std});
}

// ---------------------------------------------------------------------------
// Elementary ACUN unification: linear algebra over GF(2).

/// Dense bit row used by the GF(2) elimination.
class Gf2Row {
 public:
  explicit Gf2Row(std::size_t width = 0) : words_((width + 63) / 64, 0), width_(width) {}
  bool get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  void flip(std::size_t i) { words_[i / 64] ^= (std::uint64_t{1} << (i % 64)); }
  void set(std::size_t i, bool v) {
    if (get(i) != v) flip(i);
  }
  Gf2Row& operator^=(const Gf2Row& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= o.words_[w];
    return *this;
  }
  bool none() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }
  std::size_t width() const { return width_; }

 private:
  std::vector<std::uint64_t> words_;
  std::size_t width_;
};

inline bool is_acun_atom_problem(const std::vector<Equation>& eqs) {
  auto ok = [](const Term& t) {
    for (const auto& s : summands_of(t)) {
      if (!s.is_atom()) return false;
    }
    return true;
  };
  return std::all_of(eqs.begin(), eqs.end(), [&](const Equation& e) { return ok(e.lhs) && ok(e.rhs); });
}

/// Most general ACUN unifier of a system whose terms are XORs of variables,
/// constants and Zero (ACUN unification with free constants is unitary).
/// Each equation contributes the row lhs + rhs = 0. Rows are reduced so that
/// each pivot is the *last* variable of `var_order` occurring in the row; the
/// pivot is then bound to the XOR of the remaining atoms of its row.
/// Non-pivot variables stay free and act as the solution-space parameters.
inline UnifierSet unify_acun(const UnificationProblem& p, const std::vector<Term>& var_order) {
  if (!is_acun_atom_problem(p.equations)) {
    throw std::invalid_argument("unify_acun: summands must be variables, constants or zero: " + p.to_string());
  }
  std::set<Term> var_set = p.vars();
  std::vector<Term> vars;
  for (const auto& v : var_order) {
    if (var_set.count(v)) vars.push_back(v);
  }
  for (const auto& v : var_set) {
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
  }
  std::set<Term> const_set;
  for (const auto& e : p.equations) {
    for (const auto* side : {&e.lhs, &e.rhs}) {
      for (const auto& s : summands_of(*side)) {
        if (s.is_const()) const_set.insert(s);
      }
    }
  }
  std::vector<Term> consts(const_set.begin(), const_set.end());
  const std::size_t nv = vars.size();
  const std::size_t width = nv + consts.size();
  auto col_of = [&](const Term& a) -> std::size_t {
    if (a.is_var()) return static_cast<std::size_t>(std::find(vars.begin(), vars.end(), a) - vars.begin());
    return nv + static_cast<std::size_t>(std::lower_bound(consts.begin(), consts.end(), a) - consts.begin());
  };

  std::vector<Gf2Row> rows;
  for (const auto& e : p.equations) {
    Gf2Row row(width);
    for (const auto* side : {&e.lhs, &e.rhs}) {
      for (const auto& s : summands_of(*side)) {
        if (!s.is_zero()) row.flip(col_of(s));
      }
    }
    if (!row.none()) rows.push_back(std::move(row));
  }

  // Reduced row echelon form, pivot on the last variable column of each row.
  std::vector<std::optional<std::size_t>> pivot_row_of(nv);
  std::vector<std::size_t> pivots;
  std::size_t next = 0;
  for (std::size_t c = nv; c-- > 0;) {
    std::size_t sel = next;
    while (sel < rows.size() && !rows[sel].get(c)) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[next], rows[sel]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != next && rows[r].get(c)) rows[r] ^= rows[next];
    }
    pivot_row_of[c] = next;
    pivots.push_back(c);
    ++next;
  }
  for (std::size_t r = next; r < rows.size(); ++r) {
    if (!rows[r].none()) return UnifierSet{};
  }
  Substitution s;
  for (std::size_t c : pivots) {
    const auto& row = rows[*pivot_row_of[c]];
    std::vector<Term> parts;
    for (std::size_t k = 0; k < width; ++k) {
      if (k == c || !row.get(k)) continue;
      parts.push_back(k < nv ? vars[k] : consts[k - nv]);
    }
    s.bind(vars[c], xor_of(std::move(parts)));
  }
  return UnifierSet{{s}, UnifyFailure::None};
}

inline UnifierSet unify_acun(const UnificationProblem& p) { return unify_acun(p, {}); }

}  // namespace xorproto
