#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "xorproto/protocol.hpp"
#include "xorproto/term.hpp"
#include "xorproto/term_algebra.hpp"
#include "xorproto/unify_elementary.hpp"

namespace xorproto {

struct NutWitness {
  std::string condition;
  Term first;   // renamed-apart copy
  Term second;  // renamed-apart copy
  Substitution unifier;

  std::string to_string() const {
    std::string out = condition + ": " + first.to_string() + " ~ " + second.to_string();
    if (!unifier.empty()) out += " via " + unifier.to_string();
    return out;
  }
};

struct NutReport {
  /// Condition name to pass/fail, in check order.
  std::vector<std::pair<std::string, bool>> conditions;
  std::vector<NutWitness> witnesses;

  bool ok() const {
    for (const auto& [_, pass] : conditions) {
      if (!pass) return false;
    }
    return true;
  }
  bool passed(const std::string& condition) const {
    for (const auto& [c, pass] : conditions) {
      if (c == condition) return pass;
    }
    return false;
  }
};

namespace detail {

constexpr std::size_t kMaxWitnessesPerCondition = 16;

/// Unifies variable-disjoint copies of `a` and `b`.
inline std::optional<NutWitness> renamed_unifier(const std::string& condition, const Term& a, const Term& b) {
  Term ra = renaming(vars_of(a), "'1").apply(a);
  Term rb = renaming(vars_of(b), "'2").apply(b);
  auto us = unify_std(ra, rb);
  if (us.empty()) return std::nullopt;
  return NutWitness{condition, ra, rb, us.unifiers.front()};
}

inline void record(NutReport& rep, std::size_t& count, std::optional<NutWitness> w) {
  if (!w) return;
  if (count++ < kMaxWitnessesPerCondition) rep.witnesses.push_back(std::move(*w));
}

}  // namespace detail

/// Conditions: (a) encrypted subterms do not unify with other non-variable
/// subterms, (b) no asymmetric key is a variable, (c) distinct summands of
/// one XOR do not unify.
inline NutReport check_nut(const Protocol& p) {
  NutReport rep;
  auto ts = p.terms();
  auto subs = subterms(ts);
  auto enc = encrypted_subterms(ts);

  std::size_t na = 0;
  for (const auto& t1 : enc) {
    for (const auto& t2 : subs) {
      if (t2.is_var() || t1 == t2) continue;
      detail::record(rep, na, detail::renamed_unifier("a", t1, t2));
    }
  }
  rep.conditions.push_back({"a", na == 0});

  std::size_t nb = 0;
  for (const auto& t : enc) {
    if (t.kind() == Kind::PEnc && t.arg(1).is_var()) {
      if (nb++ < detail::kMaxWitnessesPerCondition) rep.witnesses.push_back({"b", t, t.arg(1), {}});
    }
  }
  rep.conditions.push_back({"b", nb == 0});

  std::size_t nc = 0;
  for (const auto& x : xor_subterms(ts)) {
    for (std::size_t i = 0; i < x.arity(); ++i) {
      for (std::size_t j = i + 1; j < x.arity(); ++j) {
        detail::record(rep, nc, detail::renamed_unifier("c", x.arg(i), x.arg(j)));
      }
    }
  }
  rep.conditions.push_back({"c", nc == 0});
  return rep;
}

/// Conditions: (1) no encrypted subterm of one protocol unifies with one of
/// the other, (2) no XOR summand of one unifies with an XOR summand of the
/// other.
inline NutReport check_munut(const Protocol& p1, const Protocol& p2) {
  NutReport rep;
  auto t1s = p1.terms();
  auto t2s = p2.terms();
  std::size_t n1 = 0;
  for (const auto& a : encrypted_subterms(t1s)) {
    for (const auto& b : encrypted_subterms(t2s)) {
      detail::record(rep, n1, detail::renamed_unifier("1", a, b));
    }
  }
  rep.conditions.push_back({"1", n1 == 0});

  auto summands = [](const std::vector<Term>& ts) {
    std::set<Term> out;
    for (const auto& x : xor_subterms(ts)) {
      for (const auto& s : x.args()) {
        if (!s.is_xor()) out.insert(s);
      }
    }
    return out;
  };
  std::size_t n2 = 0;
  auto s1 = summands(t1s);
  auto s2 = summands(t2s);
  for (const auto& a : s1) {
    for (const auto& b : s2) {
      detail::record(rep, n2, detail::renamed_unifier("2", a, b));
    }
  }
  rep.conditions.push_back({"2", n2 == 0});
  return rep;
}

enum class TagScheme { ComponentNumbers, ProtocolName };

namespace detail {

class Tagger {
 public:
  Tagger(const Protocol& p, TagScheme scheme) : scheme_(scheme) {
    if (scheme == TagScheme::ProtocolName) name_tag_ = make_const(p.name, sorts::kTag);
    for (const auto& t : p.tag_constants()) used_.insert(t.name());
    // Existing leading tags that already tell encryptions apart are kept.
    std::map<Term, int> lead_count;
    auto enc = encrypted_subterms(p.terms());
    for (const auto& e : enc) {
      if (auto lead = leading_tag(e)) ++lead_count[*lead];
    }
    for (const auto& e : enc) {
      auto lead = leading_tag(e);
      if (lead && lead_count[*lead] == 1 && scheme == TagScheme::ComponentNumbers) keep_.insert(e);
    }
  }

  Term tag_bodies(const Term& t) {
    if (t.is_atom()) return t;
    auto it = memo_enc_.find(t);
    if (it != memo_enc_.end()) return it->second;
    std::vector<Term> args;
    for (const auto& a : t.args()) args.push_back(tag_bodies(a));
    Term out;
    if (is_encryption_like(t) && !keep_.count(t)) {
      args[0] = prefixed(args[0]);
      out = rebuild(t, std::move(args));
    } else {
      out = rebuild(t, std::move(args));
    }
    memo_enc_.emplace(t, out);
    return out;
  }

  Term tag_summands(const Term& t) {
    if (t.is_atom()) return t;
    std::vector<Term> args;
    for (const auto& a : t.args()) args.push_back(tag_summands(a));
    if (t.is_xor()) {
      for (auto& s : args) {
        auto it = memo_sum_.find(s);
        if (it == memo_sum_.end()) it = memo_sum_.emplace(s, wrap(s)).first;
        s = it->second;
      }
    }
    return rebuild(t, std::move(args));
  }

  Term tag_keys(const Term& t) {
    if (t.is_atom()) return t;
    std::vector<Term> args;
    for (const auto& a : t.args()) args.push_back(tag_keys(a));
    if (t.kind() == Kind::PEnc && args[1].is_var()) {
      auto it = memo_key_.find(args[1]);
      if (it == memo_key_.end()) it = memo_key_.emplace(args[1], wrap(args[1])).first;
      args[1] = it->second;
    }
    return rebuild(t, std::move(args));
  }

  std::vector<Term> new_tags() const { return new_tags_; }

 private:
  static std::optional<Term> leading_tag(const Term& enc) {
    const Term& body = enc.arg(0);
    if (body.kind() == Kind::Sequence && body.arity() > 0 && body.arg(0).is_const() &&
        body.arg(0).declared_type() == TypeExpr::sort(sorts::kTag)) {
      return body.arg(0);
    }
    return std::nullopt;
  }

  Term next_number() {
    while (used_.count(std::to_string(counter_))) ++counter_;
    Term c = make_const(std::to_string(counter_++), sorts::kTag);
    used_.insert(c.name());
    new_tags_.push_back(c);
    return c;
  }

  std::vector<Term> header() {
    std::vector<Term> h;
    if (name_tag_.valid()) h.push_back(name_tag_);
    h.push_back(next_number());
    return h;
  }

  Term prefixed(const Term& body) {
    auto h = header();
    if (body.kind() == Kind::Sequence) {
      h.insert(h.end(), body.args().begin(), body.args().end());
    } else {
      h.push_back(body);
    }
    return seq(std::move(h));
  }

  Term wrap(const Term& t) {
    auto h = header();
    h.push_back(t);
    return seq(std::move(h));
  }

  TagScheme scheme_;
  Term name_tag_;
  int counter_ = 1;
  std::set<std::string> used_;
  std::set<Term> keep_;
  std::map<Term, Term> memo_enc_;
  std::map<Term, Term> memo_sum_;
  std::map<Term, Term> memo_key_;
  std::vector<Term> new_tags_;
};

inline bool name_tagged(const Protocol& p) {
  Term name = make_const(p.name, sorts::kTag);
  for (const auto& e : encrypted_subterms(p.terms())) {
    const Term& body = e.arg(0);
    if (body.kind() != Kind::Sequence || body.arity() == 0 || !(body.arg(0) == name)) return false;
  }
  return true;
}

}  // namespace detail

/// Inserts tags so that the result satisfies NUT: a distinct tag at the
/// front of every encryption, hash and signature body, a distinct tag
/// paired with every XOR summand, and a tag paired with every variable
/// asymmetric key. The protocol-name scheme puts the protocol name in front
/// of each number. A protocol that already passes is returned unchanged.
inline Protocol insert_tags(const Protocol& p, TagScheme scheme = TagScheme::ComponentNumbers) {
  if (check_nut(p).ok() && (scheme == TagScheme::ComponentNumbers || detail::name_tagged(p))) return p;
  detail::Tagger tagger(p, scheme);
  Protocol out = p;
  for (auto& m : out.messages) m.term = tagger.tag_bodies(m.term);
  for (auto& m : out.messages) m.term = tagger.tag_summands(m.term);
  for (auto& m : out.messages) m.term = tagger.tag_keys(m.term);
  std::set<std::string> declared;
  for (const auto& c : out.constants) declared.insert(c.name());
  auto add_const = [&](const Term& c) {
    if (declared.insert(c.name()).second) out.constants.push_back(c);
  };
  if (scheme == TagScheme::ProtocolName) add_const(make_const(p.name, sorts::kTag));
  for (const auto& c : tagger.new_tags()) add_const(c);
  return out;
}

}  // namespace xorproto
