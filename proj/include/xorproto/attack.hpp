#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xorproto/constraints.hpp"
#include "xorproto/protocol.hpp"
#include "xorproto/term_algebra.hpp"

namespace xorproto {

struct NodeRef {
  std::size_t strand;
  std::size_t node;
  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

/// A constraint sequence together with the node order it came from.
struct GeneratedSequence {
  std::vector<NodeRef> interleaving;  // every included node, sends included
  ConstraintSequence cs;
  std::vector<Term> sent;  // all sent terms in the interleaving, in order
  std::vector<std::size_t> kept;  // receive nodes kept per strand
};

struct SequenceOptions {
  bool prefixes = true;  // also generate sequences that stop strands early
  bool symmetry = true;  // skip interleavings equal up to swapping interchangeable strands
};

namespace detail {

// Nodes of a strand grouped as: leading sends, then one block per receive
// holding the receive and the sends right after it.
struct StrandBlocks {
  std::vector<std::size_t> lead;
  std::vector<std::vector<std::size_t>> blocks;
};

inline StrandBlocks blocks_of(const Strand& s) {
  StrandBlocks b;
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    if (s.nodes[i].is_send()) {
      (b.blocks.empty() ? b.lead : b.blocks.back()).push_back(i);
    } else {
      b.blocks.push_back({i});
    }
  }
  return b;
}

}  // namespace detail

/// Calls `fn` for every constraint sequence of `sb`: one per merge of the
/// strands' receive nodes (and per choice of strand prefixes). A send is
/// placed right after the receive that precedes it in its strand, which
/// only enlarges the term sets of later receives.
inline void for_each_sequence(const SemiBundle& sb, const SequenceOptions& opt,
                              const std::function<bool(const GeneratedSequence&)>& fn) {
  const std::size_t n = sb.strands.size();
  std::vector<detail::StrandBlocks> blocks;
  for (const auto& s : sb.strands) blocks.push_back(detail::blocks_of(s));
  std::vector<std::size_t> kept(n, 0);
  std::vector<std::size_t> limit(n);
  for (std::size_t i = 0; i < n; ++i) limit[i] = blocks[i].blocks.size();

  auto interchangeable = [&](std::size_t i, std::size_t j) {
    return opt.symmetry && sb.strands[i].plan_class == sb.strands[j].plan_class &&
           sb.strands[i].protocol == sb.strands[j].protocol;
  };

  bool stop = false;
  std::function<void(std::size_t)> choose_prefix;
  std::function<void(std::vector<std::size_t>&, std::vector<std::size_t>&)> merge;

  merge = [&](std::vector<std::size_t>& pos, std::vector<std::size_t>& order) {
    if (stop) return;
    bool done = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (pos[i] < kept[i]) done = false;
    }
    if (done) {
      GeneratedSequence g;
      g.kept = kept;
      std::vector<Term> known(sb.iik.begin(), sb.iik.end());
      auto emit_send = [&](std::size_t s, std::size_t k) {
        g.interleaving.push_back({s, k});
        g.sent.push_back(sb.strands[s].nodes[k].term);
        known.push_back(sb.strands[s].nodes[k].term);
      };
      for (std::size_t s = 0; s < n; ++s) {
        for (auto k : blocks[s].lead) emit_send(s, k);
      }
      std::vector<std::size_t> next(n, 0);
      for (auto s : order) {
        const auto& blk = blocks[s].blocks[next[s]++];
        g.interleaving.push_back({s, blk.front()});
        g.cs.constraints.emplace_back(sb.strands[s].nodes[blk.front()].term, known);
        for (std::size_t k = 1; k < blk.size(); ++k) emit_send(s, blk[k]);
      }
      if (!fn(g)) stop = true;
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (pos[i] >= kept[i]) continue;
      // Interchangeable strands start in index order.
      if (pos[i] == 0) {
        bool blocked = false;
        for (std::size_t j = 0; j < i; ++j) {
          if (interchangeable(j, i) && kept[j] == kept[i] && pos[j] == 0) blocked = true;
        }
        if (blocked) continue;
      }
      ++pos[i];
      order.push_back(i);
      merge(pos, order);
      order.pop_back();
      --pos[i];
      if (stop) return;
    }
  };

  choose_prefix = [&](std::size_t i) {
    if (stop) return;
    if (i == n) {
      std::vector<std::size_t> pos(n, 0);
      std::vector<std::size_t> order;
      merge(pos, order);
      return;
    }
    std::size_t lo = opt.prefixes ? 0 : limit[i];
    for (std::size_t k = limit[i] + 1; k-- > lo;) {
      bool ok = true;
      for (std::size_t j = 0; j < i; ++j) {
        if (interchangeable(j, i) && kept[j] < k) ok = false;
      }
      if (!ok) continue;
      kept[i] = k;
      choose_prefix(i + 1);
      if (stop) return;
    }
  };
  choose_prefix(0);
}

inline std::vector<GeneratedSequence> sequences_from(const SemiBundle& sb, const SequenceOptions& opt = {}) {
  std::vector<GeneratedSequence> out;
  for_each_sequence(sb, opt, [&](const GeneratedSequence& g) {
    out.push_back(g);
    return true;
  });
  return out;
}

enum class Verdict { Holds, Violated, Indeterminate };
enum class AttackKind { Secrecy, TypeFlaw, MultiProtocol };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Violated: return "violated";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "?";
}

inline const char* attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::Secrecy: return "secrecy";
    case AttackKind::TypeFlaw: return "typeFlaw";
    case AttackKind::MultiProtocol: return "multiProtocol";
  }
  return "?";
}

struct AttackWitness {
  GeneratedSequence sequence;
  ConstraintSequence solved;  // the sequence handed to the solver
  std::optional<Term> secret;
  std::vector<Substitution> solutions;
  std::vector<Substitution> well_typed;
  std::vector<std::vector<SolveStep>> paths;
  bool type_flaw = false;  // solvable, and only by ill-typed substitutions
};

struct AttackReport {
  AttackKind kind = AttackKind::Secrecy;
  Verdict verdict = Verdict::Holds;
  std::optional<AttackWitness> witness;
  SemiBundle bundle;
  std::size_t sequences = 0;
  std::size_t solver_nodes = 0;
  bool truncated = false;
  double seconds = 0;
  std::vector<std::string> notes;
};

struct AttackOptions {
  SolveOptions solve;
  SequenceOptions sequences;
  bool exhaustive = false;  // keep searching after the first violation
};

namespace detail {

inline ConstraintSequence with_secret(const GeneratedSequence& g, const SemiBundle& sb, const Term& sec) {
  ConstraintSequence cs = g.cs;
  std::vector<Term> ts;
  if (cs.constraints.empty()) {
    ts.assign(sb.iik.begin(), sb.iik.end());
    ts.insert(ts.end(), g.sent.begin(), g.sent.end());
  } else {
    ts = cs.constraints.back().terms;
  }
  cs.constraints.emplace_back(sec, std::move(ts));
  return cs;
}

inline bool mentions(const std::vector<Term>& ts, const Term& c) {
  for (const auto& t : ts) {
    if (subterms(t).count(c)) return true;
  }
  return false;
}

inline std::vector<Substitution> well_typed_of(const std::vector<Substitution>& sols) {
  std::vector<Substitution> out;
  for (const auto& s : sols) {
    if (is_well_typed(s)) out.push_back(s);
  }
  return out;
}

inline AttackWitness make_witness(const GeneratedSequence& g, const ConstraintSequence& cs, std::optional<Term> sec,
                                  const SolveResult& r) {
  AttackWitness w;
  w.sequence = g;
  w.solved = cs;
  w.secret = std::move(sec);
  w.solutions = r.solutions;
  w.paths = r.paths;
  w.well_typed = well_typed_of(r.solutions);
  w.type_flaw = !w.solutions.empty() && w.well_typed.empty() && !r.truncated;
  return w;
}

}  // namespace detail

/// Secrecy: some sequence extended by `sec : T` (T the term set of its last
/// constraint) is satisfiable for a secret constant `sec` of the bundle.
inline AttackReport check_secrecy_bundle(const SemiBundle& sb, const std::set<Term>& secrets,
                                         const AttackOptions& opt = {}) {
  auto start = std::chrono::steady_clock::now();
  AttackReport rep;
  rep.kind = AttackKind::Secrecy;
  rep.bundle = sb;
  Solver solver(opt.solve);
  for_each_sequence(sb, opt.sequences, [&](const GeneratedSequence& g) {
    ++rep.sequences;
    for (const auto& sec : secrets) {
      if (!detail::mentions(g.sent, sec)) continue;
      auto cs = detail::with_secret(g, sb, sec);
      SolveOptions so = opt.solve;
      so.first_only = true;
      Solver first(so);
      auto r = first.solve(cs);
      rep.solver_nodes += r.nodes;
      if (r.truncated && !r.satisfiable()) rep.truncated = true;
      if (r.satisfiable()) {
        // The report carries the full solution set of the violating sequence.
        auto full = solver.solve(cs);
        rep.solver_nodes += full.nodes;
        auto w = detail::make_witness(g, cs, sec, full.satisfiable() ? full : r);
        if (!rep.witness || (w.type_flaw && !rep.witness->type_flaw)) rep.witness = std::move(w);
        rep.verdict = Verdict::Violated;
        if (!opt.exhaustive) return false;
      }
    }
    return true;
  });
  if (rep.verdict != Verdict::Violated && rep.truncated) rep.verdict = Verdict::Indeterminate;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

inline AttackReport check_secrecy(const Protocol& p, const SessionPlan& plan, const AttackOptions& opt = {}) {
  auto sb = instantiate(p, plan);
  return check_secrecy_bundle(sb, sb.secrets, opt);
}

/// Type flaw: some sequence (plain or extended by a secrecy constraint) has
/// a nonempty, complete solution set without a well-typed member.
inline AttackReport check_type_flaw_bundle(const SemiBundle& sb, const AttackOptions& opt = {}) {
  auto start = std::chrono::steady_clock::now();
  AttackReport rep;
  rep.kind = AttackKind::TypeFlaw;
  rep.bundle = sb;
  Solver solver(opt.solve);
  bool undecided = false;
  for_each_sequence(sb, opt.sequences, [&](const GeneratedSequence& g) {
    ++rep.sequences;
    std::vector<std::pair<ConstraintSequence, std::optional<Term>>> candidates;
    candidates.push_back({g.cs, std::nullopt});
    for (const auto& sec : sb.secrets) {
      if (detail::mentions(g.sent, sec)) candidates.push_back({detail::with_secret(g, sb, sec), sec});
    }
    for (auto& [cs, sec] : candidates) {
      if (cs.constraints.empty()) continue;
      auto r = solver.solve(cs);
      rep.solver_nodes += r.nodes;
      auto wt = detail::well_typed_of(r.solutions);
      if (!wt.empty()) continue;  // a well-typed execution exists
      if (r.truncated) {
        undecided = true;
        rep.truncated = true;
        continue;
      }
      if (r.satisfiable()) {
        rep.verdict = Verdict::Violated;
        rep.witness = detail::make_witness(g, cs, sec, r);
        if (!opt.exhaustive) return false;
      }
    }
    return true;
  });
  if (rep.verdict != Verdict::Violated && undecided) rep.verdict = Verdict::Indeterminate;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

inline AttackReport check_type_flaw(const Protocol& p, const SessionPlan& plan, const AttackOptions& opt = {}) {
  return check_type_flaw_bundle(instantiate(p, plan), opt);
}

struct MultiProtocolReport {
  AttackReport combined;
  AttackReport isolated;
  Verdict verdict = Verdict::Holds;  // Violated means a multi-protocol attack
};

/// Runs P1's secrecy check on the union of a P1 bundle and a P2 bundle and
/// on the P1 bundle alone.
inline MultiProtocolReport check_multi_protocol(const Protocol& p1, const SessionPlan& plan1, const Protocol& p2,
                                                const SessionPlan& plan2, const AttackOptions& opt = {}) {
  MultiProtocolReport out;
  auto s1 = instantiate(p1, plan1);
  InstantiateOptions o2;
  o2.first_index = plan1.size();
  auto s2 = instantiate(p2, plan2, o2);
  auto comb = merge(s1, s2);
  out.isolated = check_secrecy_bundle(s1, s1.secrets, opt);
  out.combined = check_secrecy_bundle(comb, s1.secrets, opt);
  out.combined.kind = AttackKind::MultiProtocol;
  if (out.combined.verdict == Verdict::Violated) {
    // A leak that P1 shows on its own is not caused by the composition.
    out.verdict = out.isolated.verdict == Verdict::Holds       ? Verdict::Violated
                  : out.isolated.verdict == Verdict::Violated ? Verdict::Holds
                                                               : Verdict::Indeterminate;
  } else {
    out.verdict = out.combined.verdict;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace rendering.

inline std::string strand_label(std::size_t i) {
  static const char* greek[] = {"α", "β", "γ", "δ", "ε", "ζ", "η", "θ"};
  if (i < 8) return greek[i];
  return "s" + std::to_string(i + 1);
}

/// Renders the interleaving of `w` under `sigma` as `Msg α.n.` lines, with
/// the attacker written `i` and `i(x)` for the attacker posing as x.
inline std::vector<std::string> render_trace(const SemiBundle& sb, const AttackWitness& w, const Substitution& sigma) {
  std::map<Term, Term> display{{attacker(), make_const("i", sorts::kAgent)}};
  auto show = [&](const Term& t) { return unfreeze(sigma.apply(t), display).to_string(); };
  auto role_agent = [&](const Strand& s, const std::string& role) -> Term {
    auto v = make_var(role, sorts::kAgent);
    if (auto b = s.sigma.lookup(v)) return sigma.apply(*b);
    return make_const(role, sorts::kAgent);
  };
  auto party = [&](const Term& agent, bool spoofed) {
    std::string name = unfreeze(agent, display).to_string();
    if (agent == attacker()) return std::string("i");
    return spoofed ? "i(" + name + ")" : name;
  };
  std::vector<std::string> out;
  for (const auto& ref : w.sequence.interleaving) {
    const Strand& s = sb.strands.at(ref.strand);
    const Node& n = s.nodes.at(ref.node);
    Term self = role_agent(s, s.role);
    Term other = role_agent(s, n.peer);
    std::string line = "Msg " + strand_label(ref.strand) + "." + std::to_string(n.message) + ". ";
    if (n.is_send()) {
      line += party(self, false) + " -> " + party(other, true) + " : " + show(n.term);
    } else {
      line += party(other, true) + " -> " + party(self, false) + " : " + show(n.term);
    }
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace xorproto
