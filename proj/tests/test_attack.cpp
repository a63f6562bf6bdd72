#include <gtest/gtest.h>

#include "oracles.hpp"
#include "xorproto/attack.hpp"
#include "xorproto/dsl.hpp"

using namespace xorproto;

namespace {

Protocol load(const std::string& name) { return load_protocol(std::string(XORPROTO_PROTOCOL_DIR) + "/" + name); }

Term nonce(const std::string& n) { return make_const(n, sorts::kNonce); }
Term agent(const std::string& n) { return make_const(n, sorts::kAgent); }

// The known attack unifier under the strand renaming: the initiator is strand 1
// and the responder strand 2.
bool is_attack_unifier(const Substitution& s) {
  return s.apply(make_var("NA_2", sorts::kNonce)) == xor_of({nonce("na_1"), agent("b"), attacker()}) &&
         s.apply(make_var("B_1", sorts::kAgent)) == attacker() &&
         s.apply(make_var("NB_1", sorts::kNonce)) == nonce("nb_2");
}

void expect_all_derivable(const AttackWitness& w) {
  for (const auto& s : w.solutions) {
    std::string why;
    EXPECT_TRUE(oracle::solution_derivable(w.solved, s, &why)) << s << ": " << why;
  }
}

}  // namespace

TEST(Secrecy, UntaggedNslLeaksResponderNonce) {
  auto p = load("nsl_xor.prot");
  auto rep = check_secrecy(p, default_plan(p));
  ASSERT_EQ(rep.verdict, Verdict::Violated);
  ASSERT_TRUE(rep.witness);
  EXPECT_EQ(*rep.witness->secret, nonce("nb_2"));
  bool found = false;
  for (const auto& s : rep.witness->solutions) found = found || is_attack_unifier(s);
  EXPECT_TRUE(found);
  expect_all_derivable(*rep.witness);
}

TEST(Secrecy, TraceShowsSpoofedInitiator) {
  auto p = load("nsl_xor.prot");
  auto rep = check_secrecy(p, default_plan(p));
  ASSERT_TRUE(rep.witness);
  const Substitution* sigma = nullptr;
  for (const auto& s : rep.witness->solutions) {
    if (is_attack_unifier(s)) sigma = &s;
  }
  ASSERT_NE(sigma, nullptr);
  auto lines = render_trace(rep.bundle, *rep.witness, *sigma);
  ASSERT_FALSE(lines.empty());
  bool spoof = false, to_attacker = false;
  for (const auto& l : lines) {
    EXPECT_EQ(l.rfind("Msg ", 0), 0u) << l;
    spoof = spoof || l.find("i(a) -> b") != std::string::npos;
    to_attacker = to_attacker || l.find("a -> i :") != std::string::npos;
  }
  EXPECT_TRUE(spoof);
  EXPECT_TRUE(to_attacker);
}

TEST(Secrecy, WitnessReplays) {
  auto p = load("nsl_xor.prot");
  auto rep = check_secrecy(p, default_plan(p));
  ASSERT_TRUE(rep.witness);
  auto again = solve(rep.witness->solved);
  EXPECT_EQ(again.solutions, rep.witness->solutions);
}

TEST(Secrecy, TaggedNslHolds) {
  for (const char* f : {"nsl_xor_tagged.prot", "nsl_xor_named.prot"}) {
    auto p = load(f);
    auto rep = check_secrecy(p, default_plan(p));
    EXPECT_EQ(rep.verdict, Verdict::Holds) << f;
    EXPECT_FALSE(rep.truncated) << f;
    EXPECT_GT(rep.sequences, 0u) << f;
  }
}

TEST(Secrecy, NothingToCheck) {
  auto p = parse_protocol("protocol empty; var A, B : Agent;");
  auto rep = check_secrecy(p, default_plan(p));
  EXPECT_EQ(rep.verdict, Verdict::Holds);
  EXPECT_FALSE(rep.witness);
}

TEST(Secrecy, TruncationIsIndeterminate) {
  auto p = load("nsl_xor_tagged.prot");
  AttackOptions o;
  o.solve.max_nodes = 1;
  auto rep = check_secrecy(p, default_plan(p), o);
  EXPECT_EQ(rep.verdict, Verdict::Indeterminate);
  EXPECT_TRUE(rep.truncated);
}

TEST(TypeFlaw, UntaggedNsl) {
  auto p = load("nsl_xor.prot");
  auto rep = check_type_flaw(p, default_plan(p));
  ASSERT_EQ(rep.verdict, Verdict::Violated);
  ASSERT_TRUE(rep.witness);
  EXPECT_TRUE(rep.witness->type_flaw);
  EXPECT_TRUE(rep.witness->well_typed.empty());
  EXPECT_FALSE(rep.witness->solutions.empty());
  for (const auto& s : rep.witness->solutions) EXPECT_FALSE(is_well_typed(s)) << s;
  expect_all_derivable(*rep.witness);
}

TEST(TypeFlaw, TaggedNslHasNone) {
  auto p = load("nsl_xor_tagged.prot");
  auto rep = check_type_flaw(p, default_plan(p));
  EXPECT_EQ(rep.verdict, Verdict::Holds);
  EXPECT_FALSE(rep.truncated);
}

TEST(MultiProtocol, SharedKeyLeakedByOtherProtocol) {
  auto p1 = load("shared_key_p1.prot");
  auto p2 = load("shared_key_p2.prot");
  auto r = check_multi_protocol(p1, parse_session_plan(p1, "A{A=a,S=s}"), p2, parse_session_plan(p2, "A{A=a,S=s}"));
  EXPECT_EQ(r.isolated.verdict, Verdict::Holds);
  EXPECT_EQ(r.combined.verdict, Verdict::Violated);
  EXPECT_EQ(r.verdict, Verdict::Violated);
  ASSERT_TRUE(r.combined.witness);
  EXPECT_EQ(*r.combined.witness->secret, nonce("na_1"));
  expect_all_derivable(*r.combined.witness);
}

TEST(MultiProtocol, DistinctlyNamedProtocolsCompose) {
  auto p1 = load("nsl_xor_named.prot");
  auto p2 = load("xor_kex_named.prot");
  auto r = check_multi_protocol(p1, default_plan(p1), p2, default_plan(p2));
  EXPECT_EQ(r.verdict, Verdict::Holds);
  EXPECT_FALSE(r.combined.truncated);
}

TEST(MultiProtocol, SilentSecondProtocolChangesNothing) {
  auto p1 = load("nsl_xor.prot");
  auto p2 = parse_protocol("protocol quiet; var A, B : Agent;");
  auto r = check_multi_protocol(p1, default_plan(p1), p2, default_plan(p2));
  EXPECT_EQ(r.combined.verdict, r.isolated.verdict);
  // P1 leaks on its own, so the composition is not to blame.
  EXPECT_EQ(r.isolated.verdict, Verdict::Violated);
  EXPECT_EQ(r.verdict, Verdict::Holds);
}

TEST(Sequences, RespectStrandOrder) {
  auto p = load("nsl_xor.prot");
  auto sb = instantiate(p, default_plan(p, 2));
  auto seqs = sequences_from(sb);
  ASSERT_FALSE(seqs.empty());
  for (const auto& g : seqs) {
    std::map<std::size_t, std::size_t> next;
    for (const auto& ref : g.interleaving) {
      EXPECT_EQ(ref.node, next[ref.strand]);
      next[ref.strand] = ref.node + 1;
    }
    // Term sets only grow.
    for (std::size_t i = 1; i < g.cs.constraints.size(); ++i) {
      const auto& prev = g.cs.constraints[i - 1].terms;
      const auto& cur = g.cs.constraints[i].terms;
      EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    }
  }
  SequenceOptions all;
  all.symmetry = false;
  EXPECT_GT(sequences_from(sb, all).size(), seqs.size());
}
