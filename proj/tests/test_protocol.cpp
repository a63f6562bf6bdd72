#include <gtest/gtest.h>

#include "xorproto/dsl.hpp"
#include "xorproto/protocol.hpp"

using namespace xorproto;

namespace {

Protocol load(const std::string& name) { return load_protocol(std::string(XORPROTO_PROTOCOL_DIR) + "/" + name); }

}  // namespace

TEST(Instantiate, TwoStrandsPerRole) {
  auto p = load("nsl_xor.prot");
  auto sb = instantiate(p, default_plan(p, 2));
  ASSERT_EQ(sb.strands.size(), 4u);
  EXPECT_EQ(sb.strands[0].role, "A");
  EXPECT_EQ(sb.strands[1].role, "A");
  EXPECT_EQ(sb.strands[2].role, "B");
  EXPECT_EQ(sb.strands[3].role, "B");
  EXPECT_EQ(sb.fresh.size(), 4u);
  // B strands talk to a and b only, so their nonces are secrets.
  EXPECT_EQ(sb.secrets.size(), 2u);
  // Interchangeable strands share a class.
  EXPECT_EQ(sb.strands[0].plan_class, sb.strands[1].plan_class);
  EXPECT_NE(sb.strands[0].plan_class, sb.strands[2].plan_class);
}

TEST(Instantiate, EmptyPlan) {
  auto p = load("nsl_xor.prot");
  auto sb = instantiate(p, {});
  EXPECT_TRUE(sb.strands.empty());
  EXPECT_TRUE(sb.iik.count(attacker()));
  EXPECT_TRUE(sb.iik.count(zero()));
  EXPECT_TRUE(sb.iik.count(pk(attacker())));
  EXPECT_TRUE(sb.iik.count(make_const("1", sorts::kTag)));
}

TEST(Instantiate, FullyBoundStrand) {
  auto p = load("nsl_xor.prot");
  auto plan = parse_session_plan(p, "A{A=a,B=b}");
  auto sb = instantiate(p, plan);
  ASSERT_EQ(sb.strands.size(), 1u);
  const auto& s = sb.strands[0];
  for (const auto& n : s.nodes) {
    for (const auto& v : vars_of(n.term)) EXPECT_EQ(v.name().rfind("NB", 0), 0u) << v;
  }
  EXPECT_TRUE(sb.secrets.count(make_const("na_1", sorts::kNonce)));
  EXPECT_TRUE(sb.iik.count(pk(make_const("a", sorts::kAgent))));
  EXPECT_TRUE(sb.iik.count(make_const("b", sorts::kAgent)));
}

TEST(Instantiate, OriginRoundTrip) {
  auto p = load("nsl_xor.prot");
  auto sb = instantiate(p, default_plan(p, 2));
  for (const auto& s : sb.strands) {
    auto role = *p.role(s.role);
    ASSERT_EQ(role.nodes.size(), s.nodes.size());
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
      EXPECT_EQ(s.sigma.apply(role.nodes[i].term), s.nodes[i].term);
      EXPECT_EQ(type_of(role.nodes[i].term), type_of(s.nodes[i].term));
    }
  }
}

TEST(Instantiate, RejectsIllTyped) {
  auto p = load("nsl_xor.prot");
  SessionPlan plan{{"A", Substitution{{make_var("B", sorts::kAgent), make_const("n", sorts::kNonce)}}}};
  EXPECT_THROW(instantiate(p, plan), IllTypedInstantiation);
}

TEST(Instantiate, RejectsFreshReuse) {
  auto p = load("nsl_xor.prot");
  Term na = make_const("n", sorts::kNonce);
  Term NA = make_var("NA", sorts::kNonce);
  SessionPlan plan{{"A", Substitution{{NA, na}}}, {"A", Substitution{{NA, na}}}};
  EXPECT_THROW(instantiate(p, plan), FreshReuse);
}

TEST(Merge, FreshPoolsMustBeDisjoint) {
  auto p = load("nsl_xor.prot");
  auto s1 = instantiate(p, default_plan(p));
  EXPECT_THROW(merge(s1, s1), FreshReuse);
  InstantiateOptions o;
  o.first_index = 2;
  auto s2 = instantiate(p, default_plan(p), o);
  auto m = merge(s1, s2);
  EXPECT_EQ(m.strands.size(), 4u);
  EXPECT_EQ(m.fresh.size(), 4u);
}

TEST(Assumptions, SharedKeySentInClear) {
  auto rep = check_assumptions(load("shared_key_p2.prot"));
  EXPECT_FALSE(rep.a2);
  ASSERT_FALSE(rep.findings.empty());
  EXPECT_EQ(rep.findings[0].witness, sh(make_var("A", sorts::kAgent), make_var("S", sorts::kAgent)));
}

TEST(Assumptions, NslPasses) {
  for (const char* f : {"nsl_xor.prot", "nsl_xor_tagged.prot", "nsl_xor_named.prot", "shared_key_p1.prot"}) {
    auto rep = check_assumptions(load(f));
    EXPECT_TRUE(rep.a2) << f;
    EXPECT_TRUE(rep.a3) << f;
  }
}

TEST(Assumptions, KeyVariableSentInClear) {
  auto p = parse_protocol(R"(var A, B : Agent; var K : Key; var M : Text;
1. A -> B : K
2. A -> B : senc(M, K)
)");
  auto rep = check_assumptions(p);
  EXPECT_FALSE(rep.a3);
  EXPECT_TRUE(rep.a2);
}

TEST(Assumptions, TaggedKeyVariableIsFine) {
  auto p = parse_protocol(R"(var A, B : Agent; var K : Key; var M : Text; const 6 : Tag;
1. A -> B : penc(M, [6, K])
)");
  EXPECT_TRUE(check_assumptions(p).a3);
}

TEST(SessionPlan, ParseAndPrint) {
  auto p = load("nsl_xor.prot");
  auto plan = parse_session_plan(p, "A{A=a} B{A=a,B=b}");
  EXPECT_EQ(to_string(plan), "A{A=a} B{A=a,B=b}");
  EXPECT_EQ(to_string(default_plan(p)), to_string(plan));
  EXPECT_EQ(parse_session_plan(p, "2").size(), 4u);
  EXPECT_THROW(parse_session_plan(p, "C{A=a}"), std::invalid_argument);
}
