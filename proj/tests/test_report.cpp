#include <gtest/gtest.h>

#include "xorproto/report.hpp"

using namespace xorproto;
using report::Json;

namespace {

Protocol load(const std::string& name) { return load_protocol(std::string(XORPROTO_PROTOCOL_DIR) + "/" + name); }

}  // namespace

TEST(Report, UnifyJsonFields) {
  auto p = parse_equations("NA xor b = na xor eps");
  auto j = report::unify_json(p, unify_sua(p));
  EXPECT_EQ(j["command"], "unify");
  EXPECT_EQ(j["count"], 1);
  ASSERT_EQ(j["unifiers"].size(), 1u);
  EXPECT_EQ(j["unifiers"][0]["NA"], "b xor eps xor na");
  EXPECT_EQ(j["equations"][0]["lhs"], "b xor NA");
}

TEST(Report, NoUnifiersText) {
  auto p = parse_equations("[4, NA] xor [5, b] = [4, na] xor [5, eps]");
  EXPECT_EQ(report::unify_text(unify_sua(p)), "no unifiers\n");
}

TEST(Report, NutWitnessesCarryUnifiers) {
  auto r = check_nut(load("nsl_xor.prot"));
  auto j = report::nut_json("check-nut", r);
  EXPECT_FALSE(j["ok"].get<bool>());
  ASSERT_FALSE(j["witnesses"].empty());
  for (const auto& w : j["witnesses"]) {
    EXPECT_TRUE(w.contains("condition"));
    EXPECT_TRUE(w["unifier"].is_object());
  }
}

TEST(Report, AttackJsonIsStable) {
  auto p = load("nsl_xor.prot");
  auto once = report::attack_json(check_secrecy(p, default_plan(p))).dump(2);
  auto twice = report::attack_json(check_secrecy(p, default_plan(p))).dump(2);
  EXPECT_EQ(once, twice);
  auto j = Json::parse(once);
  EXPECT_EQ(j["verdict"], "violated");
  EXPECT_EQ(j["witness"]["secret"], "nb_2");
  EXPECT_FALSE(j["witness"]["trace"].empty());
  EXPECT_EQ(j.dump(2), once);
}

TEST(Report, TraceUsesSessionLabels) {
  auto p = load("nsl_xor.prot");
  auto lines = report::trace_of(check_secrecy(p, default_plan(p)));
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], "Msg α.1. a -> i : penc([1, na_1, a], pk(i))");
  EXPECT_EQ(lines[1].rfind("Msg β.1. i(a) -> b", 0), 0u);
}

TEST(Report, HoldsHasNullWitness) {
  auto p = load("nsl_xor_tagged.prot");
  auto j = report::attack_json(check_secrecy(p, default_plan(p)));
  EXPECT_EQ(j["verdict"], "holds");
  EXPECT_TRUE(j["witness"].is_null());
}
