#include <gtest/gtest.h>

#include <random>

#include "campaigns.hpp"
#include "core/fuzzer.hpp"
#include "core/postprocessor.hpp"
#include "scenarios.hpp"

namespace mrf {
namespace {

const Contract kCtSeq{ObservationClause::kCt, ExecutionClause::kSeq};

TEST(Minimize, HandWrittenV1KeepsItsProgram) {
  std::mt19937_64 rng(21);
  const test::Scenario s = test::genuine_v1(rng);
  const MachineConfig mc = test::branch_only_machine();
  const auto r = minimize(mc, kCtSeq, s.tc, s.inputs, s.i, s.j);
  ASSERT_TRUE(r.reproducible);
  EXPECT_TRUE(r.stage_ok[0] && r.stage_ok[1] && r.stage_ok[2]);
  EXPECT_LE(r.inputs.size(), s.inputs.size());
  EXPECT_GE(r.inputs.size(), 2u);
  EXPECT_EQ(disassemble(r.minimized), disassemble(s.tc));
  EXPECT_TRUE(has_unfenced_branch_load(r.fenced));
}

TEST(Minimize, NonReproducingCaseIsLeftAlone) {
  std::mt19937_64 rng(22);
  const test::Scenario s = test::genuine_v1(rng);
  MachineConfig mc = test::branch_only_machine();
  mc.branch_prediction = false;
  const auto r = minimize(mc, kCtSeq, s.tc, s.inputs, s.i, s.j);
  EXPECT_FALSE(r.reproducible);
  EXPECT_EQ(r.original_inputs, s.inputs.size());
}

TEST(Minimize, GeneratedBranchLeakShrinksAndKeepsShape) {
  CampaignConfig cfg = test::branch_loads();
  cfg.campaign.max_rounds = 200;
  cfg.campaign.stop_on_violation = true;
  const CampaignReport rep = fuzz_campaign(cfg);
  ASSERT_EQ(rep.violating_rounds.size(), 1u);
  const RoundResult& v = rep.violating_rounds.front();
  const auto r = minimize(cfg.machine, cfg.contract, v.test_case, v.inputs, v.violation->i, v.violation->j);
  ASSERT_TRUE(r.reproducible);
  EXPECT_TRUE(r.stage_ok[0] && r.stage_ok[1] && r.stage_ok[2]);
  EXPECT_LE(r.inputs.size(), v.inputs.size());
  EXPECT_LE(r.minimized.payload_count(), v.test_case.payload_count());
  EXPECT_EQ(r.fenced.payload_count(), r.minimized.payload_count());
  EXPECT_TRUE(has_unfenced_branch_load(r.fenced)) << disassemble(r.fenced);
  EXPECT_TRUE(detect_violation(cfg.machine, cfg.contract, r.fenced, r.inputs).has_value());
}

TEST(ShapeChecks, UnfencedBranchLoad) {
  const std::string head = ".bb0:\nFENCE # instrumentation\nCMP R1, 0\nJZ .exit\n.bb1:\n";
  const std::string load = "AND R0, 0xfc0 # instrumentation\nADD R0, SB # instrumentation\nLOAD R3, [R0]\n";
  const std::string tail = ".exit:\nFENCE # instrumentation\n";
  EXPECT_TRUE(has_unfenced_branch_load(assemble(head + load + tail)));
  EXPECT_FALSE(has_unfenced_branch_load(assemble(head + "FENCE # instrumentation\n" + load + tail)));
  EXPECT_FALSE(has_unfenced_branch_load(assemble(head + "ADD R0, 1\n" + tail)));
  EXPECT_FALSE(has_unfenced_branch_load(
      assemble(".bb0:\nFENCE # instrumentation\n" + load + "CMP R1, 0\nJZ .exit\n.bb1:\nADD R0, 1\n" + tail)));
}

TEST(ShapeChecks, DivFedBranchLoad) {
  const std::string div = ".bb0:\nFENCE # instrumentation\nOR R2, 0x1 # instrumentation\nDIV R1, R2\n";
  const std::string branch = "JZ .exit\n.bb1:\n";
  const std::string load = "AND R0, 0xfc0 # instrumentation\nADD R0, SB # instrumentation\nLOAD R3, [R0]\n";
  const std::string tail = ".exit:\nFENCE # instrumentation\n";
  EXPECT_TRUE(has_div_fed_branch_load(assemble(div + "CMP R1, 0\n" + branch + load + tail)));
  // Taint through a register copy and through a load from a tainted address.
  EXPECT_TRUE(has_div_fed_branch_load(assemble(div + "MOV R3, R1\nCMP R3, 5\n" + branch + load + tail)));
  EXPECT_TRUE(has_div_fed_branch_load(assemble(
      div + "MOV R0, R1\n" + load + "CMP R3, 0\n" + branch + load + tail)));
  // Overwriting the quotient clears the taint.
  EXPECT_FALSE(has_div_fed_branch_load(assemble(div + "MOV R1, 7\nCMP R1, 0\n" + branch + load + tail)));
  EXPECT_FALSE(has_div_fed_branch_load(assemble(div + "CMP R1, 0\n" + branch + "ADD R0, 1\n" + tail)));
  EXPECT_FALSE(has_div_fed_branch_load(
      assemble(".bb0:\nFENCE # instrumentation\nCMP R1, 0\n" + branch + load + tail)));
}

}  // namespace
}  // namespace mrf
