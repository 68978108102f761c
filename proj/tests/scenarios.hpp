// Hand-built measurement scenarios shared by the unit and acceptance tests.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "core/assembler.hpp"
#include "core/uarch.hpp"
#include "test_util.hpp"

namespace mrf::test {

struct Scenario {
  TestCase tc;
  std::vector<Input> inputs;
  std::size_t i = 0, j = 0;
};

inline MachineConfig branch_only_machine() {
  MachineConfig mc;
  mc.branch_prediction = true;
  mc.store_bypass = false;
  mc.variable_latency = false;
  mc.assist = AssistMode::kOff;
  mc.reps = 5;
  return mc;
}

inline std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

// Two independent branches, each guarding a load from a fixed line. The
// inputs at positions i and j take both branches, so they share a contract
// trace, but the padding before each trains a different branch the wrong
// way. Their hardware traces differ only through predictor state.
inline Scenario cross_training(std::mt19937_64& rng) {
  const std::uint64_t a = (1 + rng() % 31) * 64;
  std::uint64_t b = (1 + rng() % 31) * 64;
  if (b == a) b = a + 64 * 32;
  Scenario s;
  s.tc = assemble(".bb0:\nFENCE # instrumentation\nCMP R0, 0\nJZ .bb2\n.bb1:\nMOV R2, " + hex(a) +
                  "\nAND R2, 0xfc0 # instrumentation\nADD R2, SB # instrumentation\nLOAD R3, [R2]\nJMP .bb2\n"
                  ".bb2:\nCMP R1, 0\nJZ .exit\n.bb3:\nMOV R2, " +
                  hex(b) + "\nAND R2, 0xfc0 # instrumentation\nADD R2, SB # instrumentation\nLOAD R3, [R2]\n"
                  ".exit:\nFENCE # instrumentation\n");
  const std::size_t pre = 2 + rng() % 3, mid = 2 + rng() % 3;
  for (std::size_t k = 0; k < pre; ++k) s.inputs.push_back(regs_input(1 + rng() % 100, 0));
  s.i = s.inputs.size();
  s.inputs.push_back(regs_input(0, 0, rng() % 1000));
  for (std::size_t k = 0; k < mid; ++k) s.inputs.push_back(regs_input(0, 1 + rng() % 100));
  s.j = s.inputs.size();
  s.inputs.push_back(regs_input(0, 0, rng() % 1000));
  return s;
}

// Spectre V1 shape: a branch guards a load whose address comes from R0.
// Inputs i and j fall through architecturally, both mispredict, and load
// from different lines on the wrong path.
inline Scenario genuine_v1(std::mt19937_64& rng) {
  Scenario s;
  s.tc = assemble(
      ".bb0:\nFENCE # instrumentation\nCMP R1, 0\nJZ .bb2\n.bb1:\nJMP .exit\n"
      ".bb2:\nAND R0, 0xfc0 # instrumentation\nADD R0, SB # instrumentation\nLOAD R3, [R0]\n"
      ".exit:\nFENCE # instrumentation\n");
  const std::uint64_t li = rng() % 64;
  std::uint64_t lj = rng() % 64;
  if (lj == li) lj = (li + 1 + rng() % 63) % 64;
  auto pad = [&] { s.inputs.push_back(regs_input((rng() % 64) * 64, 0)); };
  pad();
  pad();
  s.i = s.inputs.size();
  s.inputs.push_back(regs_input(li * 64, 1 + rng() % 100));
  pad();
  pad();
  s.j = s.inputs.size();
  s.inputs.push_back(regs_input(lj * 64, 1 + rng() % 100));
  return s;
}

}  // namespace mrf::test
