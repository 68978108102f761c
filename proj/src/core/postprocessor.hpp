// Counterexample minimization: shrink the input sequence, then the program,
// then fence off everything that is not needed for the leak.

#pragma once

#include <cstddef>
#include <vector>

#include "core/analyser.hpp"

namespace mrf {

struct MinimizationResult {
  bool reproducible = false;  // false: the original did not reproduce, nothing was done
  std::vector<Input> inputs;
  TestCase minimized;
  TestCase fenced;
  // Whether each stage's final artifact re-verified.
  bool stage_ok[3] = {false, false, false};
  std::size_t original_inputs = 0;
  std::size_t original_payload = 0;
  std::size_t fences_added = 0;
};

MinimizationResult minimize(const MachineConfig& mc, const Contract& contract, const TestCase& tc,
                            const std::vector<Input>& inputs, std::size_t i, std::size_t j);

// A LOAD reachable from either successor of a conditional branch without
// passing a FENCE.
bool has_unfenced_branch_load(const TestCase& tc);

// A DIV result flows into the FLAGS of a conditional branch that is followed,
// without an intervening FENCE, by a LOAD.
bool has_div_fed_branch_load(const TestCase& tc);

}  // namespace mrf
