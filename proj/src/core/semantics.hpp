// Architectural semantics of a single instruction. Both the contract model and
// the simulated microarchitecture execute through step(); they differ only in
// how they schedule speculation around it.

#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "core/isa.hpp"

namespace mrf {

struct ArchState {
  std::array<std::uint64_t, kNumGprs> regs{};
  std::uint8_t flags = 0;
  std::array<std::uint8_t, kSandboxSize> mem{};

  std::uint64_t read64(std::uint64_t offset) const;
  void write64(std::uint64_t offset, std::uint64_t value);
  bool operator==(const ArchState&) const = default;
};

struct StepOptions {
  // Value a LOAD returns instead of memory (assist injection).
  std::optional<std::uint64_t> load_override;
  // Execute a STORE without updating memory (bypass exploration).
  bool skip_store = false;
};

struct StepInfo {
  std::size_t next_pc = 0;
  bool is_load = false;
  bool is_store = false;
  std::uint64_t mem_offset = 0;  // sandbox-relative address of the access
  std::uint64_t loaded = 0;      // value delivered by a LOAD
  bool branch_taken = false;
  // Values of GPR source operands in operand order.
  std::array<std::uint64_t, 2> reg_reads{};
  std::uint8_t reg_read_count = 0;
  std::uint8_t src_regs = 0;  // bitmask over R0..R3
  std::uint8_t dst_regs = 0;
  bool flags_read = false;
  bool flags_written = false;
};

// Sandbox-relative address a memory operand on `base` resolves to.
std::uint64_t effective_offset(std::uint64_t base, std::uint8_t sandbox_offset);

// Executes prog.code[pc] on `state`. Throws ExecutionFault on division by
// zero, which instrumentation rules out.
StepInfo step(const LinearProgram& prog, std::size_t pc, ArchState& state,
              const StepOptions& opts = {});

// Runs the architectural path to completion.
void run_architectural(const LinearProgram& prog, ArchState& state);

}  // namespace mrf
