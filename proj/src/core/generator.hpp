#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "core/isa.hpp"

namespace mrf {

enum class InstructionSubset : std::uint8_t { kBase, kBaseMem, kBaseCb, kBaseMemCb };

std::string_view subset_name(InstructionSubset s);
InstructionSubset parse_subset(std::string_view name);  // throws ConfigError
bool subset_has_mem(InstructionSubset s);
bool subset_has_cb(InstructionSubset s);

struct GeneratorConfig {
  std::size_t test_case_size = 8;
  std::size_t max_mem_accesses = 2;
  std::size_t min_blocks = 1;
  std::size_t max_blocks = 2;
  InstructionSubset subset = InstructionSubset::kBaseMemCb;
  // Sandbox pages addressed by masking (1 or 2).
  std::size_t pages = 1;
  std::uint64_t seed = 0;

  // Throws ConfigError on an infeasible configuration.
  void check() const;
  bool operator==(const GeneratorConfig&) const = default;
};

// Generates a random test case: block DAG, terminators, payload, sandbox and
// divisor instrumentation, FENCE framing. Deterministic in cfg.
TestCase generate_test_case(const GeneratorConfig& cfg);

// Parameters the coverage feedback scales together.
struct FuzzingScale {
  GeneratorConfig generator;
  std::size_t inputs = 50;
  bool operator==(const FuzzingScale&) const = default;
};

inline constexpr double kSizeGrowth = 1.5;
inline constexpr double kInputGrowth = 1.5;

// Scales size and inputs by 1.5 (rounded up) and adds one basic block when
// the current combination size is fully covered; otherwise returns cur.
FuzzingScale grow_params(const FuzzingScale& cur, bool combinations_covered);

}  // namespace mrf
