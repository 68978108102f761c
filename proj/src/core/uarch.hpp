// Simulated speculative core plus cache side channel. This plays the part of
// the CPU under test: run_once executes a test case in a persistent
// microarchitectural context and reports which cache sets the attacker sees.

#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "core/inputs.hpp"
#include "core/isa.hpp"
#include "core/semantics.hpp"

namespace mrf {

enum class AssistMode : std::uint8_t { kOff, kMds, kLviNull };
enum class AttackMode : std::uint8_t { kPrimeProbe, kFlushReload };

std::string_view assist_name(AssistMode m);
std::string_view attack_name(AttackMode m);
AssistMode parse_assist(std::string_view s);  // "off" | "mds" | "lvi-null"
AttackMode parse_attack(std::string_view s);  // "P+P" | "F+R" | "prime+probe" | "flush+reload"

inline constexpr std::size_t kDefaultHwWindow = 10;
inline constexpr std::size_t kPredictorEntries = 256;
inline constexpr std::size_t kCacheSets = 64;

struct MachineConfig {
  bool branch_prediction = true;
  bool store_bypass = true;
  AssistMode assist = AssistMode::kOff;
  bool variable_latency = true;
  std::size_t hw_window = kDefaultHwWindow;
  AttackMode attack = AttackMode::kPrimeProbe;
  double noise = 0.0;
  std::size_t reps = 50;
  std::size_t warmups = 1;
  // Restore the initial context before every input, making each trace a
  // pure function of its input.
  bool reset_per_input = false;
  std::size_t priming_batch = 8;
  std::uint64_t noise_seed = 0;

  void check() const;  // throws ConfigError
  bool operator==(const MachineConfig&) const = default;
};

// Bit i set iff cache set i was observed.
using HTrace = std::uint64_t;

inline bool htrace_subset(HTrace a, HTrace b) { return (a & ~b) == 0; }
// 64 characters, bit 0 leftmost.
std::string format_htrace(HTrace t);
HTrace parse_htrace(std::string_view s);  // throws FormatError

inline constexpr std::uint8_t kCounterInit = 2;  // weakly taken

struct MicroArchState {
  std::array<std::uint8_t, kPredictorEntries> predictor{};
  std::uint64_t leak_buffer = 0;
  std::array<bool, kMaxPages> accessed{};

  MicroArchState() { reset(); }
  void reset();
  bool predicts_taken(std::size_t pc) const { return predictor[pc % kPredictorEntries] >= 2; }
  void train(std::size_t pc, bool taken);
  bool operator==(const MicroArchState&) const = default;
};

struct RunResult {
  HTrace raw = 0;
  ArchState final_state;
};

inline std::size_t cache_set(std::uint64_t offset) { return (offset >> 6) % kCacheSets; }

// Latency of a DIV whose dividend is `dividend`, in instructions.
std::size_t div_latency(std::uint64_t dividend);

// One execution of prog on input `in` in context `ctx` (updated in place).
// `noise_rng` is consulted only when mc.noise > 0.
RunResult run_once(const MachineConfig& mc, const LinearProgram& prog, const Input& in,
                   MicroArchState& ctx, std::mt19937_64* noise_rng = nullptr);

// Merges raw traces: union of the traces seen at least twice. With a single
// sample that sample is returned.
HTrace merge_traces(const std::vector<HTrace>& raws);

// Measures every input of the sequence starting from a fresh context. The
// context flows through the sequence: warmups passes over all inputs are
// discarded, then reps passes are recorded and merged per input.
std::vector<HTrace> measure(const MachineConfig& mc, const TestCase& tc, const std::vector<Input>& ins);
std::vector<HTrace> measure(const MachineConfig& mc, const LinearProgram& prog,
                            const std::vector<Input>& ins);

enum class PrimingVerdict : std::uint8_t { kFalsePositive, kGenuine };

// Swaps inputs i and j into each other's sequence positions and re-measures.
// False positive iff both inputs reproduce the other's trace in the other's
// context.
PrimingVerdict prime_and_compare(const MachineConfig& mc, const TestCase& tc,
                                 const std::vector<Input>& ins, const std::vector<HTrace>& traces,
                                 std::size_t i, std::size_t j);

}  // namespace mrf
