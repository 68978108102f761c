// Contract model: executes a test case on the architectural interpreter,
// explores the speculation the contract's execution clause permits, and
// records the observations its observation clause exposes.

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "core/inputs.hpp"
#include "core/isa.hpp"
#include "core/semantics.hpp"

namespace mrf {

enum class ObservationClause : std::uint8_t { kMem, kCt, kCtr, kArch, kCtNonspecStore };
enum class ExecutionClause : std::uint8_t { kSeq, kCond, kBpas, kCondBpas };

inline constexpr std::size_t kDefaultModelWindow = 20;
inline constexpr std::size_t kDefaultNestingCap = 16;

struct Contract {
  ObservationClause observation = ObservationClause::kCt;
  ExecutionClause execution = ExecutionClause::kSeq;
  std::size_t window = kDefaultModelWindow;
  bool nesting = false;
  std::size_t max_nesting = kDefaultNestingCap;

  bool speculates_on_branches() const {
    return execution == ExecutionClause::kCond || execution == ExecutionClause::kCondBpas;
  }
  bool speculates_on_stores() const {
    return execution == ExecutionClause::kBpas || execution == ExecutionClause::kCondBpas;
  }
  bool operator==(const Contract&) const = default;
};

std::string_view observation_name(ObservationClause c);
std::string_view execution_name(ExecutionClause c);
// Case-insensitive; accepts "ct", "CT", "ct-nonspeculativestore", ...
ObservationClause parse_observation(std::string_view s);
ExecutionClause parse_execution(std::string_view s);
// "CT-SEQ", "MEM-COND", "CT-NonspeculativeStore-COND", ...
std::string contract_name(const Contract& c);
Contract parse_contract(std::string_view name);

struct Observation {
  enum class Tag : std::uint8_t { kMemAddr, kPc, kRegRead, kLoadValue };
  Tag tag;
  std::uint64_t value;

  auto operator<=>(const Observation&) const = default;
};

std::string_view tag_name(Observation::Tag t);

using CTrace = std::vector<Observation>;

// `.ctrace` text: one `TAG hexvalue` line per observation.
std::string format_ctrace(const CTrace& t);
CTrace parse_ctrace(std::string_view text);  // throws FormatError

// One architecturally executed instruction.
struct ExecRecord {
  std::size_t pc = 0;
  Opcode op = Opcode::kFence;
  bool instrumentation = false;
  std::uint8_t src_regs = 0;
  std::uint8_t dst_regs = 0;
  bool flags_read = false;
  bool flags_written = false;
  bool is_load = false;
  bool is_store = false;
  std::uint64_t addr = 0;
};

using ExecTrace = std::vector<ExecRecord>;

struct ModelResult {
  CTrace ctrace;
  ExecTrace exec;
  ArchState final_state;
};

class Model {
 public:
  explicit Model(Contract contract) : contract_(contract) {}

  const Contract& contract() const { return contract_; }

  // Throws ExecutionFault on an interpreter fault and SpeculationDepthError
  // when nested speculation exceeds the configured cap.
  ModelResult run(const LinearProgram& prog, const Input& input) const;
  ModelResult run(const TestCase& tc, const Input& input) const { return run(linearize(tc), input); }

  std::vector<ModelResult> run_all(const TestCase& tc, const std::vector<Input>& inputs) const;

 private:
  Contract contract_;
};

struct ContractTraces {
  CTrace ctrace;
  ExecTrace exec;
};

ContractTraces collect_contract_trace(const Contract& c, const TestCase& tc, const Input& in);

}  // namespace mrf
