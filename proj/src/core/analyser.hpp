// Relational analysis: inputs with equal contract traces must produce equal
// hardware traces. Mismatches are escalated through priming and a nested
// contract re-check before they are reported.

#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "core/inputs.hpp"
#include "core/isa.hpp"
#include "core/model.hpp"
#include "core/uarch.hpp"

namespace mrf {

struct InputClass {
  CTrace ctrace;
  std::vector<std::size_t> members;
  std::vector<HTrace> htraces;  // aligned with members; empty if not supplied

  bool effective() const { return members.size() >= 2; }
};

// Partition by structural ctrace equality, classes ordered by first member.
std::vector<InputClass> group_by_ctrace(const std::vector<CTrace>& ctraces,
                                        const std::vector<HTrace>& htraces = {});

enum class MatchMode : std::uint8_t {
  // Traces in a class must form a chain under bit inclusion.
  kSubset,
  // Traces in a class must be identical.
  kFull,
};

using IndexPair = std::pair<std::size_t, std::size_t>;

struct ClassVerdict {
  bool clean = true;
  std::vector<IndexPair> suspects;  // input indices, first < second
};

ClassVerdict check_class(const InputClass& cl, MatchMode mode = MatchMode::kSubset);

struct Violation {
  TestCase test_case;
  Contract contract;
  std::size_t i = 0;
  std::size_t j = 0;
  Input input_i;
  Input input_j;
  CTrace ctrace;
  HTrace htrace_i = 0;
  HTrace htrace_j = 0;
  PrimingVerdict priming = PrimingVerdict::kGenuine;
};

// Everything has_violations needs to re-measure and re-model.
struct AnalysisSubject {
  const MachineConfig& machine;
  const Contract& contract;
  const TestCase& test_case;
  const std::vector<Input>& inputs;
};

struct AnalysisStats {
  std::size_t classes = 0;
  std::size_t effective_classes = 0;
  std::size_t suspects = 0;
  std::size_t primed = 0;
  std::size_t false_positives = 0;
  std::size_t nested_rejections = 0;
};

// Full match is used when every input runs from a reset context; otherwise
// the subset relaxation applies.
MatchMode match_mode_for(const MachineConfig& mc);

std::optional<Violation> has_violations(const std::vector<CTrace>& ctraces,
                                        const std::vector<HTrace>& htraces,
                                        const AnalysisSubject& subject,
                                        AnalysisStats* stats = nullptr);

// Models and measures `inputs` from scratch, then runs has_violations.
std::optional<Violation> detect_violation(const MachineConfig& mc, const Contract& contract,
                                          const TestCase& tc, const std::vector<Input>& inputs,
                                          AnalysisStats* stats = nullptr);

}  // namespace mrf
