#include "core/model.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "core/errors.hpp"

namespace mrf {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

constexpr ObservationClause kObservations[] = {
    ObservationClause::kMem, ObservationClause::kCt, ObservationClause::kCtr,
    ObservationClause::kArch, ObservationClause::kCtNonspecStore};
constexpr ExecutionClause kExecutions[] = {ExecutionClause::kSeq, ExecutionClause::kCond,
                                           ExecutionClause::kBpas, ExecutionClause::kCondBpas};

}  // namespace

std::string_view observation_name(ObservationClause c) {
  switch (c) {
    case ObservationClause::kMem: return "MEM";
    case ObservationClause::kCt: return "CT";
    case ObservationClause::kCtr: return "CTR";
    case ObservationClause::kArch: return "ARCH";
    case ObservationClause::kCtNonspecStore: return "CT-NonspeculativeStore";
  }
  return "?";
}

std::string_view execution_name(ExecutionClause c) {
  switch (c) {
    case ExecutionClause::kSeq: return "SEQ";
    case ExecutionClause::kCond: return "COND";
    case ExecutionClause::kBpas: return "BPAS";
    case ExecutionClause::kCondBpas: return "COND-BPAS";
  }
  return "?";
}

ObservationClause parse_observation(std::string_view s) {
  const std::string key = lower(s);
  for (auto c : kObservations)
    if (lower(observation_name(c)) == key) return c;
  if (key == "ct-nonspecstore" || key == "ct_nonspeculativestore") return ObservationClause::kCtNonspecStore;
  throw ConfigError("unknown observation clause '" + std::string(s) + "'");
}

ExecutionClause parse_execution(std::string_view s) {
  std::string key = lower(s);
  std::replace(key.begin(), key.end(), '_', '-');
  for (auto c : kExecutions)
    if (lower(execution_name(c)) == key) return c;
  throw ConfigError("unknown execution clause '" + std::string(s) + "'");
}

std::string contract_name(const Contract& c) {
  return std::string(observation_name(c.observation)) + "-" + std::string(execution_name(c.execution));
}

Contract parse_contract(std::string_view name) {
  // The execution clause is the suffix after the last observation-clause
  // prefix; try the longest observation names first.
  const std::string key = lower(name);
  for (auto obs : {ObservationClause::kCtNonspecStore, ObservationClause::kArch,
                   ObservationClause::kCtr, ObservationClause::kMem, ObservationClause::kCt}) {
    const std::string prefix = lower(observation_name(obs)) + "-";
    if (key.rfind(prefix, 0) != 0) continue;
    Contract c;
    c.observation = obs;
    c.execution = parse_execution(name.substr(prefix.size()));
    return c;
  }
  throw ConfigError("unknown contract '" + std::string(name) + "'");
}

std::string_view tag_name(Observation::Tag t) {
  switch (t) {
    case Observation::Tag::kMemAddr: return "MemAddr";
    case Observation::Tag::kPc: return "PC";
    case Observation::Tag::kRegRead: return "RegRead";
    case Observation::Tag::kLoadValue: return "LoadValue";
  }
  return "?";
}

std::string format_ctrace(const CTrace& t) {
  std::string out;
  char buf[64];
  for (const Observation& o : t) {
    std::snprintf(buf, sizeof buf, " 0x%" PRIx64 "\n", o.value);
    out += tag_name(o.tag);
    out += buf;
  }
  return out;
}

CTrace parse_ctrace(std::string_view text) {
  CTrace out;
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string tag, value;
    ls >> tag >> value;
    Observation o{};
    bool known = false;
    for (auto t : {Observation::Tag::kMemAddr, Observation::Tag::kPc, Observation::Tag::kRegRead,
                   Observation::Tag::kLoadValue})
      if (tag == tag_name(t)) {
        o.tag = t;
        known = true;
      }
    if (!known) throw FormatError("ctrace line " + std::to_string(lineno) + ": unknown tag '" + tag + "'");
    try {
      std::size_t used = 0;
      o.value = std::stoull(value, &used, 0);
      if (used != value.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw FormatError("ctrace line " + std::to_string(lineno) + ": bad value '" + value + "'");
    }
    out.push_back(o);
  }
  return out;
}

namespace {

// Depth-first explorer over the checkpoint stack. Each speculative episode
// works on a copy of the state, which makes rollback a matter of discarding
// the copy.
class Explorer {
 public:
  Explorer(const LinearProgram& prog, const Contract& c, ModelResult& out)
      : prog_(prog), c_(c), out_(out) {}

  void run_architectural(ArchState& s) {
    std::size_t pc = 0;
    while (pc < prog_.size()) pc = execute(s, pc, /*depth=*/0, /*budget=*/nullptr);
  }

 private:
  // Executes one instruction at pc, spawning any episodes the contract
  // allows there, and returns the next pc. budget is null on the
  // architectural path.
  std::size_t execute(ArchState& s, std::size_t pc, std::size_t depth, std::size_t* budget) {
    const LinearInstr& li = prog_.code[pc];
    const bool speculative = budget != nullptr;
    const bool may_spawn = !speculative || c_.nesting;
    const Opcode op = li.instr.op;

    if (op == Opcode::kStore && c_.speculates_on_stores() && may_spawn) {
      std::size_t remaining = speculative ? *budget : c_.window;
      ArchState copy = s;
      episode(copy, pc + 1, depth + 1, remaining);
    }

    StepInfo info = step(prog_, pc, s);
    observe(li, info, speculative);
    if (!speculative) record(pc, li, info);
    if (speculative) --*budget;

    if (op == Opcode::kBcc && c_.speculates_on_branches() && may_spawn) {
      std::size_t wrong = info.branch_taken ? pc + 1 : li.target_pc;
      std::size_t remaining = speculative ? *budget : c_.window;
      ArchState copy = s;
      episode(copy, wrong, depth + 1, remaining);
    }
    return info.next_pc;
  }

  void episode(ArchState& s, std::size_t pc, std::size_t depth, std::size_t budget) {
    if (depth > c_.max_nesting)
      throw SpeculationDepthError("speculation nesting exceeds " + std::to_string(c_.max_nesting));
    while (pc < prog_.size() && budget > 0 && prog_.code[pc].instr.op != Opcode::kFence)
      pc = execute(s, pc, depth, &budget);
  }

  void observe(const LinearInstr& li, const StepInfo& info, bool speculative) {
    using T = Observation::Tag;
    const ObservationClause obs = c_.observation;
    const bool regs = obs == ObservationClause::kCtr || obs == ObservationClause::kArch;
    if (regs)
      for (std::uint8_t k = 0; k < info.reg_read_count; ++k)
        out_.ctrace.push_back({T::kRegRead, info.reg_reads[k]});
    if (info.is_load || info.is_store) {
      bool hide = info.is_store && speculative && obs == ObservationClause::kCtNonspecStore;
      if (!hide) out_.ctrace.push_back({T::kMemAddr, info.mem_offset});
    }
    if (info.is_load && obs == ObservationClause::kArch)
      out_.ctrace.push_back({T::kLoadValue, info.loaded});
    if (li.instr.op == Opcode::kBcc && obs != ObservationClause::kMem)
      out_.ctrace.push_back({T::kPc, info.next_pc});
  }

  void record(std::size_t pc, const LinearInstr& li, const StepInfo& info) {
    ExecRecord r;
    r.pc = pc;
    r.op = li.instr.op;
    r.instrumentation = li.instr.instrumentation;
    r.src_regs = info.src_regs;
    r.dst_regs = info.dst_regs;
    r.flags_read = info.flags_read;
    r.flags_written = info.flags_written;
    r.is_load = info.is_load;
    r.is_store = info.is_store;
    r.addr = info.mem_offset;
    out_.exec.push_back(r);
  }

  const LinearProgram& prog_;
  const Contract& c_;
  ModelResult& out_;
};

}  // namespace

ModelResult Model::run(const LinearProgram& prog, const Input& input) const {
  ModelResult out;
  out.final_state = input.to_state();
  Explorer(prog, contract_, out).run_architectural(out.final_state);
  return out;
}

std::vector<ModelResult> Model::run_all(const TestCase& tc, const std::vector<Input>& inputs) const {
  const LinearProgram prog = linearize(tc);
  std::vector<ModelResult> out;
  out.reserve(inputs.size());
  for (const Input& in : inputs) out.push_back(run(prog, in));
  return out;
}

ContractTraces collect_contract_trace(const Contract& c, const TestCase& tc, const Input& in) {
  ModelResult r = Model(c).run(tc, in);
  return {std::move(r.ctrace), std::move(r.exec)};
}

}  // namespace mrf
