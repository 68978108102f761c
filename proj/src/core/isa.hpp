// Toy ISA: four GPRs, a sandbox base register, FLAGS, and fifteen opcodes
// grouped into the instruction classes the contracts are written against.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mrf {

enum class Opcode : std::uint8_t {
  kMov,
  kAdd,
  kSub,
  kAnd,
  kOr,
  kXor,
  kNot,
  kCmp,
  kCmov,
  kDiv,
  kLoad,
  kStore,
  kBcc,
  kJmp,
  kFence,
};
inline constexpr std::array<Opcode, 15> kAllOpcodes = {
    Opcode::kMov, Opcode::kAdd,  Opcode::kSub,   Opcode::kAnd, Opcode::kOr,
    Opcode::kXor, Opcode::kNot,  Opcode::kCmp,   Opcode::kCmov, Opcode::kDiv,
    Opcode::kLoad, Opcode::kStore, Opcode::kBcc, Opcode::kJmp, Opcode::kFence};

enum class Condition : std::uint8_t { kZ, kNZ, kS, kNS };
inline constexpr std::array<Condition, 4> kAllConditions = {
    Condition::kZ, Condition::kNZ, Condition::kS, Condition::kNS};

enum class Reg : std::uint8_t { kR0, kR1, kR2, kR3, kSB };
inline constexpr int kNumGprs = 4;

// Bitmask of instruction classes.
enum ClassTag : std::uint8_t {
  kTagAlu = 1u << 0,
  kTagMemRead = 1u << 1,
  kTagMemWrite = 1u << 2,
  kTagCondBranch = 1u << 3,
  kTagUncondBranch = 1u << 4,
  kTagFence = 1u << 5,
  kTagVarLatency = 1u << 6,
};
using ClassTags = std::uint8_t;

ClassTags class_tags(Opcode op);
bool sets_flags(Opcode op);
bool reads_flags(Opcode op);
bool is_terminator(Opcode op);

// FLAGS bit layout.
inline constexpr std::uint8_t kFlagS = 1u << 0;
inline constexpr std::uint8_t kFlagZ = 1u << 1;
inline constexpr std::uint8_t kFlagC = 1u << 2;
inline constexpr std::uint8_t kFlagMask = kFlagS | kFlagZ | kFlagC;

bool condition_holds(Condition cond, std::uint8_t flags);

// Sandbox geometry. All memory operands resolve to an offset inside a fixed
// two-page region; the second page is only populated in assist mode.
inline constexpr std::uint64_t kSandboxBase = 0x4000'0000;
inline constexpr std::size_t kPageSize = 4096;
inline constexpr std::size_t kMaxPages = 2;
inline constexpr std::size_t kSandboxSize = kPageSize * kMaxPages;
inline constexpr std::size_t kCacheLineSize = 64;
inline constexpr std::size_t kAccessSize = 8;
inline constexpr std::uint64_t kMaskOnePage = 0x0FC0;
inline constexpr std::uint64_t kMaskTwoPages = 0x1FC0;
// Largest AND mask the validator accepts as sandbox masking.
inline constexpr std::uint64_t kMaxSandboxMask = kMaskTwoPages;

struct Operand {
  enum class Kind : std::uint8_t { kNone, kReg, kImm, kMem, kLabel };

  Kind kind = Kind::kNone;
  Reg reg = Reg::kR0;     // kReg, kMem
  std::uint64_t imm = 0;  // kImm
  int target = -1;        // kLabel: index of the target block

  static Operand none() { return {}; }
  static Operand reg_op(Reg r) { return {Kind::kReg, r, 0, -1}; }
  static Operand imm_op(std::uint64_t v) { return {Kind::kImm, Reg::kR0, v, -1}; }
  static Operand mem_op(Reg r) { return {Kind::kMem, r, 0, -1}; }
  static Operand label_op(int block) { return {Kind::kLabel, Reg::kR0, 0, block}; }

  bool operator==(const Operand&) const = default;
};

struct Instruction {
  Opcode op = Opcode::kFence;
  Condition cond = Condition::kZ;  // meaningful for kCmov / kBcc only
  std::array<Operand, 2> operands{};
  bool instrumentation = false;

  ClassTags tags() const { return class_tags(op); }
  bool operator==(const Instruction&) const = default;
};

// Convenience constructors used by the generator, postprocessor and tests.
Instruction make_instr(Opcode op, Operand a = {}, Operand b = {},
                       bool instrumentation = false);
Instruction make_cond(Opcode op, Condition cond, Operand a, Operand b = {});

struct BasicBlock {
  std::string label;
  std::vector<Instruction> instructions;

  bool operator==(const BasicBlock&) const = default;
};

// A program: ordered basic blocks forming a forward-only DAG. blocks.front()
// is the entry and blocks.back() is the exit, which holds only the closing
// FENCE.
struct TestCase {
  std::vector<BasicBlock> blocks;
  std::uint8_t sandbox_offset = 0;
  std::uint64_t seed = 0;

  std::size_t instruction_count() const;
  // Generated instructions: everything that is neither instrumentation nor a
  // block terminator.
  std::size_t payload_count() const;
  std::size_t memory_access_count() const;
  bool operator==(const TestCase&) const = default;
};

std::string_view opcode_mnemonic(Opcode op);
std::string_view condition_suffix(Condition c);
std::string_view reg_name(Reg r);

// Instruction with control-flow targets resolved to linear positions.
struct LinearInstr {
  Instruction instr;
  std::size_t block = 0;
  std::size_t target_pc = 0;  // for kBcc / kJmp
};

// Flattened view used by the interpreters. pc values index `code`.
struct LinearProgram {
  std::vector<LinearInstr> code;
  std::vector<std::size_t> block_start;
  std::uint8_t sandbox_offset = 0;

  std::size_t size() const { return code.size(); }
};

LinearProgram linearize(const TestCase& tc);

// Checks every TestCase invariant; throws ValidationError on the first
// violation.
void validate(const TestCase& tc);

}  // namespace mrf
