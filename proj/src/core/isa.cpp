#include "core/isa.hpp"

#include <string>

#include "core/errors.hpp"

namespace mrf {

ClassTags class_tags(Opcode op) {
  switch (op) {
    case Opcode::kLoad:
      return kTagMemRead;
    case Opcode::kStore:
      return kTagMemWrite;
    case Opcode::kBcc:
      return kTagCondBranch;
    case Opcode::kJmp:
      return kTagUncondBranch;
    case Opcode::kFence:
      return kTagFence;
    case Opcode::kDiv:
      return kTagAlu | kTagVarLatency;
    default:
      return kTagAlu;
  }
}

bool sets_flags(Opcode op) {
  switch (op) {
    case Opcode::kAdd:
    case Opcode::kSub:
    case Opcode::kAnd:
    case Opcode::kOr:
    case Opcode::kXor:
    case Opcode::kCmp:
      return true;
    default:
      return false;
  }
}

bool reads_flags(Opcode op) { return op == Opcode::kCmov || op == Opcode::kBcc; }

bool is_terminator(Opcode op) { return op == Opcode::kBcc || op == Opcode::kJmp; }

bool condition_holds(Condition cond, std::uint8_t flags) {
  switch (cond) {
    case Condition::kZ:
      return (flags & kFlagZ) != 0;
    case Condition::kNZ:
      return (flags & kFlagZ) == 0;
    case Condition::kS:
      return (flags & kFlagS) != 0;
    case Condition::kNS:
      return (flags & kFlagS) == 0;
  }
  return false;
}

Instruction make_instr(Opcode op, Operand a, Operand b, bool instrumentation) {
  Instruction in;
  in.op = op;
  in.operands = {a, b};
  in.instrumentation = instrumentation;
  return in;
}

Instruction make_cond(Opcode op, Condition cond, Operand a, Operand b) {
  Instruction in = make_instr(op, a, b);
  in.cond = cond;
  return in;
}

std::size_t TestCase::instruction_count() const {
  std::size_t n = 0;
  for (const auto& bb : blocks) n += bb.instructions.size();
  return n;
}

std::size_t TestCase::payload_count() const {
  std::size_t n = 0;
  for (const auto& bb : blocks)
    for (const auto& in : bb.instructions)
      if (!in.instrumentation && !is_terminator(in.op)) ++n;
  return n;
}

std::size_t TestCase::memory_access_count() const {
  std::size_t n = 0;
  for (const auto& bb : blocks)
    for (const auto& in : bb.instructions)
      if (in.op == Opcode::kLoad || in.op == Opcode::kStore) ++n;
  return n;
}

std::string_view opcode_mnemonic(Opcode op) {
  switch (op) {
    case Opcode::kMov: return "MOV";
    case Opcode::kAdd: return "ADD";
    case Opcode::kSub: return "SUB";
    case Opcode::kAnd: return "AND";
    case Opcode::kOr: return "OR";
    case Opcode::kXor: return "XOR";
    case Opcode::kNot: return "NOT";
    case Opcode::kCmp: return "CMP";
    case Opcode::kCmov: return "CMOV";
    case Opcode::kDiv: return "DIV";
    case Opcode::kLoad: return "LOAD";
    case Opcode::kStore: return "STORE";
    case Opcode::kBcc: return "J";
    case Opcode::kJmp: return "JMP";
    case Opcode::kFence: return "FENCE";
  }
  return "?";
}

std::string_view condition_suffix(Condition c) {
  switch (c) {
    case Condition::kZ: return "Z";
    case Condition::kNZ: return "NZ";
    case Condition::kS: return "S";
    case Condition::kNS: return "NS";
  }
  return "?";
}

std::string_view reg_name(Reg r) {
  switch (r) {
    case Reg::kR0: return "R0";
    case Reg::kR1: return "R1";
    case Reg::kR2: return "R2";
    case Reg::kR3: return "R3";
    case Reg::kSB: return "SB";
  }
  return "?";
}

LinearProgram linearize(const TestCase& tc) {
  LinearProgram prog;
  prog.sandbox_offset = tc.sandbox_offset;
  prog.block_start.reserve(tc.blocks.size() + 1);
  std::size_t pc = 0;
  for (const auto& bb : tc.blocks) {
    prog.block_start.push_back(pc);
    pc += bb.instructions.size();
  }
  prog.block_start.push_back(pc);
  prog.code.reserve(pc);
  for (std::size_t b = 0; b < tc.blocks.size(); ++b) {
    for (const auto& in : tc.blocks[b].instructions) {
      LinearInstr li{in, b, 0};
      if (in.op == Opcode::kBcc || in.op == Opcode::kJmp) {
        li.target_pc = prog.block_start.at(in.operands[0].target);
      }
      prog.code.push_back(li);
    }
  }
  return prog;
}

namespace {

using Kind = Operand::Kind;

bool is_gpr(const Operand& o) { return o.kind == Kind::kReg && o.reg != Reg::kSB; }
bool is_gpr_or_imm(const Operand& o) { return is_gpr(o) || o.kind == Kind::kImm; }

[[noreturn]] void fail(const TestCase& tc, std::size_t b, std::size_t i,
                       const std::string& msg) {
  throw ValidationError(b, i, "block '" + tc.blocks[b].label + "' instruction " +
                                   std::to_string(i) + ": " + msg);
}

void check_operands(const TestCase& tc, std::size_t b, std::size_t i) {
  const Instruction& in = tc.blocks[b].instructions[i];
  const auto& a = in.operands[0];
  const auto& c = in.operands[1];
  auto none = [](const Operand& o) { return o.kind == Kind::kNone; };
  bool ok = false;
  switch (in.op) {
    case Opcode::kMov:
    case Opcode::kSub:
    case Opcode::kAnd:
    case Opcode::kOr:
    case Opcode::kXor:
    case Opcode::kCmp:
      ok = is_gpr(a) && is_gpr_or_imm(c);
      break;
    case Opcode::kAdd:
      // ADD r, SB only appears as sandbox instrumentation.
      ok = is_gpr(a) && (is_gpr_or_imm(c) ||
                         (in.instrumentation && c.kind == Kind::kReg &&
                          c.reg == Reg::kSB));
      break;
    case Opcode::kNot:
      ok = is_gpr(a) && none(c);
      break;
    case Opcode::kCmov:
    case Opcode::kDiv:
      ok = is_gpr(a) && is_gpr(c);
      break;
    case Opcode::kLoad:
      ok = is_gpr(a) && c.kind == Kind::kMem && c.reg != Reg::kSB;
      break;
    case Opcode::kStore:
      ok = a.kind == Kind::kMem && a.reg != Reg::kSB && is_gpr_or_imm(c);
      break;
    case Opcode::kBcc:
    case Opcode::kJmp:
      ok = a.kind == Kind::kLabel && none(c);
      break;
    case Opcode::kFence:
      ok = none(a) && none(c);
      break;
  }
  if (!ok) fail(tc, b, i, "illegal operands for " + std::string(opcode_mnemonic(in.op)));
  for (const auto& o : in.operands) {
    if (o.kind == Kind::kLabel &&
        (o.target < 0 || o.target >= static_cast<int>(tc.blocks.size()))) {
      fail(tc, b, i, "unresolved label");
    }
  }
}

bool is_mask_of(const Instruction& in, Reg r) {
  return in.instrumentation && in.op == Opcode::kAnd &&
         in.operands[0] == Operand::reg_op(r) &&
         in.operands[1].kind == Kind::kImm && in.operands[1].imm <= kMaxSandboxMask;
}

bool is_base_add_of(const Instruction& in, Reg r) {
  return in.instrumentation && in.op == Opcode::kAdd &&
         in.operands[0] == Operand::reg_op(r) &&
         in.operands[1] == Operand::reg_op(Reg::kSB);
}

bool is_divisor_guard_of(const Instruction& in, Reg r) {
  return in.instrumentation && in.op == Opcode::kOr &&
         in.operands[0] == Operand::reg_op(r) &&
         in.operands[1] == Operand::imm_op(1);
}

}  // namespace

void validate(const TestCase& tc) {
  if (tc.blocks.size() < 2) throw ValidationError("a test case needs an entry and an exit block");
  if (tc.sandbox_offset >= kCacheLineSize) throw ValidationError("sandbox offset out of range");
  for (std::size_t b = 0; b < tc.blocks.size(); ++b) {
    if (tc.blocks[b].label.empty()) throw ValidationError("empty block label");
    for (std::size_t c = 0; c < b; ++c)
      if (tc.blocks[c].label == tc.blocks[b].label)
        throw ValidationError("duplicate label '" + tc.blocks[b].label + "'");
  }

  const auto& entry = tc.blocks.front().instructions;
  if (entry.empty() || entry.front().op != Opcode::kFence)
    throw ValidationError("first instruction must be FENCE");
  const auto& exit = tc.blocks.back().instructions;
  if (exit.size() != 1 || exit.front().op != Opcode::kFence)
    throw ValidationError("exit block must hold exactly the closing FENCE");

  for (std::size_t b = 0; b < tc.blocks.size(); ++b) {
    const auto& insts = tc.blocks[b].instructions;
    for (std::size_t i = 0; i < insts.size(); ++i) {
      const Instruction& in = insts[i];
      check_operands(tc, b, i);

      if (is_terminator(in.op)) {
        // Allowed block endings: [.. Bcc], [.. JMP], [.. Bcc JMP].
        bool last = i + 1 == insts.size();
        bool bcc_then_jmp = in.op == Opcode::kBcc && i + 2 == insts.size() &&
                            insts[i + 1].op == Opcode::kJmp;
        if (!last && !bcc_then_jmp) fail(tc, b, i, "terminator inside a block");
        if (in.operands[0].target <= static_cast<int>(b))
          fail(tc, b, i, "back edge: control flow must form a DAG");
      }

      for (int k = 0; k < 2; ++k) {
        const Operand& o = in.operands[k];
        if (o.kind != Kind::kMem) continue;
        if (i < 2 || !is_mask_of(insts[i - 2], o.reg) || !is_base_add_of(insts[i - 1], o.reg))
          fail(tc, b, i, "memory operand without sandbox instrumentation");
      }

      if (in.op == Opcode::kDiv &&
          (i < 1 || !is_divisor_guard_of(insts[i - 1], in.operands[1].reg)))
        fail(tc, b, i, "divisor without OR r, 1 instrumentation");
    }
  }
}

}  // namespace mrf
