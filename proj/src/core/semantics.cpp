#include "core/semantics.hpp"

#include "core/errors.hpp"

namespace mrf {

std::uint64_t ArchState::read64(std::uint64_t offset) const {
  std::uint64_t v = 0;
  for (std::size_t k = 0; k < kAccessSize; ++k)
    v |= static_cast<std::uint64_t>(mem[(offset + k) % kSandboxSize]) << (8 * k);
  return v;
}

void ArchState::write64(std::uint64_t offset, std::uint64_t value) {
  for (std::size_t k = 0; k < kAccessSize; ++k)
    mem[(offset + k) % kSandboxSize] = static_cast<std::uint8_t>(value >> (8 * k));
}

std::uint64_t effective_offset(std::uint64_t base, std::uint8_t sandbox_offset) {
  return (base - kSandboxBase + sandbox_offset) % kSandboxSize;
}

namespace {

std::uint8_t result_flags(std::uint64_t r, bool carry) {
  std::uint8_t f = 0;
  if (r == 0) f |= kFlagZ;
  if (r >> 63) f |= kFlagS;
  if (carry) f |= kFlagC;
  return f;
}

std::uint8_t bit(Reg r) { return r == Reg::kSB ? 0 : static_cast<std::uint8_t>(1u << static_cast<int>(r)); }

}  // namespace

StepInfo step(const LinearProgram& prog, std::size_t pc, ArchState& s,
              const StepOptions& opts) {
  const Instruction& in = prog.code[pc].instr;
  const Operand& a = in.operands[0];
  const Operand& b = in.operands[1];
  StepInfo info;
  info.next_pc = pc + 1;

  auto read = [&](const Operand& o) -> std::uint64_t {
    if (o.kind == Operand::Kind::kImm) return o.imm;
    if (o.reg == Reg::kSB) return kSandboxBase;
    std::uint64_t v = s.regs[static_cast<int>(o.reg)];
    info.src_regs |= bit(o.reg);
    info.reg_reads[info.reg_read_count++] = v;
    return v;
  };
  auto write = [&](const Operand& o, std::uint64_t v) {
    s.regs[static_cast<int>(o.reg)] = v;
    info.dst_regs |= bit(o.reg);
  };
  auto set_flags = [&](std::uint8_t f) {
    s.flags = f;
    info.flags_written = true;
  };

  switch (in.op) {
    case Opcode::kMov:
      write(a, read(b));
      break;
    case Opcode::kAdd: {
      std::uint64_t x = read(a), y = read(b), r = x + y;
      write(a, r);
      set_flags(result_flags(r, r < x));
      break;
    }
    case Opcode::kSub: {
      std::uint64_t x = read(a), y = read(b), r = x - y;
      write(a, r);
      set_flags(result_flags(r, x < y));
      break;
    }
    case Opcode::kAnd: {
      std::uint64_t r = read(a) & read(b);
      write(a, r);
      set_flags(result_flags(r, false));
      break;
    }
    case Opcode::kOr: {
      std::uint64_t r = read(a) | read(b);
      write(a, r);
      set_flags(result_flags(r, false));
      break;
    }
    case Opcode::kXor: {
      std::uint64_t r = read(a) ^ read(b);
      write(a, r);
      set_flags(result_flags(r, false));
      break;
    }
    case Opcode::kNot:
      write(a, ~read(a));
      break;
    case Opcode::kCmp: {
      std::uint64_t x = read(a), y = read(b);
      set_flags(result_flags(x - y, x < y));
      break;
    }
    case Opcode::kCmov: {
      std::uint64_t cur = read(a), src = read(b);
      info.flags_read = true;
      write(a, condition_holds(in.cond, s.flags) ? src : cur);
      break;
    }
    case Opcode::kDiv: {
      std::uint64_t x = read(a), y = read(b);
      if (y == 0) throw ExecutionFault(pc, "division by zero");
      write(a, x / y);
      break;
    }
    case Opcode::kLoad: {
      info.is_load = true;
      info.mem_offset = effective_offset(read(b), prog.sandbox_offset);
      info.loaded = opts.load_override ? *opts.load_override : s.read64(info.mem_offset);
      write(a, info.loaded);
      break;
    }
    case Opcode::kStore: {
      info.is_store = true;
      info.mem_offset = effective_offset(read(a), prog.sandbox_offset);
      std::uint64_t v = read(b);
      if (!opts.skip_store) s.write64(info.mem_offset, v);
      break;
    }
    case Opcode::kBcc:
      info.flags_read = true;
      info.branch_taken = condition_holds(in.cond, s.flags);
      if (info.branch_taken) info.next_pc = prog.code[pc].target_pc;
      break;
    case Opcode::kJmp:
      info.branch_taken = true;
      info.next_pc = prog.code[pc].target_pc;
      break;
    case Opcode::kFence:
      break;
  }
  return info;
}

void run_architectural(const LinearProgram& prog, ArchState& state) {
  std::size_t pc = 0;
  while (pc < prog.size()) pc = step(prog, pc, state).next_pc;
}

}  // namespace mrf
