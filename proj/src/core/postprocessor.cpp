#include "core/postprocessor.hpp"

#include "core/errors.hpp"

namespace mrf {

namespace {

class Minimizer {
 public:
  Minimizer(const MachineConfig& mc, const Contract& contract) : mc_(mc), contract_(contract) {}

  bool reproduces(const TestCase& tc, const std::vector<Input>& inputs) const {
    try {
      validate(tc);
    } catch (const ValidationError&) {
      return false;
    }
    return detect_violation(mc_, contract_, tc, inputs).has_value();
  }

  // Drops inputs front to back, never the offending pair, until no single
  // removal keeps the violation.
  std::vector<Input> shrink_inputs(const TestCase& tc, std::vector<Input> inputs, std::size_t i,
                                   std::size_t j) const {
    std::vector<bool> keep(inputs.size(), false);
    keep[i] = keep[j] = true;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t k = 0; k < inputs.size();) {
        if (keep[k]) {
          ++k;
          continue;
        }
        std::vector<Input> trial = inputs;
        trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
        if (reproduces(tc, trial)) {
          inputs = std::move(trial);
          keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(k));
          changed = true;
        } else {
          ++k;
        }
      }
    }
    return inputs;
  }

  // Removes payload instructions one at a time together with the
  // instrumentation that guards them.
  TestCase shrink_program(TestCase tc, const std::vector<Input>& inputs) const {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t b = 0; b < tc.blocks.size(); ++b) {
        for (std::size_t k = 0; k < tc.blocks[b].instructions.size();) {
          const auto& code = tc.blocks[b].instructions;
          const Instruction& in = code[k];
          if (in.instrumentation || is_terminator(in.op)) {
            ++k;
            continue;
          }
          const std::size_t first = k - guard_length(code, k);
          TestCase trial = tc;
          auto& tcode = trial.blocks[b].instructions;
          tcode.erase(tcode.begin() + static_cast<std::ptrdiff_t>(first),
                      tcode.begin() + static_cast<std::ptrdiff_t>(k + 1));
          if (reproduces(trial, inputs)) {
            tc = std::move(trial);
            k = first;
            changed = true;
          } else {
            ++k;
          }
        }
      }
    }
    return tc;
  }

  // Inserts FENCEs from the end of the program backward, keeping every
  // insertion under which the violation survives.
  TestCase add_fences(TestCase tc, const std::vector<Input>& inputs, std::size_t& added) const {
    added = 0;
    const Instruction fence = make_instr(Opcode::kFence, {}, {}, true);
    for (std::size_t b = tc.blocks.size() - 1; b-- > 0;) {
      std::size_t end = 0;
      while (end < tc.blocks[b].instructions.size() && !is_terminator(tc.blocks[b].instructions[end].op)) ++end;
      const std::size_t lowest = b == 0 ? 1 : 0;
      for (std::size_t p = end + 1; p-- > lowest;) {
        const auto& code = tc.blocks[b].instructions;
        if (p > 0 && code[p - 1].op == Opcode::kFence) continue;
        if (p < code.size() && code[p].op == Opcode::kFence) continue;
        TestCase trial = tc;
        auto& tcode = trial.blocks[b].instructions;
        tcode.insert(tcode.begin() + static_cast<std::ptrdiff_t>(p), fence);
        if (reproduces(trial, inputs)) {
          tc = std::move(trial);
          ++added;
        }
      }
    }
    return tc;
  }

 private:
  // Number of instrumentation instructions directly protecting code[k].
  static std::size_t guard_length(const std::vector<Instruction>& code, std::size_t k) {
    const Instruction& in = code[k];
    if (in.op == Opcode::kLoad || in.op == Opcode::kStore) return k >= 2 && code[k - 1].instrumentation && code[k - 2].instrumentation ? 2 : 0;
    if (in.op == Opcode::kDiv) return k >= 1 && code[k - 1].instrumentation ? 1 : 0;
    return 0;
  }

  const MachineConfig& mc_;
  const Contract& contract_;
};

// Visits instructions reachable from pc without crossing a FENCE.
bool reaches_load(const LinearProgram& prog, std::size_t pc, std::vector<bool>& seen) {
  while (pc < prog.size() && !seen[pc]) {
    seen[pc] = true;
    const LinearInstr& li = prog.code[pc];
    switch (li.instr.op) {
      case Opcode::kFence: return false;
      case Opcode::kLoad: return true;
      case Opcode::kJmp: pc = li.target_pc; break;
      case Opcode::kBcc:
        if (reaches_load(prog, li.target_pc, seen)) return true;
        ++pc;
        break;
      default: ++pc;
    }
  }
  return false;
}

bool branch_leads_to_load(const LinearProgram& prog, std::size_t pc) {
  std::vector<bool> seen(prog.size(), false);
  return reaches_load(prog, pc + 1, seen) || reaches_load(prog, prog.code[pc].target_pc, seen);
}

}  // namespace

MinimizationResult minimize(const MachineConfig& mc, const Contract& contract, const TestCase& tc,
                            const std::vector<Input>& inputs, std::size_t i, std::size_t j) {
  MinimizationResult r;
  r.original_inputs = inputs.size();
  r.original_payload = tc.payload_count();
  Minimizer m(mc, contract);
  if (!m.reproduces(tc, inputs)) return r;
  r.reproducible = true;

  r.inputs = m.shrink_inputs(tc, inputs, i, j);
  r.stage_ok[0] = m.reproduces(tc, r.inputs);
  r.minimized = m.shrink_program(tc, r.inputs);
  r.stage_ok[1] = m.reproduces(r.minimized, r.inputs);
  r.fenced = m.add_fences(r.minimized, r.inputs, r.fences_added);
  r.stage_ok[2] = m.reproduces(r.fenced, r.inputs);
  return r;
}

bool has_unfenced_branch_load(const TestCase& tc) {
  const LinearProgram prog = linearize(tc);
  for (std::size_t pc = 0; pc < prog.size(); ++pc)
    if (prog.code[pc].instr.op == Opcode::kBcc && branch_leads_to_load(prog, pc)) return true;
  return false;
}

bool has_div_fed_branch_load(const TestCase& tc) {
  const LinearProgram prog = linearize(tc);
  // Taint from DIV results, tracked in program order.
  std::uint8_t tainted = 0;
  bool flags_tainted = false;
  auto reg_bit = [](const Operand& o) -> std::uint8_t {
    if ((o.kind != Operand::Kind::kReg && o.kind != Operand::Kind::kMem) || o.reg == Reg::kSB) return 0;
    return static_cast<std::uint8_t>(1u << static_cast<int>(o.reg));
  };
  for (std::size_t pc = 0; pc < prog.size(); ++pc) {
    const Instruction& in = prog.code[pc].instr;
    if (in.op == Opcode::kBcc) {
      if (flags_tainted && branch_leads_to_load(prog, pc)) return true;
      continue;
    }
    if (in.op == Opcode::kFence || in.op == Opcode::kJmp || in.op == Opcode::kStore) continue;
    const std::uint8_t first = reg_bit(in.operands[0]);
    const std::uint8_t second = reg_bit(in.operands[1]);
    std::uint8_t src = second;
    if (in.op != Opcode::kMov && in.op != Opcode::kLoad) src |= first;
    const bool from_div = in.op == Opcode::kDiv || (src & tainted) != 0 ||
                          (in.op == Opcode::kCmov && flags_tainted);
    if (in.op != Opcode::kCmp) {
      if (from_div)
        tainted |= first;
      else
        tainted &= static_cast<std::uint8_t>(~first);
    }
    if (sets_flags(in.op)) flags_tainted = from_div;
  }
  return false;
}

}  // namespace mrf
