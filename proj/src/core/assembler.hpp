// Canonical text form of a TestCase (.tc files).
//
//   .sandbox_offset 0x10
//   .seed 0x2a
//   .bb0:
//   FENCE # instrumentation
//   AND R2, 0xfc0 # instrumentation
//   ADD R2, SB # instrumentation
//   LOAD R1, [R2]
//   JNS .exit
//   .exit:
//   FENCE # instrumentation
//
// One instruction per line, `LABEL:` opens a block, operands are comma
// separated, immediates are decimal or 0x-hex, and a trailing
// `# instrumentation` comment marks instrumentation. Any other comment is
// ignored. Text without labels gets an implicit `.bb0` entry and the closing
// FENCE is split into an implicit `.exit` block.

#pragma once

#include <string>
#include <string_view>

#include "core/isa.hpp"

namespace mrf {

// Throws AssemblyError (with line and column) on malformed text or on a
// program that breaks a TestCase invariant.
TestCase assemble(std::string_view text);

std::string disassemble(const TestCase& tc);

std::string format_instruction(const Instruction& in, const TestCase& tc);

}  // namespace mrf
