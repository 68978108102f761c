// Random architectural inputs.
//
// The PRNG is std::mt19937 (32-bit Mersenne Twister). Its output sequence is
// fixed by the C++ standard (the 10000th output of a default-seeded engine is
// 4123659995), so input streams are reproducible across implementations.
// A list of inputs is seeded through std::seed_seq from the two halves of the
// 64-bit seed; each Input then draws everything from its own engine seeded
// with its 32-bit input seed, in this order: R0..R3, FLAGS, memory words.
// Every value is `prng32() mod 2^entropy_bits`, zero-extended to 64 bits.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "core/isa.hpp"
#include "core/semantics.hpp"

namespace mrf {

inline constexpr unsigned kMinEntropyBits = 1;
inline constexpr unsigned kMaxEntropyBits = 32;
inline constexpr std::size_t kWordsPerPage = kPageSize / 8;

struct Input {
  std::array<std::uint64_t, kNumGprs> regs{};
  std::uint8_t flags = 0;
  // pages * kWordsPerPage little-endian words.
  std::vector<std::uint64_t> mem;
  std::uint32_t seed = 0;
  unsigned entropy_bits = 0;
  std::size_t pages = 1;

  ArchState to_state() const;
  bool operator==(const Input&) const = default;
};

Input make_input(std::uint32_t input_seed, unsigned entropy_bits, std::size_t pages);

// Throws ConfigError when entropy_bits is outside [1, 32], n is zero, or pages
// is not 1 or 2.
std::vector<Input> generate_inputs(std::size_t n, unsigned entropy_bits, std::uint64_t seed,
                                   std::size_t pages = 1);

}  // namespace mrf
