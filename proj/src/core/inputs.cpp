#include "core/inputs.hpp"

#include <random>

#include "core/errors.hpp"

namespace mrf {

ArchState Input::to_state() const {
  ArchState s;
  s.regs = regs;
  s.flags = flags;
  for (std::size_t w = 0; w < mem.size() && w * 8 < kSandboxSize; ++w) s.write64(w * 8, mem[w]);
  return s;
}

Input make_input(std::uint32_t input_seed, unsigned entropy_bits, std::size_t pages) {
  if (entropy_bits < kMinEntropyBits || entropy_bits > kMaxEntropyBits)
    throw ConfigError("entropy bits must be in [1, 32]");
  if (pages < 1 || pages > kMaxPages) throw ConfigError("pages must be 1 or 2");
  std::mt19937 prng(input_seed);
  const std::uint64_t modulus = std::uint64_t{1} << entropy_bits;
  auto next = [&] { return static_cast<std::uint64_t>(prng()) % modulus; };

  Input in;
  in.seed = input_seed;
  in.entropy_bits = entropy_bits;
  in.pages = pages;
  for (auto& r : in.regs) r = next();
  in.flags = static_cast<std::uint8_t>(next() & kFlagMask);
  in.mem.resize(pages * kWordsPerPage);
  for (auto& w : in.mem) w = next();
  return in;
}

std::vector<Input> generate_inputs(std::size_t n, unsigned entropy_bits, std::uint64_t seed,
                                   std::size_t pages) {
  if (n == 0) throw ConfigError("at least one input is required");
  if (entropy_bits < kMinEntropyBits || entropy_bits > kMaxEntropyBits)
    throw ConfigError("entropy bits must be in [1, 32]");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937 master(seq);
  std::vector<Input> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(make_input(master(), entropy_bits, pages));
  return out;
}

}  // namespace mrf
