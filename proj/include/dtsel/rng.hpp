#pragma once

#include <cstdint>
#include <random>

namespace dtsel {

using Rng = std::mt19937_64;

/// Independent generator for (master seed, stream index); replicate k of a
/// study always sees the same stream whatever the scheduling.
inline Rng make_stream(std::uint64_t master, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

}  // namespace dtsel
