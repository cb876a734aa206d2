#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace whatif {

// h(x) = ((a*x + b) mod p) mod 2^bits, p the smallest prime above 2^bits.
struct PairwiseHash {
  std::uint64_t a = 1;
  std::uint64_t b = 0;
  std::uint64_t p = 2;
  unsigned bits = 1;

  std::uint64_t operator()(std::uint64_t x) const {
    const unsigned __int128 v = static_cast<unsigned __int128>(a) * x + b;
    return static_cast<std::uint64_t>(v % p) & ((std::uint64_t{1} << bits) - 1);
  }

  bool operator==(const PairwiseHash&) const = default;
};

inline constexpr unsigned kMaxHashBits = 48;

std::uint64_t smallest_prime_above(std::uint64_t v);

// Deterministic in (seed, count, bits). Throws InvalidCount for count == 0.
std::vector<PairwiseHash> draw_family(std::uint64_t seed, std::size_t count, unsigned bits);

// Trailing zero bits of v; trail(0, bits) == bits.
unsigned trail(std::uint64_t v, unsigned bits);

// Hash width for a domain of n identifiers: ceil(log2 n) + 1.
unsigned domain_bits(std::size_t n);

}  // namespace whatif
