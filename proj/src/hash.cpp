#include "whatif/hash.hpp"

#include <bit>
#include <random>

#include "whatif/core.hpp"

namespace whatif {

namespace {

bool is_prime(std::uint64_t v) {
  if (v < 2) return false;
  if (v % 2 == 0) return v == 2;
  for (std::uint64_t d = 3; d * d <= v; d += 2)
    if (v % d == 0) return false;
  return true;
}

}  // namespace

std::uint64_t smallest_prime_above(std::uint64_t v) {
  std::uint64_t c = v + 1;
  while (!is_prime(c)) ++c;
  return c;
}

std::vector<PairwiseHash> draw_family(std::uint64_t seed, std::size_t count, unsigned bits) {
  if (count == 0) throw Error(ErrorCode::InvalidCount, "hash family needs at least one function");
  if (bits < 1 || bits > kMaxHashBits)
    throw Error(ErrorCode::InvalidArgument, "hash width must be in [1, 48]");
  const std::uint64_t p = smallest_prime_above(std::uint64_t{1} << bits);
  std::mt19937_64 gen = substream(seed, {stream::kCount, bits});
  std::uniform_int_distribution<std::uint64_t> pick_a(1, p - 1);
  std::uniform_int_distribution<std::uint64_t> pick_b(0, p - 1);
  std::vector<PairwiseHash> family;
  family.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    PairwiseHash h;
    h.a = pick_a(gen);
    h.b = pick_b(gen);
    h.p = p;
    h.bits = bits;
    family.push_back(h);
  }
  return family;
}

unsigned trail(std::uint64_t v, unsigned bits) {
  if (v == 0) return bits;
  return static_cast<unsigned>(std::countr_zero(v));
}

unsigned domain_bits(std::size_t n) {
  if (n <= 1) return 1;
  return static_cast<unsigned>(std::bit_width(n - 1)) + 1;
}

}  // namespace whatif
