#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "whatif/core.hpp"
#include "whatif/hash.hpp"

using namespace whatif;

TEST(Hash, FamilyIsDeterministic) {
  EXPECT_EQ(draw_family(7, 3, 16), draw_family(7, 3, 16));
  EXPECT_NE(draw_family(7, 3, 16), draw_family(8, 3, 16));
}

TEST(Hash, CountZeroIsInvalid) {
  try {
    draw_family(1, 0, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidCount);
  }
}

TEST(Hash, PrimeAboveDomain) {
  EXPECT_EQ(smallest_prime_above(16), 17u);
  EXPECT_EQ(smallest_prime_above(1024), 1031u);
  EXPECT_EQ(smallest_prime_above(std::uint64_t{1} << 16), 65537u);
  for (const auto& h : draw_family(3, 16, 10)) {
    EXPECT_EQ(h.p, 1031u);
    EXPECT_GE(h.a, 1u);
    EXPECT_LT(h.a, h.p);
    EXPECT_LT(h.b, h.p);
  }
}

TEST(Hash, Trail) {
  EXPECT_EQ(trail(8, 16), 3u);
  EXPECT_EQ(trail(5, 16), 0u);
  EXPECT_EQ(trail(0, 16), 16u);
  for (std::uint64_t v = 1; v < 5000; ++v) EXPECT_EQ(v % (std::uint64_t{1} << trail(v, 16)), 0u);
}

TEST(Hash, DomainBits) {
  EXPECT_EQ(domain_bits(1), 1u);
  EXPECT_EQ(domain_bits(1000), 11u);
  EXPECT_EQ(domain_bits(1024), 11u);
  EXPECT_EQ(domain_bits(1025), 12u);
}

namespace {

// For x != y and a != 0, (a x + b, a y + b) mod p is uniform over ordered pairs of distinct
// residues, so the joint law of the reduced outputs follows by enumeration.
std::vector<double> exact_joint(std::uint64_t p, unsigned bits) {
  const std::uint64_t m = std::uint64_t{1} << bits;
  std::vector<double> out(m * m, 0.0);
  for (std::uint64_t u = 0; u < p; ++u)
    for (std::uint64_t v = 0; v < p; ++v)
      if (u != v) out[(u % m) * m + v % m] += 1.0 / static_cast<double>(p * (p - 1));
  return out;
}

}  // namespace

TEST(Hash, CollisionRateWithinUniversalBound) {
  for (unsigned bits : {3u, 6u}) {
    const auto family = draw_family(99, 2000, bits);
    const auto joint = exact_joint(family[0].p, bits);
    double exact = 0.0;
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << bits); ++v) exact += joint[v * (std::uint64_t{1} << bits) + v];
    EXPECT_LE(exact, 1.0 / static_cast<double>(1u << bits));
    std::size_t collisions = 0, trials = 0;
    for (const auto& h : family)
      for (std::uint64_t x = 0; x < 20; ++x, ++trials) collisions += h(x) == h(x + 7);
    const double rate = static_cast<double>(collisions) / static_cast<double>(trials);
    EXPECT_NEAR(rate, exact, 4.0 * std::sqrt(exact / static_cast<double>(trials)) + 1e-3);
  }
}

TEST(Hash, PairwiseJointDistribution) {
  const unsigned bits = 3;
  const std::size_t draws = 64000;
  const auto family = draw_family(1234, draws, bits);
  std::vector<std::size_t> hist(64, 0);
  for (const auto& h : family) ++hist[h(2) * 8 + h(5)];
  const auto joint = exact_joint(family[0].p, bits);
  for (std::size_t c = 0; c < hist.size(); ++c) {
    const double expect = joint[c] * static_cast<double>(draws);
    EXPECT_NEAR(static_cast<double>(hist[c]), expect, 5.0 * std::sqrt(expect) + 1.0) << "cell " << c;
  }
}
