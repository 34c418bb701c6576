#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "hashing.hpp"

using namespace e91;

namespace {

// Direct matrix-vector product with T[i][j] = d[j - i + out - 1].
BitString naive_hash(const ToeplitzHash& h, const BitString& x) {
  BitString y(h.out_len());
  for (std::size_t i = 0; i < h.out_len(); ++i) {
    bool acc = false;
    for (std::size_t j = 0; j < h.in_len(); ++j) acc ^= h.diagonals().get(j + h.out_len() - 1 - i) && x.get(j);
    y.set(i, acc);
  }
  return y;
}

}  // namespace

TEST_CASE("bit strings") {
  BitString b(70);
  CHECK(b.size() == 70);
  CHECK(b.popcount() == 0);
  b.set(0, true);
  b.set(69, true);
  b.flip(3);
  CHECK(b.get(0));
  CHECK(b.get(3));
  CHECK(b.get(69));
  CHECK(b.popcount() == 3);
  CHECK_THROWS_AS(b.get(70), std::out_of_range);
  CHECK_THROWS_AS(b.set(70, true), std::out_of_range);

  // Little-endian within bytes.
  BitString c(12);
  c.set(0, true);
  c.set(9, true);
  CHECK(c.to_hex() == "0102");
  CHECK(BitString::from_hex("0102", 12) == c);
  CHECK_THROWS_AS(BitString::from_hex("0112", 12), std::invalid_argument);  // padding bit set
  CHECK_THROWS_AS(BitString::from_hex("01", 12), std::invalid_argument);
  CHECK_THROWS_AS(BitString::from_hex("0g02", 12), std::invalid_argument);

  Rng rng(3);
  for (std::size_t n : {1u, 7u, 64u, 65u, 200u}) {
    const auto r = BitString::random(n, rng);
    CHECK(BitString::from_hex(r.to_hex(), n) == r);
  }
  const auto x = BitString::random(100, rng), y = BitString::random(100, rng);
  CHECK(hamming_distance(x, y) == (x ^ y).popcount());
  CHECK(hamming_distance(x, x) == 0);
  CHECK_THROWS_AS(x ^ BitString(99), std::invalid_argument);
}

TEST_CASE("windows read across word boundaries") {
  Rng rng(9);
  const auto b = BitString::random(150, rng);
  for (std::size_t pos : {0u, 1u, 63u, 64u, 100u, 149u, 150u, 500u}) {
    const std::uint64_t w = b.window(pos);
    for (std::size_t k = 0; k < 64; ++k) {
      const bool expected = pos + k < 150 && b.get(pos + k);
      REQUIRE(((w >> k) & 1U) == static_cast<std::uint64_t>(expected));
    }
  }
}

TEST_CASE("Toeplitz hash matches the matrix definition") {
  Rng rng(21);
  for (auto [in, out] : {std::pair<std::size_t, std::size_t>{8, 3}, {32, 12}, {64, 64}, {130, 30}, {1000, 77}}) {
    const auto h = sample_hash(in, out, rng);
    for (int t = 0; t < 20; ++t) {
      const auto x = BitString::random(in, rng);
      REQUIRE(h(x) == naive_hash(h, x));
    }
  }
}

TEST_CASE("hash family contract") {
  Rng a(5), b(5);
  const auto h1 = sample_hash(8, 3, a);
  const auto h2 = sample_hash(8, 3, b);
  CHECK(h1.diagonals() == h2.diagonals());
  CHECK(h1.seed() == h2.seed());
  CHECK(toeplitz_from_seed(8, 3, h1.seed()).diagonals() == h1.diagonals());
  CHECK_NOTHROW(sample_hash(16, 16, a));
  CHECK_THROWS_AS(sample_hash(16, 0, a), std::invalid_argument);
  CHECK_THROWS_AS(sample_hash(16, 17, a), std::invalid_argument);
  CHECK_THROWS_AS(ToeplitzHash(8, 3, BitString(9), 0), std::invalid_argument);
  CHECK_THROWS_AS(h1(BitString(9)), std::invalid_argument);
}

TEST_CASE("hashing is GF(2) linear") {
  Rng rng(8);
  const auto h = sample_hash(257, 40, rng);
  CHECK(hash(h, BitString(257)) == BitString(40));
  for (int t = 0; t < 1000; ++t) {
    const auto x = BitString::random(257, rng), y = BitString::random(257, rng);
    REQUIRE(hash(h, x ^ y) == (hash(h, x) ^ hash(h, y)));
  }
}

TEST_CASE("collision frequency respects the universal_2 bound") {
  Rng rng(1234);
  const std::size_t in = 32;
  const auto x = BitString::random(in, rng);
  auto xp = x;
  xp.flip(5);
  xp.flip(17);
  const int trials = 100000;
  for (std::size_t out : {4u, 8u, 12u}) {
    int collisions = 0;
    for (int t = 0; t < trials; ++t) {
      const auto h = sample_hash(in, out, rng);
      collisions += h(x) == h(xp);
    }
    const double bound = std::ldexp(1.0, -static_cast<int>(out));
    const double sigma = std::sqrt(bound * (1.0 - bound) / trials);
    CHECK_MESSAGE(collisions / static_cast<double>(trials) <= bound + 3.0 * sigma, "out_len " << out);
  }
}
