#pragma once

// Toeplitz-matrix universal_2 hashing over GF(2).

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rng.hpp"

namespace e91 {

// Fixed-length bit string packed into 64-bit words; bit k lives in word k/64 at
// position k%64. Unused high bits of the last word are kept zero.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t size);
  // Little-endian within bytes: bit k is bit (k % 8) of byte k / 8.
  static BitString from_hex(std::string_view hex, std::size_t size);
  static BitString random(std::size_t size, Rng& rng);

  std::size_t size() const { return size_; }
  bool get(std::size_t k) const;
  void set(std::size_t k, bool v);
  void flip(std::size_t k);
  const std::vector<std::uint64_t>& words() const { return words_; }
  // 64 bits starting at bit offset `pos`; bits past the end read as zero.
  std::uint64_t window(std::size_t pos) const;

  BitString& operator^=(const BitString& o);
  friend BitString operator^(BitString a, const BitString& b) { return a ^= b; }
  friend bool operator==(const BitString& a, const BitString& b) = default;

  std::size_t popcount() const;
  std::string to_hex() const;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

std::size_t hamming_distance(const BitString& a, const BitString& b);

// y = T x with T[i][j] = diagonals[j - i + out_len - 1]; row i reads the
// diagonal string from offset out_len - 1 - i.
class ToeplitzHash {
 public:
  ToeplitzHash(std::size_t in_len, std::size_t out_len, BitString diagonals, std::uint64_t seed);

  std::size_t in_len() const { return in_len_; }
  std::size_t out_len() const { return out_len_; }
  std::uint64_t seed() const { return seed_; }
  const BitString& diagonals() const { return diagonals_; }

  BitString operator()(const BitString& x) const;

 private:
  std::size_t in_len_;
  std::size_t out_len_;
  BitString diagonals_;
  std::uint64_t seed_;
};

// The member of the family indexed by `seed`; diagonals are drawn from an
// mt19937_64 stream seeded with it.
ToeplitzHash toeplitz_from_seed(std::size_t in_len, std::size_t out_len, std::uint64_t seed);
// Draws a seed from `rng` and returns toeplitz_from_seed with it.
ToeplitzHash sample_hash(std::size_t in_len, std::size_t out_len, Rng& rng);

BitString hash(const ToeplitzHash& h, const BitString& x);

}  // namespace e91
