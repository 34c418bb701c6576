#include "hashing.hpp"

#include <bit>
#include <stdexcept>

namespace e91 {

namespace {

std::size_t word_count(std::size_t bits) { return (bits + 63) / 64; }

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

BitString::BitString(std::size_t size) : size_(size), words_(word_count(size), 0) {}

BitString BitString::from_hex(std::string_view hex, std::size_t size) {
  if (hex.size() != 2 * ((size + 7) / 8)) throw std::invalid_argument("BitString::from_hex: length mismatch");
  BitString out(size);
  for (std::size_t byte = 0; byte < hex.size() / 2; ++byte) {
    const int hi = hex_digit(hex[2 * byte]);
    const int lo = hex_digit(hex[2 * byte + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("BitString::from_hex: bad digit");
    const unsigned v = static_cast<unsigned>(hi * 16 + lo);
    for (std::size_t b = 0; b < 8; ++b) {
      const std::size_t k = byte * 8 + b;
      const bool bit = (v >> b) & 1U;
      if (k >= size) {
        if (bit) throw std::invalid_argument("BitString::from_hex: padding bits must be zero");
        continue;
      }
      out.set(k, bit);
    }
  }
  return out;
}

BitString BitString::random(std::size_t size, Rng& rng) {
  BitString out(size);
  for (auto& w : out.words_) w = rng.next_u64();
  if (size % 64 != 0) out.words_.back() &= (std::uint64_t{1} << (size % 64)) - 1;
  return out;
}

bool BitString::get(std::size_t k) const {
  if (k >= size_) throw std::out_of_range("BitString::get");
  return (words_[k / 64] >> (k % 64)) & 1U;
}

void BitString::set(std::size_t k, bool v) {
  if (k >= size_) throw std::out_of_range("BitString::set");
  const std::uint64_t mask = std::uint64_t{1} << (k % 64);
  if (v) {
    words_[k / 64] |= mask;
  } else {
    words_[k / 64] &= ~mask;
  }
}

void BitString::flip(std::size_t k) {
  if (k >= size_) throw std::out_of_range("BitString::flip");
  words_[k / 64] ^= std::uint64_t{1} << (k % 64);
}

std::uint64_t BitString::window(std::size_t pos) const {
  const std::size_t w = pos / 64;
  const unsigned shift = pos % 64;
  if (w >= words_.size()) return 0;
  std::uint64_t out = words_[w] >> shift;
  if (shift != 0 && w + 1 < words_.size()) out |= words_[w + 1] << (64 - shift);
  return out;
}

BitString& BitString::operator^=(const BitString& o) {
  if (o.size_ != size_) throw std::invalid_argument("BitString: xor of different lengths");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
  return *this;
}

std::size_t BitString::popcount() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::string BitString::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t bytes = (size_ + 7) / 8;
  std::string out;
  out.reserve(2 * bytes);
  for (std::size_t byte = 0; byte < bytes; ++byte) {
    const unsigned v = static_cast<unsigned>((words_[byte / 8] >> (8 * (byte % 8))) & 0xffU);
    out.push_back(kDigits[v >> 4]);
    out.push_back(kDigits[v & 0xfU]);
  }
  return out;
}

std::size_t hamming_distance(const BitString& a, const BitString& b) { return (a ^ b).popcount(); }

ToeplitzHash::ToeplitzHash(std::size_t in_len, std::size_t out_len, BitString diagonals,
                           std::uint64_t seed)
    : in_len_(in_len), out_len_(out_len), diagonals_(std::move(diagonals)), seed_(seed) {
  if (out_len_ == 0 || out_len_ > in_len_) throw std::invalid_argument("ToeplitzHash: need 0 < out_len <= in_len");
  if (diagonals_.size() != in_len_ + out_len_ - 1) {
    throw std::invalid_argument("ToeplitzHash: diagonal string has the wrong length");
  }
}

BitString ToeplitzHash::operator()(const BitString& x) const {
  if (x.size() != in_len_) throw std::invalid_argument("ToeplitzHash: input length mismatch");
  BitString y(out_len_);
  const auto& xw = x.words();
  for (std::size_t i = 0; i < out_len_; ++i) {
    const std::size_t start = out_len_ - 1 - i;
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < xw.size(); ++w) acc ^= diagonals_.window(start + 64 * w) & xw[w];
    if (std::popcount(acc) & 1) y.set(i, true);
  }
  return y;
}

ToeplitzHash toeplitz_from_seed(std::size_t in_len, std::size_t out_len, std::uint64_t seed) {
  if (out_len == 0 || out_len > in_len) throw std::invalid_argument("toeplitz_from_seed: need 0 < out_len <= in_len");
  Rng rng(seed);
  return ToeplitzHash(in_len, out_len, BitString::random(in_len + out_len - 1, rng), seed);
}

ToeplitzHash sample_hash(std::size_t in_len, std::size_t out_len, Rng& rng) {
  if (out_len == 0 || out_len > in_len) throw std::invalid_argument("sample_hash: need 0 < out_len <= in_len");
  return toeplitz_from_seed(in_len, out_len, rng.next_u64());
}

BitString hash(const ToeplitzHash& h, const BitString& x) { return h(x); }

}  // namespace e91
