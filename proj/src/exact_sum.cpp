#include "erase/exact_sum.hpp"

#include <bit>
#include <cmath>

#include "erase/errors.hpp"

namespace erase {
namespace {

using Words = std::array<std::uint64_t, ExactSum::kWords>;

void negate(Words& w) {
  std::uint64_t carry = 1;
  for (auto& word : w) {
    word = ~word + carry;
    carry = (carry == 1 && word == 0) ? 1 : 0;
  }
}

// 64 bits of |w| starting at bit `start` (may be negative).
std::uint64_t bits_from(const Words& w, int start) {
  std::uint64_t out = 0;
  for (int i = 0; i < 64; ++i) {
    const int bit = start + i;
    if (bit < 0 || bit >= static_cast<int>(ExactSum::kWords * 64)) continue;
    if ((w[static_cast<std::size_t>(bit) / 64] >> (bit % 64)) & 1ULL) out |= 1ULL << i;
  }
  return out;
}

bool any_below(const Words& w, int bit) {
  for (int b = 0; b < bit; ++b) {
    if ((w[static_cast<std::size_t>(b) / 64] >> (b % 64)) & 1ULL) return true;
  }
  return false;
}

}  // namespace

void ExactSum::accumulate(float x, bool negate_term) {
  if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteInput, "non-finite summand");
  const auto bits = std::bit_cast<std::uint32_t>(x);
  const bool sign = (bits >> 31) != 0;
  const std::uint32_t exponent = (bits >> 23) & 0xFF;
  std::uint64_t mant = bits & 0x7FFFFF;
  unsigned shift = 0;
  if (exponent != 0) {
    mant |= 1ULL << 23;
    shift = exponent - 1;
  }
  if (mant == 0) return;

  const std::size_t word = shift / 64;
  const unsigned bit = shift % 64;
  Words term{};
  term[word] = mant << bit;
  if (bit > 40 && word + 1 < kWords) term[word + 1] = mant >> (64 - bit);
  if (sign != negate_term) negate(term);

  std::uint64_t carry = 0;
  for (std::size_t i = 0; i < kWords; ++i) {
    const std::uint64_t a = words_[i];
    const std::uint64_t s = a + term[i];
    const std::uint64_t c1 = s < a ? 1 : 0;
    const std::uint64_t r = s + carry;
    const std::uint64_t c2 = r < s ? 1 : 0;
    words_[i] = r;
    carry = c1 | c2;
  }
}

bool ExactSum::is_zero() const {
  for (auto w : words_) {
    if (w != 0) return false;
  }
  return true;
}

double ExactSum::to_double() const {
  Words mag = words_;
  const bool negative = (mag[kWords - 1] >> 63) != 0;
  if (negative) negate(mag);

  int top = -1;
  for (int i = static_cast<int>(kWords) - 1; i >= 0 && top < 0; --i) {
    if (mag[static_cast<std::size_t>(i)] != 0) {
      top = i * 64 + 63 - std::countl_zero(mag[static_cast<std::size_t>(i)]);
    }
  }
  if (top < 0) return 0.0;

  // Take the leading 64 bits and fold everything below into a sticky bit;
  // the u64 -> double conversion then rounds to nearest-even correctly.
  const int start = top - 63;
  std::uint64_t lead = bits_from(mag, start);
  if (start > 0 && any_below(mag, start)) lead |= 1ULL;
  const double value = std::ldexp(static_cast<double>(lead), start - 149);
  return negative ? -value : value;
}

std::string ExactSum::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(kWords * 16);
  for (int i = static_cast<int>(kWords) - 1; i >= 0; --i) {
    for (int nib = 15; nib >= 0; --nib) {
      out.push_back(kDigits[(words_[static_cast<std::size_t>(i)] >> (nib * 4)) & 0xF]);
    }
  }
  return out;
}

ExactSum ExactSum::from_hex(std::string_view hex) {
  if (hex.size() != kWords * 16) throw Error(ErrorCode::SnapshotFormat, "exact sum hex has wrong length");
  ExactSum out;
  for (std::size_t i = 0; i < kWords; ++i) {
    std::uint64_t w = 0;
    for (std::size_t nib = 0; nib < 16; ++nib) {
      const char c = hex[i * 16 + nib];
      std::uint64_t v = 0;
      if (c >= '0' && c <= '9') {
        v = static_cast<std::uint64_t>(c - '0');
      } else if (c >= 'a' && c <= 'f') {
        v = static_cast<std::uint64_t>(c - 'a' + 10);
      } else {
        throw Error(ErrorCode::SnapshotFormat, "bad hex digit in exact sum");
      }
      w = (w << 4) | v;
    }
    out.words_[kWords - 1 - i] = w;
  }
  return out;
}

}  // namespace erase
