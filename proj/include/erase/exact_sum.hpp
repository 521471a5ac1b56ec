#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace erase {

// Exact running sum of binary32 values: a 384-bit two's-complement fixed
// point number whose least significant bit is 2^-149 (the smallest float
// subnormal). Every float is representable, addition and removal commute
// exactly, and up to 2^100 maximal-magnitude terms fit without overflow.
//
// Cluster sums use this so that downdating by subtraction yields the same
// bits as summing the survivors from scratch, in any order.
class ExactSum {
 public:
  static constexpr std::size_t kWords = 6;

  void add(float x) { accumulate(x, false); }
  void subtract(float x) { accumulate(x, true); }

  // Correctly rounded (nearest-even) conversion.
  double to_double() const;
  bool is_zero() const;

  // 96 hex digits, most significant word first.
  std::string to_hex() const;
  static ExactSum from_hex(std::string_view hex);

  bool operator==(const ExactSum&) const = default;

 private:
  void accumulate(float x, bool negate);

  std::array<std::uint64_t, kWords> words_{};
};

}  // namespace erase
