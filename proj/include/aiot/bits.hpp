#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aiot/errors.hpp"

namespace aiot {

using BitVec = std::vector<std::uint8_t>;  ///< one 0/1 value per entry

inline void append_byte_lsb_first(BitVec& bits, std::uint8_t b) {
  for (int i = 0; i < 8; ++i) bits.push_back((b >> i) & 1u);
}

inline void append_byte_msb_first(BitVec& bits, std::uint8_t b) {
  for (int i = 7; i >= 0; --i) bits.push_back((b >> i) & 1u);
}

/// Appends the low `n_bits` of `value`, most significant first.
inline void append_uint_msb_first(BitVec& bits, std::uint64_t value, int n_bits) {
  for (int i = n_bits - 1; i >= 0; --i) bits.push_back((value >> i) & 1u);
}

/// Reads `n_bits` MSB-first starting at `pos`.
inline std::uint64_t read_uint_msb_first(const BitVec& bits, std::size_t pos,
                                         int n_bits) {
  std::uint64_t v = 0;
  for (int i = 0; i < n_bits; ++i) v = (v << 1) | bits[pos + i];
  return v;
}

/// Hex rendering of an MSB-first bit vector; length is padded up to a nibble.
inline std::string bits_to_hex(const BitVec& bits) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  std::size_t i = 0;
  while (i < bits.size()) {
    int nibble = 0;
    for (int j = 0; j < 4; ++j) {
      nibble <<= 1;
      if (i < bits.size()) nibble |= bits[i++];
    }
    out.push_back(digits[nibble]);
  }
  return out;
}

inline BitVec hex_to_bits(const std::string& hex) {
  BitVec bits;
  for (char c : hex) {
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else throw ArgumentError(std::string("hex_to_bits: invalid hex digit '") + c + "'");
    for (int i = 3; i >= 0; --i) bits.push_back((v >> i) & 1u);
  }
  return bits;
}

}  // namespace aiot
