#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "gkm/error.hpp"

namespace gkm::detail {

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    bytes[b] = static_cast<char>((value >> (8 * b)) & 0xFFu);
  }
  out.write(bytes.data(), bytes.size());
}

inline void put_f64(std::ostream& out, double value) {
  put_le(out, std::bit_cast<std::uint64_t>(value));
}

template <typename T>
T get_le(std::istream& in) {
  static_assert(std::is_unsigned_v<T>);
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw FormatError("unexpected end of binary stream");
  T value = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) value |= static_cast<T>(bytes[b]) << (8 * b);
  return value;
}

inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

inline void put_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  std::array<char, 4> got{};
  in.read(got.data(), got.size());
  if (!in || std::string_view(got.data(), got.size()) != magic) {
    throw FormatError("bad magic, expected \"" + std::string(magic) + "\"");
  }
}

}  // namespace gkm::detail
