// Copyright 2026 The slsdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian byte packing shared by the binary formats.

#ifndef SLS_SRC_BYTE_IO_HPP
#define SLS_SRC_BYTE_IO_HPP

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "sls/error.hpp"

namespace sls::detail {

template <typename UInt>
void put_le(std::ostream& out, UInt value) {
  static_assert(std::is_unsigned_v<UInt>);
  char bytes[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i)
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes, sizeof(UInt));
}

inline void put_f32(std::ostream& out, float v) {
  put_le(out, std::bit_cast<std::uint32_t>(v));
}

inline void put_f64(std::ostream& out, double v) {
  put_le(out, std::bit_cast<std::uint64_t>(v));
}

template <typename UInt>
UInt decode_le(const unsigned char* bytes) noexcept {
  UInt value = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i)
    value |= static_cast<UInt>(bytes[i]) << (8 * i);
  return value;
}

/// Reads exactly sizeof(UInt) bytes or throws DataError(`what_if_short`).
template <typename UInt>
UInt get_le(std::istream& in, const char* what_if_short) {
  unsigned char bytes[sizeof(UInt)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(UInt));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(UInt)))
    throw DataError(what_if_short);
  return decode_le<UInt>(bytes);
}

inline double get_f64(std::istream& in, const char* what_if_short) {
  return std::bit_cast<double>(get_le<std::uint64_t>(in, what_if_short));
}

/// True when no further byte can be read from `in`.
inline bool at_end(std::istream& in) {
  return in.peek() == std::char_traits<char>::eof();
}

}  // namespace sls::detail

#endif  // SLS_SRC_BYTE_IO_HPP
