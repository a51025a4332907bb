#pragma once

// Little-endian binary IO helpers shared by the MGPD/MGPC file readers and
// writers. Byte order is pinned by construction, not by host assumptions.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "mgp/errors.hpp"

namespace mgp::wire {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is, const char* what) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (is.gcount() != 4) raise(ErrorKind::TruncatedFile, std::string(what) + ": short read");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f32(std::ostream& os, std::span<const float> v) {
  static_assert(sizeof(float) == 4);
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * 4));
  } else {
    for (float f : v) put_u32(os, std::bit_cast<std::uint32_t>(f));
  }
}

inline void get_f32(std::istream& is, std::span<float> v, const char* what) {
  if constexpr (std::endian::native == std::endian::little) {
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * 4));
    if (is.gcount() != static_cast<std::streamsize>(v.size() * 4))
      raise(ErrorKind::TruncatedFile, std::string(what) + ": payload short read");
  } else {
    for (float& f : v) f = std::bit_cast<float>(get_u32(is, what));
  }
}

inline void put_bytes(std::ostream& os, std::string_view s) {
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_bytes(std::istream& is, std::size_t n, const char* what) {
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (is.gcount() != static_cast<std::streamsize>(n))
    raise(ErrorKind::TruncatedFile, std::string(what) + ": block short read");
  return s;
}

}  // namespace mgp::wire
