#ifndef GVCOD_GVF_HPP_
#define GVCOD_GVF_HPP_

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gvcod/errors.hpp"
#include "gvcod/tensor.hpp"

namespace gvcod {

// GVF1 tensor file, little-endian:
//   magic "GVF1" | u8 version=1 | u8 dtype=0 (f32) | u16 reserved=0
//   u32 H | u32 W | u32 C | H*W*C f32, row-major channel-last.
namespace gvf_detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  out.append(b, 4);
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace gvf_detail

inline std::string gvf_encode(const Tensor3& t) {
  std::string out;
  out.reserve(20 + t.size() * 4);
  out.append("GVF1", 4);
  out.push_back(1);  // version
  out.push_back(0);  // dtype f32
  out.push_back(0);
  out.push_back(0);  // reserved
  gvf_detail::put_u32(out, static_cast<std::uint32_t>(t.height));
  gvf_detail::put_u32(out, static_cast<std::uint32_t>(t.width));
  gvf_detail::put_u32(out, static_cast<std::uint32_t>(t.channels));
  static_assert(sizeof(float) == 4);
  const std::size_t bytes = t.size() * 4;
  const std::size_t head = out.size();
  out.resize(head + bytes);
  std::memcpy(out.data() + head, t.data.data(), bytes);
  return out;
}

inline Tensor3 gvf_decode(const std::string& bytes, const std::string& what) {
  if (bytes.size() < 20) fail("io", "truncated GVF1 file: " + what);
  if (std::memcmp(bytes.data(), "GVF1", 4) != 0)
    fail("io", "not a GVF1 file: " + what);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (p[4] != 1) fail("io", "unsupported GVF1 version: " + what);
  if (p[5] != 0) fail("io", "unsupported GVF1 dtype: " + what);
  const std::uint32_t h = gvf_detail::get_u32(p + 8);
  const std::uint32_t w = gvf_detail::get_u32(p + 12);
  const std::uint32_t c = gvf_detail::get_u32(p + 16);
  if (h == 0 || w == 0 || c == 0) fail("io", "empty GVF1 tensor: " + what);
  const std::size_t want = static_cast<std::size_t>(h) * w * c * 4;
  if (bytes.size() != 20 + want) fail("io", "truncated GVF1 file: " + what);
  Tensor3 t(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
  std::memcpy(t.data.data(), bytes.data() + 20, want);
  ensure_finite(t, what);
  return t;
}

inline void gvf_write(const std::filesystem::path& path, const Tensor3& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail("io", "cannot open for writing: " + path.string());
  const std::string bytes = gvf_encode(t);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail("io", "write failed: " + path.string());
}

inline Tensor3 gvf_read(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail("io", "cannot open: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  return gvf_decode(bytes, path.string());
}

}  // namespace gvcod

#endif  // GVCOD_GVF_HPP_
