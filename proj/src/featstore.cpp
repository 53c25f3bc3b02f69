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

#include "sls/featstore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "byte_io.hpp"
#include "sls/error.hpp"

namespace sls {
namespace {

constexpr char kMagic[4] = {'H', 'S', 'T', 'K'};
constexpr std::size_t kChunkFloats = std::size_t{1} << 18;

bool valid_utf8(std::string_view s) noexcept {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    if (c < 0x80) extra = 0;
    else if ((c >> 5) == 0x6 && c >= 0xC2) extra = 1;
    else if ((c >> 4) == 0xE) extra = 2;
    else if ((c >> 3) == 0x1E && c <= 0xF4) extra = 3;
    else return false;
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k)
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    i += extra + 1;
  }
  return true;
}

}  // namespace

bool is_valid_utterance_id(std::string_view id) noexcept {
  if (id.empty() || id == "." || id == "..") return false;
  for (char ch : id) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x20 || c == 0x7F || c == ' ' || c == '/' || c == '\\')
      return false;
  }
  return valid_utf8(id);
}

HiddenStack::HiddenStack(std::string utterance_id, std::uint32_t layers,
                         std::uint32_t frames, std::uint32_t dim,
                         std::vector<float> values)
    : id_(std::move(utterance_id)),
      layers_(layers),
      frames_(frames),
      dim_(dim),
      values_(std::move(values)) {
  if (!is_valid_utterance_id(id_))
    throw DataError("invalid utterance id '" + id_ + "'");
  if (layers_ == 0 || frames_ == 0 || dim_ == 0)
    throw DataError("stack '" + id_ + "': dimensions must be positive, got L=" +
                    std::to_string(layers_) + " N=" + std::to_string(frames_) +
                    " D=" + std::to_string(dim_));
  const std::size_t expected = std::size_t{layers_} * frames_ * dim_;
  if (values_.size() != expected)
    throw DataError("stack '" + id_ + "': expected " + std::to_string(expected) +
                    " values, got " + std::to_string(values_.size()));
  if (!std::all_of(values_.begin(), values_.end(),
                   [](float v) { return std::isfinite(v); }))
    throw DataError("stack '" + id_ + "': corrupt values (non-finite entry)");
}

bool operator==(const HiddenStack& a, const HiddenStack& b) noexcept {
  return a.id_ == b.id_ && a.layers_ == b.layers_ && a.frames_ == b.frames_ &&
         a.dim_ == b.dim_ && a.values_.size() == b.values_.size() &&
         std::memcmp(a.values_.data(), b.values_.data(),
                     a.values_.size() * sizeof(float)) == 0;
}

std::uint64_t write_hstk(const HiddenStack& stack, std::ostream& out) {
  const std::string& id = stack.utterance_id();
  if (id.size() > std::numeric_limits<std::uint16_t>::max())
    throw DataError("utterance id longer than 65535 bytes");
  out.write(kMagic, sizeof(kMagic));
  detail::put_le<std::uint16_t>(out, kHstkVersion);
  detail::put_le<std::uint16_t>(out, 0);
  detail::put_le<std::uint32_t>(out, stack.layers());
  detail::put_le<std::uint32_t>(out, stack.frames());
  detail::put_le<std::uint32_t>(out, stack.dim());
  detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
  out.write(id.data(), static_cast<std::streamsize>(id.size()));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(stack.values().data()),
              static_cast<std::streamsize>(stack.values().size_bytes()));
  } else {
    for (float v : stack.values()) detail::put_f32(out, v);
  }
  if (!out) throw DataError("HSTK write failed");
  return kHstkFixedHeaderBytes + id.size() + stack.values().size_bytes();
}

HiddenStack read_hstk(std::istream& in) {
  char magic[4];
  in.read(magic, sizeof(magic));
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not an HSTK file");
  const auto version = detail::get_le<std::uint16_t>(in, "truncated");
  if (version != kHstkVersion)
    throw DataError("unsupported version " + std::to_string(version));
  const auto flags = detail::get_le<std::uint16_t>(in, "truncated");
  if (flags != 0) throw DataError("unsupported flags " + std::to_string(flags));
  const auto layers = detail::get_le<std::uint32_t>(in, "truncated");
  const auto frames = detail::get_le<std::uint32_t>(in, "truncated");
  const auto dim = detail::get_le<std::uint32_t>(in, "truncated");
  const auto id_len = detail::get_le<std::uint16_t>(in, "truncated");
  if (layers == 0 || frames == 0 || dim == 0)
    throw DataError("invalid dimensions (zero extent)");

  std::string id(id_len, '\0');
  in.read(id.data(), id_len);
  if (in.gcount() != id_len) throw DataError("truncated");
  if (!is_valid_utterance_id(id)) throw DataError("invalid utterance id");

  const unsigned __int128 count =
      static_cast<unsigned __int128>(layers) * frames * dim;
  if (count > std::numeric_limits<std::size_t>::max() / sizeof(float))
    throw DataError("truncated");
  const auto total = static_cast<std::size_t>(count);

  // Grow in chunks so a corrupt header cannot force a huge allocation.
  std::vector<float> values;
  std::vector<unsigned char> buffer;
  while (values.size() < total) {
    const std::size_t want = std::min(kChunkFloats, total - values.size());
    buffer.resize(want * sizeof(float));
    in.read(reinterpret_cast<char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size()));
    if (in.gcount() != static_cast<std::streamsize>(buffer.size()))
      throw DataError("truncated");
    const std::size_t base = values.size();
    values.resize(base + want);
    for (std::size_t i = 0; i < want; ++i)
      values[base + i] = std::bit_cast<float>(
          detail::decode_le<std::uint32_t>(buffer.data() + 4 * i));
  }
  if (!detail::at_end(in)) throw DataError("trailing bytes after payload");
  if (!std::all_of(values.begin(), values.end(),
                   [](float v) { return std::isfinite(v); }))
    throw DataError("corrupt values");
  return HiddenStack(std::move(id), layers, frames, dim, std::move(values));
}

std::uint64_t write_hstk_file(const HiddenStack& stack,
                              const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  try {
    const auto bytes = write_hstk(stack, out);
    out.flush();
    if (!out) throw DataError("write failed");
    return bytes;
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

HiddenStack read_hstk_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open");
  try {
    return read_hstk(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::filesystem::path hstk_path(const std::filesystem::path& dir,
                                std::string_view utterance_id) {
  return dir / (std::string(utterance_id) + ".hstk");
}

}  // namespace sls
