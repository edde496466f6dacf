#pragma once

// 16-bit PCM mono WAV files.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "styletalk/dialog.hpp"
#include "styletalk/error.hpp"

namespace styletalk {

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}
inline std::uint32_t get_u32(const std::string& b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[at + static_cast<std::size_t>(i)]);
  return v;
}
inline std::uint16_t get_u16(const std::string& b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) | (static_cast<unsigned char>(b[at + 1]) << 8));
}

// Writes to a sibling temporary file, then renames over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + tmp.string() + "'");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("cannot write '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace detail

inline std::string encode_wav(const AudioClip& clip) {
  const auto n = static_cast<std::uint32_t>(clip.size());
  std::string out;
  out.reserve(44 + 2 * static_cast<std::size_t>(n));
  out += "RIFF";
  detail::put_u32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);
  detail::put_u16(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(clip.sample_rate()));
  detail::put_u32(out, static_cast<std::uint32_t>(clip.sample_rate()) * 2);
  detail::put_u16(out, 2);
  detail::put_u16(out, 16);
  out += "data";
  detail::put_u32(out, 2 * n);
  for (double s : clip.samples()) {
    const auto q = static_cast<std::int16_t>(std::lround(std::clamp(s, -1.0, 1.0) * 32767.0));
    detail::put_u16(out, static_cast<std::uint16_t>(q));
  }
  return out;
}

inline AudioClip decode_wav(const std::string& b, std::optional<std::string> source_id = std::nullopt) {
  if (b.size() < 12 || b.compare(0, 4, "RIFF") != 0 || b.compare(8, 4, "WAVE") != 0)
    throw IoError("not a RIFF/WAVE file");
  std::size_t at = 12;
  int rate = 0;
  bool have_fmt = false;
  while (at + 8 <= b.size()) {
    const std::string id = b.substr(at, 4);
    const std::uint32_t len = detail::get_u32(b, at + 4);
    const std::size_t body = at + 8;
    if (body + len > b.size()) throw IoError("truncated WAV chunk '" + id + "'");
    if (id == "fmt ") {
      if (len < 16) throw IoError("short fmt chunk");
      if (detail::get_u16(b, body) != 1) throw IoError("only PCM WAV is supported");
      if (detail::get_u16(b, body + 2) != 1) throw IoError("only mono WAV is supported");
      if (detail::get_u16(b, body + 14) != 16) throw IoError("only 16-bit WAV is supported");
      rate = static_cast<int>(detail::get_u32(b, body + 4));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw IoError("data chunk before fmt chunk");
      std::vector<double> x(len / 2);
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::max(-1.0, static_cast<std::int16_t>(detail::get_u16(b, body + 2 * i)) / 32767.0);
      return AudioClip(rate, std::move(x), std::move(source_id));
    }
    at = body + len + (len & 1);
  }
  throw IoError("WAV file has no data chunk");
}

inline void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  detail::write_file_atomic(path, encode_wav(clip));
}

inline AudioClip read_wav(const std::filesystem::path& path, std::optional<std::string> source_id = std::nullopt) {
  try {
    return decode_wav(detail::read_file(path), std::move(source_id));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace styletalk
