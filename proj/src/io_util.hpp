// Copyright 2026 The sanode Authors
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

#pragma once

// Byte-level helpers shared by the file formats.

#include "sanode/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace sanode::io {

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

inline std::string read_file(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(std::filesystem::path const &path, std::string_view bytes)
{
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("write failed for '" + path.string() + "'");
  }
}

/// Shortest text that reads back to the same double (17 significant digits).
inline std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view s, std::string const &context)
{
  std::string const text(s);
  char *end = nullptr;
  double const v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw CorruptFile("malformed number '" + text + "' in " + context);
  }
  return v;
}

inline long long parse_int(std::string_view s, std::string const &context)
{
  std::string const text(s);
  char *end = nullptr;
  long long const v = std::strtoll(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw CorruptFile("malformed integer '" + text + "' in " + context);
  }
  return v;
}

template <typename T> void put(std::string &out, T value)
{
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

/// Bounds-checked little-endian reader; running off the end throws CorruptFile.
class ByteReader
{
public:
  ByteReader(std::string_view bytes, std::string context)
    : bytes_(bytes)
    , context_(std::move(context))
  {
  }

  template <typename T> T get()
  {
    require(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n)
  {
    require(n);
    std::string_view const out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

  void expect_end() const
  {
    if (remaining() != 0) {
      throw CorruptFile(context_ + ": " + std::to_string(remaining()) + " unexpected trailing bytes");
    }
  }

private:
  void require(std::size_t n) const
  {
    if (bytes_.size() - pos_ < n) {
      throw CorruptFile(context_ + ": truncated");
    }
  }

  std::string_view bytes_;
  std::string context_;
  std::size_t pos_ = 0;
};

inline std::vector<std::string_view> split(std::string_view s, char sep)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t const end = s.find(sep, start);
    if (end == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
}

/// Lines without trailing '\r'; a final empty line is dropped.
inline std::vector<std::string_view> lines(std::string_view s)
{
  std::vector<std::string_view> out = split(s, '\n');
  if (!out.empty() && out.back().empty()) {
    out.pop_back();
  }
  for (auto &l : out) {
    if (!l.empty() && l.back() == '\r') {
      l.remove_suffix(1);
    }
  }
  return out;
}

} // namespace sanode::io
