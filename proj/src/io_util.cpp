// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#include "leakaudit/io_util.hpp"

#include <zlib.h>

#include <fstream>
#include <random>
#include <system_error>

#include "leakaudit/error.hpp"

namespace leakaudit {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw IoError("read failed on " + path.string());
  }
  return data;
}

void atomic_write(const std::filesystem::path& path, const std::string& data) {
  namespace fs = std::filesystem;
  fs::path dir = path.parent_path();
  if (dir.empty()) {
    dir = ".";
  }
  // Unique temp name in the same directory so rename stays on one filesystem.
  static std::mt19937_64 rng{std::random_device{}()};
  fs::path tmp = dir / (path.filename().string() + ".tmp" +
                        std::to_string(rng() & 0xffffffu));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot create " + tmp.string());
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed on " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("rename to " + path.string() + " failed: " + ec.message());
  }
}

std::uint32_t crc32_of(const void* data, std::size_t len) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  const auto* p = static_cast<const Bytef*>(data);
  // zlib takes uInt lengths; feed large buffers in chunks.
  while (len > 0) {
    const uInt chunk =
        len > 0x40000000u ? 0x40000000u : static_cast<uInt>(len);
    crc = ::crc32(crc, p, chunk);
    p += chunk;
    len -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint32_t crc32_of_file(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  return crc32_of(data.data(), data.size());
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    std::size_t end = (nl == std::string::npos) ? text.size() : nl;
    std::size_t len = end - start;
    if (len > 0 && text[start + len - 1] == '\r') {
      --len;
    }
    lines.emplace_back(text, start, len);
    if (nl == std::string::npos) {
      break;
    }
    start = nl + 1;
  }
  return lines;
}

}  // namespace leakaudit
