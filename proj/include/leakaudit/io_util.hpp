// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace leakaudit {

// Reads a whole file into memory. Throws IoError on failure.
std::string read_file(const std::filesystem::path& path);

// Writes `data` atomically: a temp file in the target directory is written,
// flushed, and renamed over `path`. No partial output survives a failure.
void atomic_write(const std::filesystem::path& path, const std::string& data);

// CRC32 (zlib polynomial) of a byte range.
std::uint32_t crc32_of(const void* data, std::size_t len);

// CRC32 of a file's contents. Throws IoError if unreadable.
std::uint32_t crc32_of_file(const std::filesystem::path& path);

// Splits text into lines on '\n'; a trailing newline does not produce an
// empty final line. '\r' before the newline is stripped.
std::vector<std::string> split_lines(const std::string& text);

}  // namespace leakaudit
