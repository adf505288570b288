// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#pragma once

#include <stdexcept>
#include <string>

namespace leakaudit {

// Base class for all toolkit errors. Subclasses discriminate how the CLI
// maps a failure to an exit code (usage vs. data problem).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input text/bytes (bad JSON line, bad CSV row, bad WAV chunk).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that violates a cross-record contract
// (duplicate id, unknown id, missing ground truth, inconsistent files).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Filesystem-level failure (open, read, write, rename).
class IoError : public Error {
 public:
  using Error::Error;
};

// Binary file with wrong magic, incompatible version, or bad checksum.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Audio that cannot be decoded or is unusable (truncated, empty).
class DecodeError : public Error {
 public:
  using Error::Error;
};

// A caller-supplied value outside its legal range.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A requested computation has no valid answer (e.g. one group larger than
// the train fraction of the catalog).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace leakaudit
