#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace quicheck {

// Decode failure. Carries the byte offset into the decoded buffer and the
// name of the field being read when the input ran out or was malformed.
class CodecError : public std::runtime_error {
 public:
  enum class Kind { kTruncated, kMalformed };

  CodecError(Kind kind, std::size_t offset, std::string field);

  Kind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }
  const std::string& field() const noexcept { return field_; }

 private:
  Kind kind_;
  std::size_t offset_;
  std::string field_;
};

// A value does not fit the wire representation (varint >= 2^62, CID > 16
// bytes, ...).
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Bad user input: unknown test name, role token, malformed trace line, ...
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Rejection sampling ran out of retries, or no frame kind is currently legal.
class ExhaustionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The UDP target could not be set up.
class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace quicheck
