#pragma once

#include <stdexcept>
#include <string>

namespace hdc {

// Malformed external input: bad magic, truncation, ragged rows, checksum or
// version mismatch. Messages carry the offending offset / row / column.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values reached arithmetic that requires finite inputs.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hdc
