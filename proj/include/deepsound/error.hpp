#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace deepsound {

enum class ErrorKind {
  argument,
  format,
  unsupported,
  empty_input,
  io,
  parse,
  shape,
  alignment,
  backend,
  insufficient_samples,
  normalization,
  pairing,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace deepsound
