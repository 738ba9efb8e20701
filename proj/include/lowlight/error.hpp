#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lowlight {

enum class ErrorKind {
  decode,
  unsupported_format,
  invalid_image,
  shape,
  size,
  parameter,
  range,
  structure,
  rank_deficient,
  calibration,
  dataset,
  io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure in the library surfaces as this exception type. The kind is
/// kept so callers (the CLI, the evaluation harness) can map errors to exit
/// codes or report columns without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

  /// Same error with "<stage>: " prepended to the message.
  Error with_stage(std::string_view stage) const;

 private:
  ErrorKind kind_;
};

}  // namespace lowlight
