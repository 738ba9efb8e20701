#include "lowlight/error.hpp"

namespace lowlight {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::decode: return "decode error";
    case ErrorKind::unsupported_format: return "unsupported format";
    case ErrorKind::invalid_image: return "invalid image";
    case ErrorKind::shape: return "shape error";
    case ErrorKind::size: return "size error";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::range: return "range error";
    case ErrorKind::structure: return "structure error";
    case ErrorKind::rank_deficient: return "rank deficiency";
    case ErrorKind::calibration: return "calibration error";
    case ErrorKind::dataset: return "dataset error";
    case ErrorKind::io: return "I/O error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

Error Error::with_stage(std::string_view stage) const {
  std::string msg(stage);
  msg += ": ";
  msg += what();
  return Error(kind_, msg);
}

}  // namespace lowlight
