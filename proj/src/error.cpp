#include "yseg/error.hpp"

namespace yseg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::shape: return "shape";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::io: return "io";
    case ErrorCode::format: return "format";
    case ErrorCode::config: return "config";
    case ErrorCode::dataset: return "dataset";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

std::string shape_str(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

void throw_shape_mismatch(std::string_view op, const std::vector<int>& a,
                          const std::vector<int>& b) {
  throw Error(ErrorCode::shape, std::string(op) + ": shape mismatch " +
                                    shape_str(a) + " vs " + shape_str(b));
}

}  // namespace yseg
