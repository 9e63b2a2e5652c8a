#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace yseg {

enum class ErrorCode {
  shape,
  invalid_argument,
  io,
  format,
  config,
  dataset,
  non_finite,
  internal,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. `what()` carries the detail only; the CLI prints
/// `error: <code>: <detail>`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

std::string shape_str(const std::vector<int>& shape);

[[noreturn]] void throw_shape_mismatch(std::string_view op,
                                       const std::vector<int>& a,
                                       const std::vector<int>& b);

inline void require(bool cond, ErrorCode code, const std::string& detail) {
  if (!cond) throw Error(code, detail);
}

}  // namespace yseg
