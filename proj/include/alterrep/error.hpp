#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace alterrep {

/// Error classes surfaced by the library. The CLI maps each class to a
/// distinct process exit status.
enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  non_finite,
  degenerate_input,
  concept_exhausted,
  io,
  format,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::degenerate_input: return "degenerate_input";
    case ErrorCode::concept_exhausted: return "concept_exhausted";
    case ErrorCode::io: return "io";
    case ErrorCode::format: return "format";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

inline void require_same_dim(long a, long b, std::string_view where) {
  if (a != b) {
    fail(ErrorCode::dimension_mismatch,
         std::string(where) + ": expected dimension " + std::to_string(a) + ", got " + std::to_string(b));
  }
}

}  // namespace alterrep
