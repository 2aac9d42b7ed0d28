#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hetq {

enum class ErrorCode {
  ConfigError,
  Domain,
  Unstable,
  OverflowGuard,
  EmptyWindow,
  BracketError,
  Degenerate,
  WindowError,
  NoIdleness,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return "CONFIG_ERROR";
    case ErrorCode::Domain: return "DOMAIN";
    case ErrorCode::Unstable: return "UNSTABLE";
    case ErrorCode::OverflowGuard: return "OVERFLOW_GUARD";
    case ErrorCode::EmptyWindow: return "EMPTY_WINDOW";
    case ErrorCode::BracketError: return "BRACKET_ERROR";
    case ErrorCode::Degenerate: return "DEGENERATE";
    case ErrorCode::WindowError: return "WINDOW_ERROR";
    case ErrorCode::NoIdleness: return "NO_IDLENESS";
  }
  return "UNKNOWN";
}

/// Error raised by every hetq operation. The code identifies the violated
/// precondition; the message names the offending key or value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace hetq
