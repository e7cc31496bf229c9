#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mtpeer {

enum class ErrorKind {
  Parse,
  Structural,
  Domain,
  Duplicate,
  Invariant,
  Alignment,
  MissingJudgment,
  EmptySegment,
  Empty,
  TokenizationMismatch,
  Configuration,
  Coverage,
  UndefinedCorrelation,
  InsufficientData,
  DegenerateInputs,
  MissingData,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. The message is prefixed with the
/// kind so that command-line reports stay greppable.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what),
        kind_(kind),
        detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }
  /// Same kind, with a location prepended to the message.
  Error within(const std::string& where) const {
    return Error(kind_, where + ": " + detail_);
  }

 private:
  ErrorKind kind_;
  std::string detail_;
};

// Non-fatal diagnostics (clamped correlations, skipped training pairs).
// Defaults to std::clog; tests and the CLI may redirect them. An empty
// handler restores the default.
using WarningHandler = std::function<void(std::string_view)>;
void set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace mtpeer
