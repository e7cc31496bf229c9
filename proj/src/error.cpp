#include "mtpeer/error.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace mtpeer {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Duplicate: return "duplicate";
    case ErrorKind::Invariant: return "invariant";
    case ErrorKind::Alignment: return "alignment";
    case ErrorKind::MissingJudgment: return "missing-judgment";
    case ErrorKind::EmptySegment: return "empty-segment";
    case ErrorKind::Empty: return "empty";
    case ErrorKind::TokenizationMismatch: return "tokenization-mismatch";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Coverage: return "coverage";
    case ErrorKind::UndefinedCorrelation: return "undefined-correlation";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::DegenerateInputs: return "degenerate-inputs";
    case ErrorKind::MissingData: return "missing-data";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

void print_warning(std::string_view msg) {
  std::clog << "warning: " << msg << '\n';
}

WarningHandler& handler() {
  static WarningHandler h = print_warning;
  return h;
}

}  // namespace

void set_warning_handler(WarningHandler h) {
  std::lock_guard lock(handler_mutex());
  handler() = h ? std::move(h) : WarningHandler(print_warning);
}

void warn(std::string_view message) {
  std::lock_guard lock(handler_mutex());
  if (handler()) handler()(message);
}

}  // namespace mtpeer
