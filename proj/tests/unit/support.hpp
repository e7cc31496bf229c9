#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mtpeer/core_data.hpp"
#include "mtpeer/error.hpp"

namespace testing {

/// Kind of the mtpeer::Error thrown by f, or nullopt when nothing is thrown.
template <typename F>
std::optional<mtpeer::ErrorKind> error_of(F&& f) {
  try {
    f();
  } catch (const mtpeer::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

/// Message of the mtpeer::Error thrown by f (empty when none).
template <typename F>
std::string message_of(F&& f) {
  try {
    f();
  } catch (const mtpeer::Error& e) {
    return e.what();
  }
  return {};
}

inline mtpeer::TokenScoredSegment segment(const std::vector<double>& logp,
                                          int seg_id = 0) {
  mtpeer::TokenScoredSegment s;
  s.seg_id = seg_id;
  s.logprobs.resize(static_cast<Eigen::Index>(logp.size()));
  for (std::size_t i = 0; i < logp.size(); ++i) {
    s.tokens.push_back("w" + std::to_string(i));
    s.logprobs[static_cast<Eigen::Index>(i)] = logp[i];
  }
  return s;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mtpeer-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }
  std::filesystem::path write(const std::string& name,
                              const std::string& content) const {
    auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Collects warnings instead of printing them while alive.
class CapturedWarnings {
 public:
  CapturedWarnings() {
    mtpeer::set_warning_handler(
        [this](std::string_view m) { messages.emplace_back(m); });
  }
  ~CapturedWarnings() { mtpeer::set_warning_handler(nullptr); }
  std::vector<std::string> messages;
};

}  // namespace testing
