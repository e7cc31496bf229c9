#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtpeer/core_data.hpp"

namespace mtpeer {

/// Source token standing for "aligned to nothing".
inline const std::string kNullToken = "<NULL>";
/// Probability floor for target tokens the table cannot explain.
inline constexpr double kProbabilityFloor = 1e-12;

/// IBM Model 1 translation table t(target | source).
class LexicalTable {
 public:
  double prob(const std::string& target, const std::string& source) const;
  void set(const std::string& target, const std::string& source, double p);

  /// t(. | source) for one source token; empty when the token is unknown.
  const std::unordered_map<std::string, double>& row(
      const std::string& source) const;
  std::vector<std::string> sources() const;

  void write(std::ostream& out) const;
  static LexicalTable read(std::istream& in, const std::string& origin);
  void save(const std::filesystem::path& path) const;
  static LexicalTable load(const std::filesystem::path& path);

 private:
  std::unordered_map<std::string, std::unordered_map<std::string, double>> t_;
};

struct SentencePair {
  std::vector<std::string> source;
  std::vector<std::string> target;
};

struct Model1Training {
  LexicalTable table;
  /// Corpus log-likelihood under the initial table and after each iteration.
  std::vector<double> log_likelihood;
  int skipped_pairs = 0;
};

/// EM training from a uniform table. Pairs with an empty side are skipped.
Model1Training train_model1(const std::vector<SentencePair>& corpus,
                            int iterations);

/// Per-token log p(y_t | x) = log( sum_{s in x + NULL} t(y_t|s) / (L+1) ),
/// floored at log(1e-12).
TokenScoredSegment score_tokens(const LexicalTable& table,
                                const std::vector<std::string>& source,
                                const std::vector<std::string>& target,
                                int seg_id = 0);

/// Whitespace tokenization used by the toy scorer.
std::vector<std::string> split_whitespace(const std::string& text);

}  // namespace mtpeer
