#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mtpeer {

/// Unigram language model over subword pieces. Log-probabilities are in nats.
class UnigramSubwordModel {
 public:
  UnigramSubwordModel() = default;
  explicit UnigramSubwordModel(std::unordered_map<std::string, double> vocab);

  const std::unordered_map<std::string, double>& vocab() const { return vocab_; }
  std::size_t size() const { return vocab_.size(); }
  bool contains(std::string_view piece) const;
  double logprob(std::string_view piece) const;
  /// Longest piece measured in code points.
  int max_piece_length() const { return max_len_; }

  void write(std::ostream& out) const;
  static UnigramSubwordModel read(std::istream& in, const std::string& origin);
  void save(const std::filesystem::path& path) const;
  static UnigramSubwordModel load(const std::filesystem::path& path);

 private:
  std::unordered_map<std::string, double> vocab_;
  int max_len_ = 0;
};

struct Segmentation {
  std::vector<std::string> pieces;
  double score = 0.0;  // sum of piece log-probabilities
};

/// Splits UTF-8 text into code points (invalid bytes become single units).
std::vector<std::string> utf8_chars(std::string_view text);

/// Up to n distinct segmentations in nonincreasing score order, by n-best
/// dynamic programming over the segmentation lattice. Throws Coverage when a
/// character of the text is not in the vocabulary.
std::vector<Segmentation> nbest_segmentations(const UnigramSubwordModel& model,
                                              std::string_view text, int n);

/// Viterbi (1-best) segmentation.
Segmentation best_segmentation(const UnigramSubwordModel& model,
                               std::string_view text);

/// Picks one entry of the n-best list with probability proportional to
/// exp(alpha * score). Deterministic for a given seed.
Segmentation sample_segmentation(const UnigramSubwordModel& model,
                                 std::string_view text, int n, double alpha,
                                 std::uint64_t seed);

/// Index drawn from softmax(alpha * scores) using one uniform variate.
std::size_t sample_index(const std::vector<double>& scores, double alpha,
                         std::uint64_t seed);

struct UnigramTrainerOptions {
  int max_piece_length = 8;
  int min_frequency = 2;
  int em_steps_per_round = 2;
  double shrink_factor = 0.75;  // fraction of pieces kept by each pruning
};

/// Corpus Viterbi log-likelihood after each EM step, tagged by the vocabulary
/// size it was computed at.
struct TrainingStep {
  int round = 0;
  std::size_t vocab_size = 0;
  bool after_pruning = false;
  double log_likelihood = 0.0;
};

/// Simplified unigram-LM trainer: substring seeding, Viterbi EM and
/// utility-based pruning. Single characters are never pruned.
UnigramSubwordModel train_unigram(const std::vector<std::string>& corpus,
                                  int vocab_size, int rounds,
                                  const UnigramTrainerOptions& options = {},
                                  std::vector<TrainingStep>* trace = nullptr);

/// Sum of Viterbi segmentation scores over the corpus.
double corpus_log_likelihood(const UnigramSubwordModel& model,
                             const std::vector<std::string>& corpus);

}  // namespace mtpeer
