#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mtpeer/meta_eval.hpp"
#include "mtpeer/model1.hpp"

namespace mtpeer {

/// A toy translation task: a source lexicon with Zipfian word frequencies, a
/// mostly one-to-one target lexicon, and systems produced by corrupting the
/// reference translations with token-replacement noise.
struct NoiseBenchmarkConfig {
  int vocabulary = 300;
  int train_pairs = 4000;
  int test_segments = 1000;
  int min_length = 4;
  int max_length = 14;
  double alternate_translation = 0.15;
  std::vector<double> noise_rates{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::uint64_t seed = 1;
};

struct SyntheticSystem {
  std::string name;
  double noise_rate = 0.0;
  std::vector<std::vector<std::string>> outputs;  // one per test segment
  std::vector<double> kept_fraction;              // uncorrupted token share
};

struct NoiseBenchmark {
  std::vector<SentencePair> train;
  std::vector<std::vector<std::string>> test_sources;
  std::vector<std::vector<std::string>> references;
  std::vector<SyntheticSystem> systems;
};

NoiseBenchmark make_noise_benchmark(const NoiseBenchmarkConfig& cfg);

/// System-level human scores (100 * (1 - noise rate)) and segment-level
/// scores (100 * kept fraction plus Gaussian jitter of `segment_jitter`).
HumanJudgments synthetic_human(const NoiseBenchmark& bench,
                               const LanguagePair& lp, double segment_jitter,
                               std::uint64_t seed);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace mtpeer
