#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtpeer/core_data.hpp"
#include "mtpeer/stats.hpp"

namespace mtpeer {

enum class Statistic { Sum, Mean, Median, Min, NegStdDev, ConfidenceThreshold };

/// How token log-probabilities become a segment score. Threshold bounds are
/// only meaningful for ConfidenceThreshold.
struct AggregationMethod {
  Statistic statistic = Statistic::Mean;
  double low = 0.0;
  double high = 0.0;

  static AggregationMethod sum() { return {Statistic::Sum}; }
  static AggregationMethod mean() { return {Statistic::Mean}; }
  static AggregationMethod median() { return {Statistic::Median}; }
  static AggregationMethod min() { return {Statistic::Min}; }
  static AggregationMethod neg_stddev() { return {Statistic::NegStdDev}; }
  static AggregationMethod threshold(double low, double high);

  static AggregationMethod parse(std::string_view name, double low = -1.0,
                                 double high = -0.6);
  std::string name() const;
  bool operator==(const AggregationMethod&) const = default;
};

struct SegmentScore {
  int seg_id = 0;
  double value = 0.0;
};

struct SystemScore {
  std::string system_name;
  LanguagePair lang_pair;
  double value = 0.0;
  AggregationMethod method;
  int n_segments = 0;
};

// Statistics over one vector of token log-probabilities.

template <typename Derived>
typename Derived::Scalar neg_stddev(const Eigen::DenseBase<Derived>& logp) {
  return -population_stddev(logp);
}

/// {-1, 0, +1} depending on where the mean log-probability falls relative to
/// (low, high). Values equal to a bound map to 0.
template <typename Scalar>
int confidence_band(Scalar mean_logprob, Scalar low, Scalar high) {
  if (mean_logprob < low) return -1;
  if (mean_logprob > high) return 1;
  return 0;
}

/// Sum, Mean, Median, Min or NegStdDev of the segment's log-probabilities.
SegmentScore aggregate_segment(const TokenScoredSegment& seg,
                               const AggregationMethod& method);

SegmentScore threshold_segment(const TokenScoredSegment& seg, double low,
                               double high);

/// Dispatches to aggregate_segment or threshold_segment.
SegmentScore score_segment(const TokenScoredSegment& seg,
                           const AggregationMethod& method);

/// MC-dropout style averaging: per-token mean over K samples that share one
/// tokenization.
TokenScoredSegment regularize_tokens(std::span<const TokenScoredSegment> samples);

/// Subword-regularization style averaging: mean over K samples of the
/// segment log-probability. With length_normalize the result is divided by
/// the mean sample length.
SegmentScore regularize_segment(std::span<const TokenScoredSegment> samples,
                                bool length_normalize = false);

enum class SampleMode { TokenLevel, SegmentLevel };

/// Segment scores for one system given K regularization samples (one token
/// score list per sample, each covering the same seg_ids).
///
/// TokenLevel averages token log-probabilities first and then applies the
/// method. SegmentLevel cannot average tokens: Sum uses the mean segment
/// log-probability, Mean and ConfidenceThreshold use it divided by the mean
/// sample length, and Median, Min and NegStdDev average the per-sample
/// statistic.
std::vector<SegmentScore> score_samples(
    const std::vector<std::vector<TokenScoredSegment>>& samples,
    const AggregationMethod& method, SampleMode mode);

/// Arithmetic mean of segment scores. The sum runs over the values in
/// ascending order, so any permutation of the segments gives the same bits.
SystemScore system_score(std::span<const SegmentScore> segments,
                         std::string system_name = {},
                         LanguagePair lang_pair = {},
                         AggregationMethod method = {});

// ---------------------------------------------------------------------------

/// 16 equally spaced points in [-3, 0].
std::vector<double> default_threshold_grid();

/// One development language pair: human system scores and the token scores
/// of each system (single sample).
struct DevSet {
  LanguagePair lang_pair;
  std::map<std::string, double> human;
  std::map<std::string, std::vector<TokenScoredSegment>> token_scores;
};

struct ThresholdChoice {
  double low = 0.0;
  double high = 0.0;
  double correlation = 0.0;
};

/// Exhaustive search over grid pairs low < high for the thresholds that
/// maximise the Fisher-weighted average correlation on the dev sets.
/// Candidates within 1e-12 of the best are ties, resolved by smaller high and
/// then larger low. Pairs whose correlation is undefined are skipped.
ThresholdChoice tune_thresholds(const std::vector<DevSet>& dev,
                                std::vector<double> grid);

}  // namespace mtpeer
