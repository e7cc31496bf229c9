#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mtpeer/core_data.hpp"
#include "mtpeer/stats.hpp"

namespace mtpeer {

/// Scale factor turning a MAD into a normal-consistent deviation.
inline constexpr double kMadScale = 1.483;
/// Systems whose scaled deviation strictly exceeds this are outliers.
inline constexpr double kMadCutoff = 2.5;
/// Smallest number of kept systems for a correlation to enter averages.
inline constexpr int kMinReliableSystems = 4;

struct OutlierSplit {
  std::set<std::string> kept;
  std::set<std::string> outliers;
};

/// Median-absolute-deviation filter over system-level human scores. With a
/// zero MAD every system that deviates from the median at all is an outlier.
OutlierSplit mad_outliers(const std::map<std::string, double>& human_scores);

struct CorrelationResult {
  LanguagePair lang_pair;
  double r = 0.0;
  int n_systems = 0;
  std::vector<std::string> outliers;

  bool reliable() const { return n_systems >= kMinReliableSystems; }
};

struct MetricReport {
  std::vector<CorrelationResult> per_pair;  // sorted by lang pair
  double weighted_average = 0.0;            // the "All" group
  std::map<PairGroup, double> groups;       // only non-empty groups

  /// (r, weight) inputs of every reliable pair, in per_pair order.
  std::vector<WeightedCorrelation> averaging_inputs() const;
  std::vector<WeightedCorrelation> averaging_inputs(PairGroup group) const;
};

using MetricScores = std::map<SystemKey, double>;

/// Per-pair Pearson correlation after MAD filtering of the human scores,
/// plus Fisher-weighted group averages (weight = kept systems).
MetricReport metric_report(const HumanJudgments& human,
                           const MetricScores& metric);
MetricReport metric_report(const std::vector<EvalDataset>& datasets,
                           const MetricScores& metric);

/// Williams comparison of two metrics on one language pair.
struct MetricComparison {
  LanguagePair lang_pair;
  double r_a = 0.0;
  double r_b = 0.0;
  double r_ab = 0.0;
  int n = 0;
  std::optional<TestResult> williams;  // absent when n < 4 or degenerate

  bool a_significantly_better(double alpha = 0.05) const {
    return williams && r_a > r_b && williams->p_value < alpha;
  }
};

/// For each pair, tests whether metric a correlates better than metric b.
/// One-tailed in the direction of the larger correlation when tails == 1.
std::vector<MetricComparison> compare_metrics(const HumanJudgments& human,
                                              const MetricScores& a,
                                              const MetricScores& b,
                                              int tails = 1);

// ---------------------------------------------------------------------------

struct PairwiseCounts {
  int correct = 0;
  int incorrect = 0;
  int not_significant = 0;

  int total() const { return correct + incorrect + not_significant; }
  PairwiseCounts& operator+=(const PairwiseCounts& o) {
    correct += o.correct;
    incorrect += o.incorrect;
    not_significant += o.not_significant;
    return *this;
  }
  bool operator==(const PairwiseCounts&) const = default;
};

struct PairwiseTally {
  PairwiseCounts human_significant;
  PairwiseCounts human_not_significant;

  int total() const {
    return human_significant.total() + human_not_significant.total();
  }
  PairwiseTally& operator+=(const PairwiseTally& o) {
    human_significant += o.human_significant;
    human_not_significant += o.human_not_significant;
    return *this;
  }
  bool operator==(const PairwiseTally&) const = default;
};

/// Per-segment scores of each system, keyed by seg_id.
using SegmentScoresBySystem = std::map<std::string, std::map<int, double>>;

enum class PairVerdict { Correct, Incorrect, NotSignificant };

struct PairDecision {
  std::string system_a;
  std::string system_b;
  bool human_significant = false;
  PairVerdict verdict = PairVerdict::NotSignificant;
};

/// Agreement of metric and human pairwise decisions over all unordered
/// system pairs. Human significance: rank-sum on the two systems' human
/// segment scores. Metric significance: paired t-test on per-segment metric
/// differences over shared segments. The human direction is the sign of the
/// difference in mean human segment score.
PairwiseTally pairwise_compare(const std::vector<std::string>& systems,
                               const SegmentScoresBySystem& metric,
                               const SegmentScoresBySystem& human,
                               double alpha = 0.05,
                               std::vector<PairDecision>* decisions = nullptr);

PairwiseTally pairwise_compare(const EvalDataset& dataset,
                               const SegmentScoresBySystem& metric,
                               double alpha = 0.05);

// ---------------------------------------------------------------------------

/// Mean outlier-filtered correlation over random segment subsets. System
/// scores are recomputed as the mean of segment scores on each subset; human
/// system scores stay fixed. Per-draw seeds derive from (seed, size, draw).
std::map<int, double> subsample_correlations(
    const std::map<std::string, double>& human_system_scores,
    const SegmentScoresBySystem& metric, const std::vector<int>& sizes,
    int draws, std::uint64_t seed);

std::map<int, double> subsample_correlations(const EvalDataset& dataset,
                                             const SegmentScoresBySystem& metric,
                                             const std::vector<int>& sizes,
                                             int draws, std::uint64_t seed);

/// Deterministic seed mixing (splitmix64 finalizer over the combined words).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                          std::uint64_t b = 0);

}  // namespace mtpeer
