#include "mtpeer/segment_scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtpeer/meta_eval.hpp"

namespace mtpeer {

namespace {

void require_nonempty(const TokenScoredSegment& seg) {
  if (seg.length() == 0) {
    throw Error(ErrorKind::EmptySegment,
                "segment " + std::to_string(seg.seg_id) + " has no tokens");
  }
}

void check_finite(double value, int seg_id) {
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::Domain, "segment " + std::to_string(seg_id) +
                                       " produced a non-finite score");
  }
}

// Token log-probabilities in ascending order. Every statistic is computed on
// this copy so that token order cannot change a single bit of the result.
Eigen::VectorXd sorted_logprobs(const TokenScoredSegment& seg) {
  Eigen::VectorXd v = seg.logprobs;
  std::sort(v.data(), v.data() + v.size());
  return v;
}

double ordered_sum(const TokenScoredSegment& seg) {
  const Eigen::VectorXd v = sorted_logprobs(seg);
  return std::accumulate(v.data(), v.data() + v.size(), 0.0);
}

double mean_logprob(const TokenScoredSegment& seg) {
  return ordered_sum(seg) / static_cast<double>(seg.length());
}

}  // namespace

AggregationMethod AggregationMethod::threshold(double low, double high) {
  if (!(low < high) || high > 0.0) {
    throw Error(ErrorKind::Configuration,
                "thresholds need low < high <= 0, got (" + format_full(low) +
                    ", " + format_full(high) + ")");
  }
  return {Statistic::ConfidenceThreshold, low, high};
}

AggregationMethod AggregationMethod::parse(std::string_view name, double low,
                                           double high) {
  if (name == "sum") return sum();
  if (name == "mean") return mean();
  if (name == "median") return median();
  if (name == "min") return min();
  if (name == "negstd") return neg_stddev();
  if (name == "threshold") return threshold(low, high);
  throw Error(ErrorKind::Configuration,
              "unknown aggregation method '" + std::string(name) + "'");
}

std::string AggregationMethod::name() const {
  switch (statistic) {
    case Statistic::Sum: return "sum";
    case Statistic::Mean: return "mean";
    case Statistic::Median: return "median";
    case Statistic::Min: return "min";
    case Statistic::NegStdDev: return "negstd";
    case Statistic::ConfidenceThreshold: return "threshold";
  }
  return "?";
}

SegmentScore aggregate_segment(const TokenScoredSegment& seg,
                               const AggregationMethod& method) {
  require_nonempty(seg);
  const Eigen::VectorXd lp = sorted_logprobs(seg);
  const double sum = std::accumulate(lp.data(), lp.data() + lp.size(), 0.0);
  double value = 0.0;
  switch (method.statistic) {
    case Statistic::Sum: value = sum; break;
    case Statistic::Mean: value = sum / static_cast<double>(lp.size()); break;
    case Statistic::Median: value = median(lp); break;
    case Statistic::Min: value = lp.minCoeff(); break;
    case Statistic::NegStdDev: value = neg_stddev(lp); break;
    case Statistic::ConfidenceThreshold:
      throw Error(ErrorKind::Configuration,
                  "aggregate_segment does not threshold; use threshold_segment");
  }
  check_finite(value, seg.seg_id);
  return {seg.seg_id, value};
}

SegmentScore threshold_segment(const TokenScoredSegment& seg, double low,
                               double high) {
  if (!(low < high)) {
    throw Error(ErrorKind::Configuration, "threshold needs low < high");
  }
  require_nonempty(seg);
  const double m = mean_logprob(seg);
  return {seg.seg_id, static_cast<double>(confidence_band(m, low, high))};
}

SegmentScore score_segment(const TokenScoredSegment& seg,
                           const AggregationMethod& method) {
  if (method.statistic == Statistic::ConfidenceThreshold) {
    return threshold_segment(seg, method.low, method.high);
  }
  return aggregate_segment(seg, method);
}

TokenScoredSegment regularize_tokens(std::span<const TokenScoredSegment> samples) {
  if (samples.empty()) {
    throw Error(ErrorKind::Empty, "regularization over zero samples");
  }
  const auto& first = samples.front();
  require_nonempty(first);
  TokenScoredSegment out = first;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    if (samples[k].tokens != first.tokens) {
      throw Error(ErrorKind::TokenizationMismatch,
                  "segment " + std::to_string(first.seg_id) + ": sample " +
                      std::to_string(k) +
                      " tokenizes differently; use segment-level averaging");
    }
    out.logprobs += samples[k].logprobs;
  }
  out.logprobs /= static_cast<double>(samples.size());
  return out;
}

SegmentScore regularize_segment(std::span<const TokenScoredSegment> samples,
                                bool length_normalize) {
  if (samples.empty()) {
    throw Error(ErrorKind::Empty, "regularization over zero samples");
  }
  double total = 0.0;
  double length = 0.0;
  for (const auto& s : samples) {
    require_nonempty(s);
    total += ordered_sum(s);
    length += static_cast<double>(s.length());
  }
  const auto k = static_cast<double>(samples.size());
  double value = total / k;
  if (length_normalize) value /= length / k;
  return {samples.front().seg_id, value};
}

std::vector<SegmentScore> score_samples(
    const std::vector<std::vector<TokenScoredSegment>>& samples,
    const AggregationMethod& method, SampleMode mode) {
  if (samples.empty()) {
    throw Error(ErrorKind::Empty, "no regularization samples");
  }
  const auto& first = samples.front();
  for (std::size_t k = 1; k < samples.size(); ++k) {
    bool same = samples[k].size() == first.size();
    for (std::size_t i = 0; same && i < first.size(); ++i) {
      same = samples[k][i].seg_id == first[i].seg_id;
    }
    if (!same) {
      throw Error(ErrorKind::Alignment,
                  "regularization sample " + std::to_string(k) +
                      " covers different segment ids than sample 0");
    }
  }

  std::vector<SegmentScore> out;
  out.reserve(first.size());
  std::vector<TokenScoredSegment> column(samples.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    for (std::size_t k = 0; k < samples.size(); ++k) column[k] = samples[k][i];

    if (mode == SampleMode::TokenLevel || samples.size() == 1) {
      out.push_back(score_segment(regularize_tokens(column), method));
      continue;
    }
    switch (method.statistic) {
      case Statistic::Sum:
        out.push_back(regularize_segment(column, false));
        break;
      case Statistic::Mean:
        out.push_back(regularize_segment(column, true));
        break;
      case Statistic::ConfidenceThreshold: {
        const double m = regularize_segment(column, true).value;
        out.push_back({first[i].seg_id, static_cast<double>(confidence_band(
                                            m, method.low, method.high))});
        break;
      }
      default: {
        double acc = 0.0;
        for (const auto& s : column) acc += aggregate_segment(s, method).value;
        out.push_back({first[i].seg_id, acc / static_cast<double>(column.size())});
      }
    }
  }
  return out;
}

SystemScore system_score(std::span<const SegmentScore> segments,
                         std::string system_name, LanguagePair lang_pair,
                         AggregationMethod method) {
  if (segments.empty()) {
    throw Error(ErrorKind::Empty, "system score over zero segments");
  }
  // Summing in value order makes the result independent of segment order.
  std::vector<double> values;
  values.reserve(segments.size());
  for (const auto& s : segments) values.push_back(s.value);
  std::sort(values.begin(), values.end());
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  SystemScore out;
  out.system_name = std::move(system_name);
  out.lang_pair = std::move(lang_pair);
  out.value = total / static_cast<double>(segments.size());
  out.method = method;
  out.n_segments = static_cast<int>(segments.size());
  if (!std::isfinite(out.value)) {
    throw Error(ErrorKind::Domain, "non-finite system score");
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 16; ++i) grid.push_back(-(15 - i) / 5.0);
  return grid;
}

ThresholdChoice tune_thresholds(const std::vector<DevSet>& dev,
                                std::vector<double> grid) {
  if (grid.size() < 2) {
    throw Error(ErrorKind::Configuration, "threshold grid needs >= 2 points");
  }
  if (!std::is_sorted(grid.begin(), grid.end()) || grid.back() > 0.0) {
    throw Error(ErrorKind::Configuration,
                "threshold grid must be ascending and <= 0");
  }
  if (dev.empty()) {
    throw Error(ErrorKind::Configuration, "no development data");
  }

  // Mean token log-probability per (pair, system, segment), computed once.
  struct Prepared {
    LanguagePair lp;
    std::map<std::string, std::vector<double>> means;
  };
  HumanJudgments human;
  std::vector<Prepared> prepared;
  for (const auto& d : dev) {
    Prepared p{d.lang_pair, {}};
    for (const auto& [system, segs] : d.token_scores) {
      auto& m = p.means[system];
      for (const auto& s : segs) {
        require_nonempty(s);
        m.push_back(mean_logprob(s));
      }
    }
    for (const auto& [system, h] : d.human) {
      human.system_scores[{d.lang_pair, system}] = h;
    }
    prepared.push_back(std::move(p));
  }

  constexpr double kTie = 1e-12;
  bool found = false;
  ThresholdChoice best;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      const double low = grid[i];
      const double high = grid[j];
      if (!(low < high)) continue;

      MetricScores metric;
      for (const auto& p : prepared) {
        for (const auto& [system, means] : p.means) {
          if (means.empty()) continue;
          double total = 0.0;
          for (double m : means) total += confidence_band(m, low, high);
          metric[{p.lp, system}] = total / static_cast<double>(means.size());
        }
      }
      double r = 0.0;
      try {
        r = metric_report(human, metric).weighted_average;
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::UndefinedCorrelation ||
            e.kind() == ErrorKind::InsufficientData) {
          continue;
        }
        throw;
      }

      bool take = !found || r > best.correlation + kTie;
      if (!take && std::abs(r - best.correlation) <= kTie) {
        take = high < best.high || (high == best.high && low > best.low);
      }
      if (take) {
        best = {low, high, r};
        found = true;
      }
    }
  }
  if (!found) {
    throw Error(ErrorKind::Configuration,
                "no threshold pair yields a defined correlation");
  }
  return best;
}

}  // namespace mtpeer
