#include "mtpeer/meta_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mtpeer {

OutlierSplit mad_outliers(const std::map<std::string, double>& human_scores) {
  if (human_scores.empty()) {
    throw Error(ErrorKind::Domain, "outlier filter over no systems");
  }
  Eigen::VectorXd h(static_cast<Eigen::Index>(human_scores.size()));
  Eigen::Index i = 0;
  for (const auto& [name, score] : human_scores) h[i++] = score;

  const double centre = median(h);
  const Eigen::VectorXd dev = (h.array() - centre).abs().matrix();
  const double scale = kMadScale * median(dev);

  OutlierSplit split;
  i = 0;
  for (const auto& [name, score] : human_scores) {
    const double d = dev[i++];
    const bool outlier = scale > 0.0 ? d / scale > kMadCutoff : d > 0.0;
    (outlier ? split.outliers : split.kept).insert(name);
  }
  return split;
}

// ---------------------------------------------------------------------------

namespace {

struct FilteredPair {
  std::vector<std::string> kept;
  std::vector<std::string> outliers;
  Eigen::VectorXd human;
};

FilteredPair filter_pair(const std::map<std::string, double>& human) {
  auto split = mad_outliers(human);
  FilteredPair out;
  out.kept.assign(split.kept.begin(), split.kept.end());
  out.outliers.assign(split.outliers.begin(), split.outliers.end());
  out.human.resize(static_cast<Eigen::Index>(out.kept.size()));
  for (std::size_t i = 0; i < out.kept.size(); ++i) {
    out.human[static_cast<Eigen::Index>(i)] = human.at(out.kept[i]);
  }
  return out;
}

bool has_any(const MetricScores& metric, const LanguagePair& lp) {
  auto it = metric.lower_bound({lp, std::string{}});
  return it != metric.end() && it->first.first == lp;
}

Eigen::VectorXd gather(const MetricScores& metric, const LanguagePair& lp,
                       const std::vector<std::string>& systems) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(systems.size()));
  for (std::size_t i = 0; i < systems.size(); ++i) {
    auto it = metric.find({lp, systems[i]});
    if (it == metric.end()) {
      throw Error(ErrorKind::MissingData, lp.str() + ": no metric score for '" +
                                              systems[i] + "'");
    }
    v[static_cast<Eigen::Index>(i)] = it->second;
  }
  return v;
}

}  // namespace

std::vector<WeightedCorrelation> MetricReport::averaging_inputs() const {
  std::vector<WeightedCorrelation> out;
  for (const auto& c : per_pair) {
    if (c.reliable()) out.push_back({c.r, static_cast<double>(c.n_systems)});
  }
  return out;
}

std::vector<WeightedCorrelation> MetricReport::averaging_inputs(
    PairGroup group) const {
  std::vector<WeightedCorrelation> out;
  for (const auto& c : per_pair) {
    if (c.reliable() && group_of(c.lang_pair) == group) {
      out.push_back({c.r, static_cast<double>(c.n_systems)});
    }
  }
  return out;
}

MetricReport metric_report(const HumanJudgments& human,
                           const MetricScores& metric) {
  MetricReport report;
  for (const auto& lp : human.language_pairs()) {
    if (!has_any(metric, lp)) continue;
    auto filtered = filter_pair(human.systems_for(lp));
    auto scores = gather(metric, lp, filtered.kept);
    CorrelationResult res;
    res.lang_pair = lp;
    try {
      res.r = pearson(scores, filtered.human);
    } catch (const Error& e) {
      throw e.within(lp.str());
    }
    res.n_systems = static_cast<int>(filtered.kept.size());
    res.outliers = std::move(filtered.outliers);
    if (!res.reliable()) {
      warn(lp.str() + ": only " + std::to_string(res.n_systems) +
           " systems after filtering; excluded from averages");
    }
    report.per_pair.push_back(std::move(res));
  }

  auto all = report.averaging_inputs();
  if (all.empty()) {
    throw Error(ErrorKind::InsufficientData,
                "no language pair with at least " +
                    std::to_string(kMinReliableSystems) + " systems");
  }
  report.weighted_average = fisher_weighted_average(all);
  for (auto g : {PairGroup::EnXx, PairGroup::XxEn, PairGroup::XxYy}) {
    auto inputs = report.averaging_inputs(g);
    if (!inputs.empty()) report.groups[g] = fisher_weighted_average(inputs);
  }
  return report;
}

MetricReport metric_report(const std::vector<EvalDataset>& datasets,
                           const MetricScores& metric) {
  HumanJudgments merged;
  for (const auto& ds : datasets) {
    for (const auto& sys : ds.systems) {
      merged.system_scores.emplace(
          SystemKey{ds.lang_pair, sys.system_name},
          ds.human.system_scores.at({ds.lang_pair, sys.system_name}));
    }
  }
  return metric_report(merged, metric);
}

std::vector<MetricComparison> compare_metrics(const HumanJudgments& human,
                                              const MetricScores& a,
                                              const MetricScores& b,
                                              int tails) {
  std::vector<MetricComparison> out;
  for (const auto& lp : human.language_pairs()) {
    if (!has_any(a, lp) || !has_any(b, lp)) continue;
    auto filtered = filter_pair(human.systems_for(lp));
    auto sa = gather(a, lp, filtered.kept);
    auto sb = gather(b, lp, filtered.kept);

    MetricComparison cmp;
    cmp.lang_pair = lp;
    cmp.n = static_cast<int>(filtered.kept.size());
    cmp.r_a = pearson(sa, filtered.human);
    cmp.r_b = pearson(sb, filtered.human);
    cmp.r_ab = pearson(sa, sb);
    if (cmp.n >= kMinReliableSystems) {
      try {
        const bool a_first = cmp.r_a >= cmp.r_b;
        cmp.williams = williams_test(a_first ? cmp.r_a : cmp.r_b,
                                     a_first ? cmp.r_b : cmp.r_a, cmp.r_ab,
                                     cmp.n, tails);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateInputs) throw;
      }
    }
    out.push_back(std::move(cmp));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

std::vector<double> values_of(const std::map<int, double>& m) {
  std::vector<double> v;
  v.reserve(m.size());
  for (const auto& [seg, score] : m) v.push_back(score);
  return v;
}

const std::map<int, double>& lookup(const SegmentScoresBySystem& table,
                                    const std::string& system,
                                    const char* what) {
  auto it = table.find(system);
  if (it == table.end() || it->second.empty()) {
    throw Error(ErrorKind::MissingData,
                std::string("no ") + what + " segment scores for '" + system +
                    "'");
  }
  return it->second;
}

}  // namespace

PairwiseTally pairwise_compare(const std::vector<std::string>& systems,
                               const SegmentScoresBySystem& metric,
                               const SegmentScoresBySystem& human, double alpha,
                               std::vector<PairDecision>* decisions) {
  if (systems.size() < 2) {
    throw Error(ErrorKind::InsufficientData,
                "pairwise comparison needs at least 2 systems");
  }
  PairwiseTally tally;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    for (std::size_t j = i + 1; j < systems.size(); ++j) {
      const auto& a = systems[i];
      const auto& b = systems[j];
      const auto ha = values_of(lookup(human, a, "human"));
      const auto hb = values_of(lookup(human, b, "human"));
      const auto& ma = lookup(metric, a, "metric");
      const auto& mb = lookup(metric, b, "metric");

      const auto human_test = rank_sum_test(ha, hb);
      const bool human_sig = human_test.p_value < alpha;
      const double human_diff =
          std::accumulate(ha.begin(), ha.end(), 0.0) / ha.size() -
          std::accumulate(hb.begin(), hb.end(), 0.0) / hb.size();

      std::vector<double> xa, xb;
      for (const auto& [seg, score] : ma) {
        auto it = mb.find(seg);
        if (it == mb.end()) continue;
        xa.push_back(score);
        xb.push_back(it->second);
      }
      if (xa.size() != ma.size() || xb.size() != mb.size()) {
        throw Error(ErrorKind::MissingData, "metric segment scores of '" + a +
                                                "' and '" + b +
                                                "' cover different segments");
      }
      const auto metric_test = paired_t_test(xa, xb);

      PairVerdict verdict = PairVerdict::NotSignificant;
      if (metric_test.p_value < alpha) {
        const bool agree = sign(metric_test.statistic) != 0 &&
                           sign(metric_test.statistic) == sign(human_diff);
        verdict = agree ? PairVerdict::Correct : PairVerdict::Incorrect;
      }
      auto& counts =
          human_sig ? tally.human_significant : tally.human_not_significant;
      switch (verdict) {
        case PairVerdict::Correct: ++counts.correct; break;
        case PairVerdict::Incorrect: ++counts.incorrect; break;
        case PairVerdict::NotSignificant: ++counts.not_significant; break;
      }
      if (decisions) decisions->push_back({a, b, human_sig, verdict});
    }
  }
  return tally;
}

PairwiseTally pairwise_compare(const EvalDataset& dataset,
                               const SegmentScoresBySystem& metric,
                               double alpha) {
  std::vector<std::string> systems;
  SegmentScoresBySystem human;
  for (const auto& sys : dataset.systems) {
    systems.push_back(sys.system_name);
    human[sys.system_name] =
        dataset.human.segments_for(dataset.lang_pair, sys.system_name);
  }
  return pairwise_compare(systems, metric, human, alpha);
}

// ---------------------------------------------------------------------------

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                          std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ b);
}

std::map<int, double> subsample_correlations(
    const std::map<std::string, double>& human_system_scores,
    const SegmentScoresBySystem& metric, const std::vector<int>& sizes,
    int draws, std::uint64_t seed) {
  if (draws < 1) throw Error(ErrorKind::Configuration, "draws must be >= 1");
  auto filtered = filter_pair(human_system_scores);
  if (filtered.kept.size() < 2) {
    throw Error(ErrorKind::InsufficientData,
                "fewer than 2 systems survive outlier filtering");
  }

  // Segment matrix: rows are kept systems, columns shared segment ids.
  const auto& first = lookup(metric, filtered.kept.front(), "metric");
  std::vector<int> seg_ids;
  for (const auto& [seg, score] : first) seg_ids.push_back(seg);
  const auto n_seg = static_cast<Eigen::Index>(seg_ids.size());
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(filtered.kept.size()), n_seg);
  for (std::size_t s = 0; s < filtered.kept.size(); ++s) {
    const auto& row = lookup(metric, filtered.kept[s], "metric");
    if (row.size() != seg_ids.size()) {
      throw Error(ErrorKind::MissingData,
                  "system '" + filtered.kept[s] + "' has " +
                      std::to_string(row.size()) + " segments, expected " +
                      std::to_string(seg_ids.size()));
    }
    for (Eigen::Index c = 0; c < n_seg; ++c) {
      auto it = row.find(seg_ids[static_cast<std::size_t>(c)]);
      if (it == row.end()) {
        throw Error(ErrorKind::MissingData,
                    "system '" + filtered.kept[s] + "' lacks segment " +
                        std::to_string(seg_ids[static_cast<std::size_t>(c)]));
      }
      scores(static_cast<Eigen::Index>(s), c) = it->second;
    }
  }

  std::map<int, double> out;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_seg));
  for (int size : sizes) {
    if (size < 1 || size > n_seg) {
      throw Error(ErrorKind::Domain, "subset size " + std::to_string(size) +
                                         " outside [1, " +
                                         std::to_string(n_seg) + "]");
    }
    double mean_r = 0.0;
    for (int d = 0; d < draws; ++d) {
      std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(size),
                                      static_cast<std::uint64_t>(d)));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      for (int i = 0; i < size; ++i) {
        std::uniform_int_distribution<Eigen::Index> pick(i, n_seg - 1);
        std::swap(order[static_cast<std::size_t>(i)],
                  order[static_cast<std::size_t>(pick(rng))]);
      }
      std::sort(order.begin(), order.begin() + size);

      Eigen::VectorXd system_scores = Eigen::VectorXd::Zero(scores.rows());
      for (int i = 0; i < size; ++i) {
        system_scores += scores.col(order[static_cast<std::size_t>(i)]);
      }
      system_scores /= static_cast<double>(size);
      const double r = pearson(system_scores, filtered.human);
      mean_r += (r - mean_r) / static_cast<double>(d + 1);
    }
    out[size] = mean_r;
  }
  return out;
}

std::map<int, double> subsample_correlations(const EvalDataset& dataset,
                                             const SegmentScoresBySystem& metric,
                                             const std::vector<int>& sizes,
                                             int draws, std::uint64_t seed) {
  return subsample_correlations(dataset.human.systems_for(dataset.lang_pair),
                                metric, sizes, draws, seed);
}

}  // namespace mtpeer
