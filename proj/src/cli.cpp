#include "mtpeer/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtpeer/core_data.hpp"
#include "mtpeer/meta_eval.hpp"
#include "mtpeer/model1.hpp"
#include "mtpeer/ngram_metrics.hpp"
#include "mtpeer/segment_scoring.hpp"
#include "mtpeer/subword.hpp"
#include "mtpeer/synthetic.hpp"

namespace mtpeer::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20201;

enum class Format { Tsv, Json };

/// Everything a subcommand may read from the command line.
struct RunConfig {
  std::uint64_t seed = kDefaultSeed;
  Format format = Format::Tsv;
  std::string output;

  // score / tune-thresholds
  std::string method = "mean";
  double low = -1.0;
  double high = -0.6;
  std::vector<std::string> samples;
  std::string sample_mode = "token";
  std::string system;
  std::string lang_pair;
  std::string manifest;
  std::string segments_out;
  std::vector<double> grid;

  // meta-eval / pairwise / outliers / subsample
  std::string human;
  std::string human_seg;
  std::vector<std::string> scores;
  std::vector<std::string> metric_seg;
  int tails = 1;
  double alpha = 0.05;
  std::vector<int> sizes{100, 200, 400, 800};
  int draws = 10;
  std::string csv;

  // bleu / chrf / cross-bleu
  std::string ref;
  std::vector<std::string> hyps;
  std::string tokenize = "auto";
  std::string smooth = "none";
  int order = 0;
  double beta = 2.0;
  std::string side_a;
  std::string side_b;
  bool both = false;
  std::vector<std::string> matrix;

  // subword
  std::string corpus;
  std::string model;
  std::string input;
  int vocab_size = 8000;
  int rounds = 10;
  int nbest = 10;
  int k = 1;
  double sub_alpha = 1.0;
  std::string prefix;

  // toy-scorer
  std::string source;
  std::string target;
  std::string ids;
  int iterations = 5;

  // synth
  std::string out_dir;
  int segments = 1000;
  std::vector<double> rates{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
};

// Output sink: a file when --output is set, otherwise the command's stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(ErrorKind::Io, "cannot write " + path);
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

// "name=path" or a bare path named by its stem.
std::pair<std::string, std::string> named_path(const std::string& spec) {
  auto eq = spec.find('=');
  if (eq != std::string::npos && eq > 0) {
    return {spec.substr(0, eq), spec.substr(eq + 1)};
  }
  return {fs::path(spec).stem().string(), spec};
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> lines;
  for (auto& seg : load_text_segments(path)) lines.push_back(std::move(seg.text));
  return lines;
}

std::string segment_text(const std::vector<std::string>& pieces) {
  std::string out;
  for (const auto& p : pieces) {
    if (!out.empty()) out += ' ';
    for (char c : p) {
      if (c == ' ') {
        out += "\xE2\x96\x81";  // U+2581
      } else {
        out += c;
      }
    }
  }
  return out;
}

std::map<std::string, std::vector<fs::path>> read_manifest(
    const fs::path& path, const std::optional<LanguagePair>& only,
    std::map<std::string, LanguagePair>* pairs) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("lang_pair\tsystem\tfile", 0) != 0) {
    throw Error(ErrorKind::Parse, path.string() +
                                      ":1: expected header lang_pair<TAB>system<TAB>file");
  }
  std::map<std::string, std::vector<fs::path>> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string lp, sys, file;
    if (!std::getline(fields, lp, '\t') || !std::getline(fields, sys, '\t') ||
        !std::getline(fields, file)) {
      throw Error(ErrorKind::Parse,
                  path.string() + ":" + std::to_string(lineno) + ": expected 3 fields");
    }
    auto pair = LanguagePair::parse(lp);
    if (only && pair != *only) continue;
    fs::path file_path(file);
    if (file_path.is_relative()) file_path = path.parent_path() / file_path;
    const std::string key = pair.str() + "\t" + sys;
    out[key].push_back(file_path);
    if (pairs) pairs->emplace(key, pair);
  }
  return out;
}

SegmentScoresBySystem segment_table_for(const std::map<SegmentKey, double>& table,
                                        const LanguagePair& lp) {
  SegmentScoresBySystem out;
  for (const auto& [key, v] : table) {
    const auto& [klp, sys, seg] = key;
    if (klp == lp) out[sys][seg] = v;
  }
  return out;
}

// ---------------------------------------------------------------------------

int cmd_score(const RunConfig& cfg, std::ostream& out) {
  const auto method = AggregationMethod::parse(cfg.method, cfg.low, cfg.high);
  const auto mode = cfg.sample_mode == "segment" ? SampleMode::SegmentLevel
                                                 : SampleMode::TokenLevel;

  std::map<std::string, LanguagePair> pairs;
  std::map<std::string, std::vector<fs::path>> jobs;
  if (!cfg.manifest.empty()) {
    jobs = read_manifest(cfg.manifest, std::nullopt, &pairs);
  } else {
    if (cfg.samples.empty() || cfg.lang_pair.empty()) {
      throw Error(ErrorKind::Configuration,
                  "score needs --manifest or --samples with --lang-pair");
    }
    const auto lp = LanguagePair::parse(cfg.lang_pair);
    const std::string name =
        cfg.system.empty() ? fs::path(cfg.samples.front()).stem().string() : cfg.system;
    const std::string key = lp.str() + "\t" + name;
    for (const auto& s : cfg.samples) jobs[key].push_back(s);
    pairs.emplace(key, lp);
  }

  std::vector<SystemScore> results;
  std::vector<std::tuple<LanguagePair, std::string, std::vector<SegmentScore>>> per_segment;
  for (const auto& [key, files] : jobs) {
    const auto lp = pairs.at(key);
    const auto name = key.substr(key.find('\t') + 1);
    std::vector<std::vector<TokenScoredSegment>> samples;
    for (const auto& f : files) samples.push_back(load_token_scores(f));
    std::vector<SegmentScore> segs;
    try {
      segs = score_samples(samples, method, mode);
    } catch (const Error& e) {
      throw e.within(files.front().string());
    }
    results.push_back(system_score(segs, name, lp, method));
    per_segment.emplace_back(lp, name, std::move(segs));
  }
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
    return std::tie(a.lang_pair, a.system_name) < std::tie(b.lang_pair, b.system_name);
  });

  Sink sink(cfg.output, out);
  if (cfg.format == Format::Json) {
    json rows = json::array();
    for (const auto& r : results) {
      rows.push_back({{"system", r.system_name},
                      {"lang_pair", r.lang_pair.str()},
                      {"score", r.value},
                      {"n_segments", r.n_segments},
                      {"method", r.method.name()}});
    }
    *sink << rows.dump(2) << '\n';
  } else {
    *sink << "system\tlang_pair\tscore\tn_segments\n";
    for (const auto& r : results) {
      *sink << r.system_name << '\t' << r.lang_pair.str() << '\t'
            << format_full(r.value) << '\t' << r.n_segments << '\n';
    }
  }

  if (!cfg.segments_out.empty()) {
    std::ofstream seg_out(cfg.segments_out, std::ios::binary);
    if (!seg_out) throw Error(ErrorKind::Io, "cannot write " + cfg.segments_out);
    seg_out << "lang_pair\tsystem\tseg\tscore\n";
    for (const auto& [lp, name, segs] : per_segment) {
      for (const auto& s : segs) {
        seg_out << lp.str() << '\t' << name << '\t' << s.seg_id << '\t'
                << format_full(s.value) << '\n';
      }
    }
  }
  return 0;
}

int cmd_meta_eval(const RunConfig& cfg, std::ostream& out) {
  const auto human = load_human_scores(cfg.human);
  std::vector<std::pair<std::string, MetricScores>> metrics;
  for (const auto& spec : cfg.scores) {
    auto [name, path] = named_path(spec);
    metrics.emplace_back(name, load_system_table(path));
  }

  std::vector<MetricReport> reports;
  for (const auto& [name, scores] : metrics) {
    try {
      reports.push_back(metric_report(human, scores));
    } catch (const Error& e) {
      throw e.within(name);
    }
  }

  // A metric is marked on a pair when it beats every other metric there.
  std::vector<std::set<LanguagePair>> wins(metrics.size());
  if (metrics.size() > 1) {
    for (std::size_t a = 0; a < metrics.size(); ++a) {
      std::map<LanguagePair, int> beaten;
      for (std::size_t b = 0; b < metrics.size(); ++b) {
        if (a == b) continue;
        for (const auto& c :
             compare_metrics(human, metrics[a].second, metrics[b].second, cfg.tails)) {
          if (c.a_significantly_better(cfg.alpha)) ++beaten[c.lang_pair];
        }
      }
      for (const auto& [lp, count] : beaten) {
        if (count == static_cast<int>(metrics.size()) - 1) wins[a].insert(lp);
      }
    }
  }

  std::vector<LanguagePair> pairs;
  for (const auto& r : reports) {
    for (const auto& c : r.per_pair) {
      if (std::find(pairs.begin(), pairs.end(), c.lang_pair) == pairs.end()) {
        pairs.push_back(c.lang_pair);
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  const std::vector<PairGroup> groups{PairGroup::EnXx, PairGroup::XxEn, PairGroup::XxYy};

  // Human-readable table.
  out << std::left << std::setw(16) << "Metric" << std::right << std::setw(8) << "All";
  for (auto g : groups) out << std::setw(8) << to_string(g);
  for (const auto& lp : pairs) out << std::setw(8) << lp.str();
  out << '\n';
  for (std::size_t m = 0; m < reports.size(); ++m) {
    const auto& r = reports[m];
    out << std::left << std::setw(16) << metrics[m].first << std::right
        << std::setw(8) << fixed3(r.weighted_average);
    for (auto g : groups) {
      auto it = r.groups.find(g);
      out << std::setw(8) << (it == r.groups.end() ? std::string("-") : fixed3(it->second));
    }
    for (const auto& lp : pairs) {
      auto it = std::find_if(r.per_pair.begin(), r.per_pair.end(),
                             [&](const auto& c) { return c.lang_pair == lp; });
      std::string cell = "-";
      if (it != r.per_pair.end()) {
        cell = fixed3(it->r) + (wins[m].contains(lp) ? "*" : "") +
               (it->reliable() ? "" : "!");
      }
      out << std::setw(8) << cell;
    }
    out << '\n';
  }
  if (!reports.empty()) {
    out << "\nOutliers\n";
    for (const auto& c : reports.front().per_pair) {
      out << c.lang_pair.str() << '\t'
          << (c.outliers.empty() ? std::string("-") : join(c.outliers, ", ")) << '\n';
    }
  }

  if (cfg.output.empty()) return 0;
  Sink sink(cfg.output, out);
  if (cfg.format == Format::Json) {
    json doc = json::array();
    for (std::size_t m = 0; m < reports.size(); ++m) {
      const auto& r = reports[m];
      json pairs_json = json::array();
      for (const auto& c : r.per_pair) {
        pairs_json.push_back({{"lang_pair", c.lang_pair.str()},
                              {"r", c.r},
                              {"n_systems", c.n_systems},
                              {"outliers", c.outliers},
                              {"reliable", c.reliable()},
                              {"significant_win", wins[m].contains(c.lang_pair)}});
      }
      json group_json = json::object();
      group_json["All"] = r.weighted_average;
      for (const auto& [g, v] : r.groups) group_json[std::string(to_string(g))] = v;
      doc.push_back({{"metric", metrics[m].first},
                     {"per_pair", pairs_json},
                     {"groups", group_json}});
    }
    *sink << doc.dump(2) << '\n';
  } else {
    *sink << "metric\tscope\tr\tn_systems\toutliers\n";
    for (std::size_t m = 0; m < reports.size(); ++m) {
      const auto& r = reports[m];
      auto weight = [](const std::vector<WeightedCorrelation>& v) {
        double w = 0.0;
        for (const auto& x : v) w += x.weight;
        return static_cast<int>(w);
      };
      *sink << metrics[m].first << "\tAll\t" << format_full(r.weighted_average)
            << '\t' << weight(r.averaging_inputs()) << "\t-\n";
      for (const auto& [g, v] : r.groups) {
        *sink << metrics[m].first << '\t' << to_string(g) << '\t' << format_full(v)
              << '\t' << weight(r.averaging_inputs(g)) << "\t-\n";
      }
      for (const auto& c : r.per_pair) {
        *sink << metrics[m].first << '\t' << c.lang_pair.str() << '\t'
              << format_full(c.r) << '\t' << c.n_systems << '\t'
              << (c.outliers.empty() ? std::string("-") : join(c.outliers, ","))
              << '\n';
      }
    }
  }
  return 0;
}

int cmd_outliers(const RunConfig& cfg, std::ostream& out) {
  const auto human = load_human_scores(cfg.human);
  Sink sink(cfg.output, out);
  *sink << "lang\tOutliers\n";
  for (const auto& lp : human.language_pairs()) {
    auto split = mad_outliers(human.systems_for(lp));
    std::vector<std::string> names(split.outliers.begin(), split.outliers.end());
    *sink << lp.str() << '\t' << (names.empty() ? std::string("-") : join(names, ", "))
          << '\n';
  }
  return 0;
}

int cmd_pairwise(const RunConfig& cfg, std::ostream& out) {
  const auto human = load_human_scores(cfg.human, fs::path(cfg.human_seg));
  std::vector<std::pair<std::string, std::map<SegmentKey, double>>> metrics;
  for (const auto& spec : cfg.metric_seg) {
    auto [name, path] = named_path(spec);
    metrics.emplace_back(name, load_segment_table(path));
  }

  const std::vector<std::string> scopes{"All", "en-xx", "xx-en", "xx-yy"};
  std::vector<std::map<std::string, PairwiseTally>> tallies(metrics.size());
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    for (const auto& lp : human.language_pairs()) {
      const auto metric = segment_table_for(metrics[m].second, lp);
      if (metric.empty()) continue;
      std::vector<std::string> systems;
      SegmentScoresBySystem human_seg;
      for (const auto& [sys, score] : human.systems_for(lp)) {
        systems.push_back(sys);
        human_seg[sys] = human.segments_for(lp, sys);
      }
      PairwiseTally t;
      try {
        t = pairwise_compare(systems, metric, human_seg, cfg.alpha);
      } catch (const Error& e) {
        throw e.within(metrics[m].first + " " + lp.str());
      }
      tallies[m]["All"] += t;
      tallies[m][std::string(to_string(group_of(lp)))] += t;
    }
  }

  out << std::left << std::setw(12) << "Metric" << std::right << std::setw(6)
      << "C" << std::setw(6) << "IC" << std::setw(6) << "NS" << "  |"
      << std::setw(6) << "C" << std::setw(6) << "IC" << std::setw(6) << "NS"
      << "\n" << std::left << std::setw(12) << "" << std::right
      << std::setw(18) << "Human-S" << "  |" << std::setw(18) << "Human-NS" << '\n';
  for (const auto& scope : scopes) {
    bool any = false;
    for (const auto& t : tallies) any = any || t.contains(scope);
    if (!any) continue;
    out << (scope == "All" ? std::string("All Systems") : scope + " Systems") << '\n';
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      auto it = tallies[m].find(scope);
      if (it == tallies[m].end()) continue;
      const auto& t = it->second;
      out << std::left << std::setw(12) << metrics[m].first << std::right
          << std::setw(6) << t.human_significant.correct << std::setw(6)
          << t.human_significant.incorrect << std::setw(6)
          << t.human_significant.not_significant << "  |" << std::setw(6)
          << t.human_not_significant.correct << std::setw(6)
          << t.human_not_significant.incorrect << std::setw(6)
          << t.human_not_significant.not_significant << '\n';
    }
  }

  if (cfg.output.empty()) return 0;
  Sink sink(cfg.output, out);
  if (cfg.format == Format::Json) {
    json doc = json::array();
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      for (const auto& [scope, t] : tallies[m]) {
        doc.push_back({{"metric", metrics[m].first},
                       {"scope", scope},
                       {"human_s", {t.human_significant.correct,
                                    t.human_significant.incorrect,
                                    t.human_significant.not_significant}},
                       {"human_ns", {t.human_not_significant.correct,
                                     t.human_not_significant.incorrect,
                                     t.human_not_significant.not_significant}}});
      }
    }
    *sink << doc.dump(2) << '\n';
  } else {
    *sink << "metric\tscope\ths_c\ths_ic\ths_ns\thns_c\thns_ic\thns_ns\n";
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      for (const auto& [scope, t] : tallies[m]) {
        *sink << metrics[m].first << '\t' << scope << '\t'
              << t.human_significant.correct << '\t' << t.human_significant.incorrect
              << '\t' << t.human_significant.not_significant << '\t'
              << t.human_not_significant.correct << '\t'
              << t.human_not_significant.incorrect << '\t'
              << t.human_not_significant.not_significant << '\n';
      }
    }
  }
  return 0;
}

int cmd_subsample(const RunConfig& cfg, std::ostream& out) {
  const auto human = load_human_scores(cfg.human);
  const auto table = load_segment_table(named_path(cfg.metric_seg.front()).second);

  std::map<LanguagePair, std::map<int, double>> curves;
  for (const auto& lp : human.language_pairs()) {
    if (!cfg.lang_pair.empty() && lp != LanguagePair::parse(cfg.lang_pair)) continue;
    const auto metric = segment_table_for(table, lp);
    if (metric.empty()) continue;
    try {
      curves[lp] = subsample_correlations(human.systems_for(lp), metric, cfg.sizes,
                                          cfg.draws, derive_seed(cfg.seed, 0));
    } catch (const Error& e) {
      throw e.within(lp.str());
    }
  }
  if (curves.empty()) {
    throw Error(ErrorKind::MissingData, "no language pair has metric segment scores");
  }

  Sink sink(cfg.output, out);
  if (cfg.format == Format::Json) {
    json doc = json::object();
    for (const auto& [lp, curve] : curves) {
      json c = json::object();
      for (const auto& [size, r] : curve) c[std::to_string(size)] = r;
      doc[lp.str()] = c;
    }
    *sink << doc.dump(2) << '\n';
  } else {
    *sink << "size";
    for (const auto& [lp, curve] : curves) *sink << '\t' << lp.str();
    *sink << "\taverage\n";
    for (int size : cfg.sizes) {
      *sink << size;
      double mean = 0.0;
      int k = 0;
      for (const auto& [lp, curve] : curves) {
        const double r = curve.at(size);
        *sink << '\t' << format_full(r);
        mean += (r - mean) / ++k;
      }
      *sink << '\t' << format_full(mean) << '\n';
    }
  }
  if (!cfg.csv.empty()) {
    std::ofstream csv(cfg.csv, std::ios::binary);
    if (!csv) throw Error(ErrorKind::Io, "cannot write " + cfg.csv);
    csv << "lang_pair,size,mean_r\n";
    for (const auto& [lp, curve] : curves) {
      for (const auto& [size, r] : curve) {
        csv << lp.str() << ',' << size << ',' << format_full(r) << '\n';
      }
    }
  }
  return 0;
}

int cmd_tune(const RunConfig& cfg, std::ostream& out) {
  const auto human = load_human_scores(cfg.human);
  std::map<std::string, LanguagePair> pairs;
  auto jobs = read_manifest(cfg.manifest, std::nullopt, &pairs);
  std::map<LanguagePair, DevSet> dev;
  for (const auto& [key, files] : jobs) {
    const auto lp = pairs.at(key);
    const auto name = key.substr(key.find('\t') + 1);
    auto& d = dev[lp];
    d.lang_pair = lp;
    d.token_scores[name] = load_token_scores(files.front());
    auto it = human.system_scores.find({lp, name});
    if (it == human.system_scores.end()) {
      throw Error(ErrorKind::MissingJudgment,
                  cfg.human + ": no score for " + lp.str() + " " + name);
    }
    d.human[name] = it->second;
  }
  std::vector<DevSet> sets;
  for (auto& [lp, d] : dev) sets.push_back(std::move(d));
  const auto choice =
      tune_thresholds(sets, cfg.grid.empty() ? default_threshold_grid() : cfg.grid);
  Sink sink(cfg.output, out);
  *sink << "low\thigh\tcorrelation\n"
        << format_full(choice.low) << '\t' << format_full(choice.high) << '\t'
        << format_full(choice.correlation) << '\n';
  return 0;
}

BleuConfig bleu_config(const RunConfig& cfg) {
  BleuConfig b;
  if (cfg.order > 0) b.max_order = cfg.order;
  b.smoothing = cfg.smooth == "exp" ? BleuSmoothing::ExpFloor : BleuSmoothing::None;
  if (cfg.tokenize == "auto") {
    const bool zh = !cfg.lang_pair.empty() &&
                    LanguagePair::parse(cfg.lang_pair).target() == "zh";
    b.tokenizer = zh ? BleuTokenizer::Zh : BleuTokenizer::Intl;
  } else {
    b.tokenizer = parse_tokenizer(cfg.tokenize);
  }
  return b;
}

int cmd_ngram(const RunConfig& cfg, std::ostream& out, bool is_chrf) {
  const auto refs = read_lines(cfg.ref);
  Sink sink(cfg.output, out);
  const bool with_pair = !cfg.lang_pair.empty();
  const auto lp = with_pair ? LanguagePair::parse(cfg.lang_pair).str() : std::string{};
  *sink << (with_pair ? "system\tlang_pair\tscore\n" : "system\tscore\n");
  std::vector<std::pair<std::string, std::string>> hyps;
  for (const auto& spec : cfg.hyps) hyps.push_back(named_path(spec));
  std::sort(hyps.begin(), hyps.end());
  for (const auto& [name, path] : hyps) {
    double score = 0.0;
    try {
      if (is_chrf) {
        ChrfConfig c;
        if (cfg.order > 0) c.char_order = cfg.order;
        c.beta = cfg.beta;
        score = chrf(read_lines(path), refs, c);
      } else {
        score = bleu(read_lines(path), refs, bleu_config(cfg));
      }
    } catch (const Error& e) {
      throw e.within(path);
    }
    *sink << name << '\t';
    if (with_pair) *sink << lp << '\t';
    *sink << format_full(score) << '\n';
  }
  return 0;
}

int cmd_cross_bleu(const RunConfig& cfg, std::ostream& out) {
  const auto bc = bleu_config(cfg);
  Sink sink(cfg.output, out);
  if (!cfg.matrix.empty()) {
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> outputs;
    for (const auto& spec : cfg.matrix) {
      auto [name, path] = named_path(spec);
      names.push_back(name);
      outputs.push_back(read_lines(path));
    }
    const auto m = cross_bleu_matrix(names, outputs, bc);
    *sink << "hyp\\ref";
    for (const auto& n : names) *sink << '\t' << n;
    *sink << "\taverage\n";
    for (std::size_t i = 0; i < names.size(); ++i) {
      *sink << names[i];
      for (std::size_t j = 0; j < names.size(); ++j) {
        *sink << '\t' << format_full(m.scores(static_cast<Eigen::Index>(i),
                                              static_cast<Eigen::Index>(j)));
      }
      *sink << '\t' << format_full(m.average[static_cast<Eigen::Index>(i)]) << '\n';
    }
    return 0;
  }
  if (cfg.side_a.empty() || cfg.side_b.empty()) {
    throw Error(ErrorKind::Configuration, "cross-bleu needs --a and --b, or --matrix");
  }
  const auto a = read_lines(cfg.side_a);
  const auto b = read_lines(cfg.side_b);
  *sink << "direction\tscore\n";
  *sink << "a->b\t" << format_full(cross_bleu(a, b, bc)) << '\n';
  if (cfg.both) *sink << "b->a\t" << format_full(cross_bleu(b, a, bc)) << '\n';
  return 0;
}

int cmd_subword_train(const RunConfig& cfg, std::ostream& out) {
  auto corpus = read_lines(cfg.corpus);
  corpus.erase(std::remove(corpus.begin(), corpus.end(), std::string{}), corpus.end());
  std::vector<TrainingStep> trace;
  const auto model = train_unigram(corpus, cfg.vocab_size, cfg.rounds, {}, &trace);
  model.save(cfg.model);
  out << "pieces\t" << model.size() << "\nlog_likelihood\t"
      << format_full(trace.back().log_likelihood) << '\n';
  return 0;
}

int cmd_subword_nbest(const RunConfig& cfg, std::ostream& out) {
  const auto model = UnigramSubwordModel::load(cfg.model);
  const auto lines = load_text_segments(cfg.input);
  Sink sink(cfg.output, out);
  *sink << "seg\trank\tscore\tpieces\n";
  for (const auto& line : lines) {
    if (line.text.empty()) continue;
    std::vector<Segmentation> list;
    try {
      list = nbest_segmentations(model, line.text, cfg.nbest);
    } catch (const Error& e) {
      throw e.within(cfg.input + ":" + std::to_string(line.seg_id + 1));
    }
    for (std::size_t r = 0; r < list.size(); ++r) {
      *sink << line.seg_id << '\t' << r << '\t' << format_full(list[r].score) << '\t'
            << segment_text(list[r].pieces) << '\n';
    }
  }
  return 0;
}

int cmd_subword_sample(const RunConfig& cfg, std::ostream& out) {
  if (cfg.k < 1) throw Error(ErrorKind::Configuration, "--k must be >= 1");
  const auto model = UnigramSubwordModel::load(cfg.model);
  const auto lines = load_text_segments(cfg.input);
  for (int k = 0; k < cfg.k; ++k) {
    const auto path = cfg.prefix + "." + std::to_string(k) + ".txt";
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorKind::Io, "cannot write " + path);
    for (const auto& line : lines) {
      if (line.text.empty()) {
        file << '\n';
        continue;
      }
      const auto seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(k),
                                    static_cast<std::uint64_t>(line.seg_id));
      try {
        file << segment_text(
                    sample_segmentation(model, line.text, cfg.nbest, cfg.sub_alpha, seed)
                        .pieces)
             << '\n';
      } catch (const Error& e) {
        throw e.within(cfg.input + ":" + std::to_string(line.seg_id + 1));
      }
    }
    out << path << '\n';
  }
  return 0;
}

std::vector<std::vector<std::string>> tokenized_lines(const fs::path& path) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : read_lines(path)) out.push_back(split_whitespace(line));
  return out;
}

int cmd_toy_train(const RunConfig& cfg, std::ostream& out) {
  const auto src = tokenized_lines(cfg.source);
  const auto tgt = tokenized_lines(cfg.target);
  if (src.size() != tgt.size()) {
    throw Error(ErrorKind::Alignment, cfg.source + " and " + cfg.target +
                                          " differ in line count");
  }
  std::vector<SentencePair> corpus;
  for (std::size_t i = 0; i < src.size(); ++i) corpus.push_back({src[i], tgt[i]});
  const auto trained = train_model1(corpus, cfg.iterations);
  trained.table.save(cfg.model);
  out << "iteration\tlog_likelihood\n";
  for (std::size_t i = 0; i < trained.log_likelihood.size(); ++i) {
    out << i << '\t' << format_full(trained.log_likelihood[i]) << '\n';
  }
  return 0;
}

int cmd_toy_score(const RunConfig& cfg, std::ostream& out) {
  const auto table = LexicalTable::load(cfg.model);
  std::optional<fs::path> ids;
  if (!cfg.ids.empty()) ids = cfg.ids;
  const auto src = load_text_segments(cfg.source, ids);
  const auto tgt = load_text_segments(cfg.target, ids);
  if (src.size() != tgt.size()) {
    throw Error(ErrorKind::Alignment, cfg.source + " and " + cfg.target +
                                          " differ in segment count");
  }
  std::vector<TokenScoredSegment> scored;
  for (std::size_t i = 0; i < tgt.size(); ++i) {
    try {
      scored.push_back(score_tokens(table, split_whitespace(src[i].text),
                                    split_whitespace(tgt[i].text), tgt[i].seg_id));
    } catch (const Error& e) {
      throw e.within(cfg.target);
    }
  }
  Sink sink(cfg.output, out);
  write_token_scores(*sink, scored);
  return 0;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  NoiseBenchmarkConfig bc;
  bc.seed = cfg.seed;
  bc.test_segments = cfg.segments;
  bc.noise_rates = cfg.rates;
  const auto bench = make_noise_benchmark(bc);
  const auto lp = LanguagePair::parse(cfg.lang_pair.empty() ? "de-en" : cfg.lang_pair);
  const auto human = synthetic_human(bench, lp, 10.0, derive_seed(cfg.seed, 1));

  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir / "systems");
  auto write = [&](const fs::path& p, const auto& rows) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot write " + p.string());
    for (const auto& r : rows) f << join_tokens(r) << '\n';
  };
  std::vector<std::vector<std::string>> train_src, train_tgt;
  for (const auto& p : bench.train) {
    train_src.push_back(p.source);
    train_tgt.push_back(p.target);
  }
  write(dir / "train.src", train_src);
  write(dir / "train.tgt", train_tgt);
  write(dir / "test.src", bench.test_sources);
  write(dir / "ref.txt", bench.references);
  for (const auto& sys : bench.systems) {
    write(dir / "systems" / (sys.name + ".txt"), sys.outputs);
  }

  std::ofstream h(dir / "human.tsv", std::ios::binary);
  h << "lang_pair\tsystem\tscore\n";
  for (const auto& [key, v] : human.system_scores) {
    h << key.first.str() << '\t' << key.second << '\t' << format_full(v) << '\n';
  }
  std::ofstream hs(dir / "human_seg.tsv", std::ios::binary);
  hs << "lang_pair\tsystem\tseg\tscore\n";
  for (const auto& [key, v] : human.segment_scores) {
    const auto& [klp, sys, seg] = key;
    hs << klp.str() << '\t' << sys << '\t' << seg << '\t' << format_full(v) << '\n';
  }
  out << dir.string() << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Reference-free MT scoring and metric meta-evaluation", "mtpeer"};
  app.require_subcommand(1);
  std::map<std::string, Format> formats{{"tsv", Format::Tsv}, {"json", Format::Json}};

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_option("--format", cfg.format, "Machine-readable format")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    sub->add_option("-o,--output", cfg.output, "Machine-readable output file");
  };
  const auto existing = CLI::ExistingFile;

  auto* score = app.add_subcommand("score", "Segment and system scores from token log-probabilities");
  common(score);
  score->add_option("--method", cfg.method)
      ->check(CLI::IsMember({"sum", "mean", "median", "min", "negstd", "threshold"}));
  score->add_option("--low", cfg.low);
  score->add_option("--high", cfg.high);
  score->add_option("--samples", cfg.samples, "One token-score file per sample")->check(existing);
  score->add_option("--sample-mode", cfg.sample_mode)->check(CLI::IsMember({"token", "segment"}));
  score->add_option("--system", cfg.system);
  score->add_option("--lang-pair", cfg.lang_pair);
  score->add_option("--manifest", cfg.manifest, "TSV lang_pair/system/file")->check(existing);
  score->add_option("--segments-out", cfg.segments_out, "Write segment scores here");

  auto* meta = app.add_subcommand("meta-eval", "Correlation of metrics with human scores");
  common(meta);
  meta->add_option("--human", cfg.human)->required()->check(existing);
  meta->add_option("--scores", cfg.scores, "[name=]file")->required();
  meta->add_option("--tails", cfg.tails)->check(CLI::IsMember({1, 2}));
  meta->add_option("--alpha", cfg.alpha);

  auto* pairwise = app.add_subcommand("pairwise", "Pairwise system ranking agreement");
  common(pairwise);
  pairwise->add_option("--human", cfg.human)->required()->check(existing);
  pairwise->add_option("--human-seg", cfg.human_seg)->required()->check(existing);
  pairwise->add_option("--metric-seg", cfg.metric_seg, "[name=]file")->required();
  pairwise->add_option("--alpha", cfg.alpha);

  auto* outliers = app.add_subcommand("outliers", "MAD outlier systems per language pair");
  common(outliers);
  outliers->add_option("--human", cfg.human)->required()->check(existing);

  for (const char* name : {"bleu", "chrf"}) {
    const bool is_bleu = std::string_view(name) == "bleu";
    auto* sub = app.add_subcommand(name, is_bleu ? "Corpus BLEU" : "Corpus chrF");
    common(sub);
    sub->add_option("--ref", cfg.ref)->required()->check(existing);
    sub->add_option("--hyp", cfg.hyps, "[name=]file")->required();
    sub->add_option("--lang-pair", cfg.lang_pair);
    sub->add_option("--order", cfg.order);
    if (is_bleu) {
      sub->add_option("--tokenize", cfg.tokenize)
          ->check(CLI::IsMember({"auto", "intl", "none", "zh"}));
      sub->add_option("--smooth", cfg.smooth)->check(CLI::IsMember({"none", "exp"}));
    } else {
      sub->add_option("--beta", cfg.beta);
    }
  }

  auto* xbleu = app.add_subcommand("cross-bleu", "BLEU between system outputs");
  common(xbleu);
  xbleu->add_option("--a", cfg.side_a)->check(existing);
  xbleu->add_option("--b", cfg.side_b)->check(existing);
  xbleu->add_flag("--both", cfg.both, "Report both directions");
  xbleu->add_option("--matrix", cfg.matrix, "[name=]file for every system");
  xbleu->add_option("--tokenize", cfg.tokenize)
      ->check(CLI::IsMember({"auto", "intl", "none", "zh"}));
  xbleu->add_option("--lang-pair", cfg.lang_pair);

  auto* subsample = app.add_subcommand("subsample", "Correlation versus test-set size");
  common(subsample);
  subsample->add_option("--human", cfg.human)->required()->check(existing);
  subsample->add_option("--metric-seg", cfg.metric_seg)->required()->expected(1);
  subsample->add_option("--sizes", cfg.sizes)->delimiter(',');
  subsample->add_option("--draws", cfg.draws);
  subsample->add_option("--lang-pair", cfg.lang_pair);
  subsample->add_option("--csv", cfg.csv, "Plot-ready curves");

  auto* tune = app.add_subcommand("tune-thresholds", "Grid search for confidence thresholds");
  common(tune);
  tune->add_option("--human", cfg.human)->required()->check(existing);
  tune->add_option("--manifest", cfg.manifest)->required()->check(existing);
  tune->add_option("--grid", cfg.grid)->delimiter(',');

  auto* subword = app.add_subcommand("subword", "Unigram subword model");
  subword->require_subcommand(1);
  auto* sw_train = subword->add_subcommand("train");
  common(sw_train);
  sw_train->add_option("--corpus", cfg.corpus)->required()->check(existing);
  sw_train->add_option("--vocab-size", cfg.vocab_size);
  sw_train->add_option("--rounds", cfg.rounds);
  sw_train->add_option("--model", cfg.model)->required();
  auto* sw_nbest = subword->add_subcommand("nbest");
  common(sw_nbest);
  sw_nbest->add_option("--model", cfg.model)->required()->check(existing);
  sw_nbest->add_option("--input", cfg.input)->required()->check(existing);
  sw_nbest->add_option("--n", cfg.nbest);
  auto* sw_sample = subword->add_subcommand("sample");
  common(sw_sample);
  sw_sample->add_option("--model", cfg.model)->required()->check(existing);
  sw_sample->add_option("--input", cfg.input)->required()->check(existing);
  sw_sample->add_option("--k", cfg.k);
  sw_sample->add_option("--alpha", cfg.sub_alpha);
  sw_sample->add_option("--n", cfg.nbest);
  sw_sample->add_option("--prefix", cfg.prefix)->required();

  auto* toy = app.add_subcommand("toy-scorer", "IBM Model 1 token scorer");
  toy->require_subcommand(1);
  auto* toy_train = toy->add_subcommand("train");
  common(toy_train);
  toy_train->add_option("--source", cfg.source)->required()->check(existing);
  toy_train->add_option("--target", cfg.target)->required()->check(existing);
  toy_train->add_option("--iterations", cfg.iterations);
  toy_train->add_option("--model", cfg.model)->required();
  auto* toy_score = toy->add_subcommand("score");
  common(toy_score);
  toy_score->add_option("--model", cfg.model)->required()->check(existing);
  toy_score->add_option("--source", cfg.source)->required()->check(existing);
  toy_score->add_option("--target", cfg.target)->required()->check(existing);
  toy_score->add_option("--ids", cfg.ids)->check(existing);

  auto* synth = app.add_subcommand("synth", "Write the synthetic noise benchmark");
  common(synth);
  synth->add_option("--out", cfg.out_dir)->required();
  synth->add_option("--segments", cfg.segments);
  synth->add_option("--rates", cfg.rates)->delimiter(',');
  synth->add_option("--lang-pair", cfg.lang_pair);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*score) return cmd_score(cfg, out);
    if (*meta) return cmd_meta_eval(cfg, out);
    if (*pairwise) return cmd_pairwise(cfg, out);
    if (*outliers) return cmd_outliers(cfg, out);
    if (*app.get_subcommand("bleu")) return cmd_ngram(cfg, out, false);
    if (*app.get_subcommand("chrf")) return cmd_ngram(cfg, out, true);
    if (*xbleu) return cmd_cross_bleu(cfg, out);
    if (*subsample) return cmd_subsample(cfg, out);
    if (*tune) return cmd_tune(cfg, out);
    if (*sw_train) return cmd_subword_train(cfg, out);
    if (*sw_nbest) return cmd_subword_nbest(cfg, out);
    if (*sw_sample) return cmd_subword_sample(cfg, out);
    if (*toy_train) return cmd_toy_train(cfg, out);
    if (*toy_score) return cmd_toy_score(cfg, out);
    if (*synth) return cmd_synth(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << "usage error: no command\n";
  return 2;
}

}  // namespace mtpeer::cli
