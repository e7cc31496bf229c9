#include "mtpeer/core_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mtpeer/error.hpp"

namespace mtpeer {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool valid_code(const std::string& code) {
  return code.size() >= 2 &&
         std::all_of(code.begin(), code.end(),
                     [](unsigned char c) { return std::isalpha(c); });
}

std::string where(const std::string& origin, std::size_t line) {
  return origin + ":" + std::to_string(line);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return in;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return fields;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

double parse_real(const std::string& text, const std::string& at) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw Error(ErrorKind::Parse, at + ": not a finite number: '" + text + "'");
  }
  return value;
}

int parse_int(const std::string& text, const std::string& at) {
  int value = 0;
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), last, value);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorKind::Parse, at + ": not an integer: '" + text + "'");
  }
  return value;
}

// Column lookup for header-driven tables.
struct Columns {
  std::map<std::string, std::size_t> index;

  std::size_t at(const std::string& name, const std::string& origin) const {
    auto it = index.find(name);
    if (it == index.end()) {
      throw Error(ErrorKind::Parse,
                  where(origin, 1) + ": missing column '" + name + "'");
    }
    return it->second;
  }
};

Columns read_header(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::Parse, origin + ": missing header line");
  }
  strip_cr(line);
  Columns cols;
  auto fields = split_tabs(line);
  for (std::size_t i = 0; i < fields.size(); ++i) cols.index[fields[i]] = i;
  return cols;
}

template <typename RowFn>
void for_each_row(std::istream& in, const std::string& origin,
                  std::size_t min_fields, RowFn&& fn) {
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() < min_fields) {
      throw Error(ErrorKind::Parse, where(origin, lineno) + ": expected " +
                                        std::to_string(min_fields) +
                                        " tab-separated fields");
    }
    fn(fields, where(origin, lineno));
  }
}

LanguagePair parse_pair_at(const std::string& text, const std::string& at) {
  try {
    return LanguagePair::parse(text);
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, at + ": " + e.detail());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

LanguagePair::LanguagePair(std::string source, std::string target)
    : source_(lowercase(source)), target_(lowercase(target)) {
  if (!valid_code(source_) || !valid_code(target_)) {
    throw Error(ErrorKind::Domain,
                "invalid language code in '" + source_ + "-" + target_ + "'");
  }
  if (source_ == target_) {
    throw Error(ErrorKind::Domain,
                "source and target language are both '" + source_ + "'");
  }
}

LanguagePair LanguagePair::parse(std::string_view text) {
  auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw Error(ErrorKind::Parse,
                "language pair '" + std::string(text) + "' is not 'src-tgt'");
  }
  return LanguagePair(std::string(text.substr(0, dash)),
                      std::string(text.substr(dash + 1)));
}

PairGroup group_of(const LanguagePair& lp) {
  if (lp.source() == "en") return PairGroup::EnXx;
  if (lp.target() == "en") return PairGroup::XxEn;
  return PairGroup::XxYy;
}

std::string_view to_string(PairGroup group) {
  switch (group) {
    case PairGroup::EnXx: return "en-xx";
    case PairGroup::XxEn: return "xx-en";
    case PairGroup::XxYy: return "xx-yy";
  }
  return "?";
}

void TokenScoredSegment::validate() const {
  if (tokens.empty() || logprobs.size() == 0) {
    throw Error(ErrorKind::Structural,
                "segment " + std::to_string(seg_id) + " has no tokens");
  }
  if (static_cast<Eigen::Index>(tokens.size()) != logprobs.size()) {
    throw Error(ErrorKind::Structural,
                "segment " + std::to_string(seg_id) + " has " +
                    std::to_string(tokens.size()) + " tokens but " +
                    std::to_string(logprobs.size()) + " log-probabilities");
  }
  for (Eigen::Index i = 0; i < logprobs.size(); ++i) {
    if (!std::isfinite(logprobs[i])) {
      throw Error(ErrorKind::Parse, "segment " + std::to_string(seg_id) +
                                        " has a non-finite log-probability");
    }
    if (logprobs[i] > 0.0) {
      throw Error(ErrorKind::Domain, "segment " + std::to_string(seg_id) +
                                         " has positive log-probability " +
                                         format_full(logprobs[i]));
    }
  }
}

std::map<std::string, double> HumanJudgments::systems_for(
    const LanguagePair& lp) const {
  std::map<std::string, double> out;
  for (const auto& [key, value] : system_scores) {
    if (key.first == lp) out.emplace(key.second, value);
  }
  return out;
}

std::map<int, double> HumanJudgments::segments_for(
    const LanguagePair& lp, const std::string& system) const {
  std::map<int, double> out;
  auto it = segment_scores.lower_bound(
      {lp, system, std::numeric_limits<int>::min()});
  for (; it != segment_scores.end(); ++it) {
    const auto& [klp, ksys, seg] = it->first;
    if (klp != lp || ksys != system) break;
    out.emplace(seg, it->second);
  }
  return out;
}

std::vector<LanguagePair> HumanJudgments::language_pairs() const {
  std::set<LanguagePair> pairs;
  for (const auto& [key, value] : system_scores) pairs.insert(key.first);
  return {pairs.begin(), pairs.end()};
}

HumanJudgments HumanJudgments::restricted_to(const LanguagePair& lp) const {
  HumanJudgments out;
  for (const auto& [key, value] : system_scores) {
    if (key.first == lp) out.system_scores.emplace(key, value);
  }
  for (const auto& [key, value] : segment_scores) {
    if (std::get<0>(key) == lp) out.segment_scores.emplace(key, value);
  }
  return out;
}

void HumanJudgments::validate() const {
  for (const auto& [key, value] : segment_scores) {
    SystemKey sys{std::get<0>(key), std::get<1>(key)};
    if (!system_scores.contains(sys)) {
      throw Error(ErrorKind::Invariant,
                  "system '" + sys.second + "' (" + sys.first.str() +
                      ") has segment scores but no system score");
    }
  }
}

std::vector<int> EvalDataset::seg_ids() const {
  std::vector<int> ids;
  if (systems.empty()) return ids;
  for (const auto& seg : systems.front().segments) ids.push_back(seg.seg_id);
  return ids;
}

const SystemOutput& EvalDataset::system(const std::string& name) const {
  for (const auto& sys : systems) {
    if (sys.system_name == name) return sys;
  }
  throw Error(ErrorKind::MissingData, "no system '" + name + "' in dataset " +
                                          lang_pair.str());
}

// ---------------------------------------------------------------------------

std::string format_full(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<TokenScoredSegment> read_token_scores(std::istream& in,
                                                  const std::string& origin) {
  std::vector<TokenScoredSegment> out;
  std::set<int> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto at = where(origin, lineno);

    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Parse, at + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("seg") ||
        !record.contains("tokens") || !record.contains("logp") ||
        !record["seg"].is_number_integer() || !record["tokens"].is_array() ||
        !record["logp"].is_array()) {
      throw Error(ErrorKind::Parse,
                  at + ": expected {\"seg\": int, \"tokens\": [...], "
                       "\"logp\": [...]}");
    }

    TokenScoredSegment seg;
    seg.seg_id = record["seg"].get<int>();
    for (const auto& tok : record["tokens"]) {
      if (!tok.is_string()) {
        throw Error(ErrorKind::Parse, at + ": token is not a string");
      }
      seg.tokens.push_back(tok.get<std::string>());
    }
    const auto& logp = record["logp"];
    seg.logprobs.resize(static_cast<Eigen::Index>(logp.size()));
    for (std::size_t i = 0; i < logp.size(); ++i) {
      if (!logp[i].is_number()) {
        throw Error(ErrorKind::Parse, at + ": log-probability is not a number");
      }
      seg.logprobs[static_cast<Eigen::Index>(i)] = logp[i].get<double>();
    }
    try {
      seg.validate();
    } catch (const Error& e) {
      throw e.within(at);
    }
    if (!seen.insert(seg.seg_id).second) {
      throw Error(ErrorKind::Duplicate,
                  at + ": segment id " + std::to_string(seg.seg_id) +
                      " appears twice");
    }
    out.push_back(std::move(seg));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.seg_id < b.seg_id; });
  return out;
}

std::vector<TokenScoredSegment> load_token_scores(
    const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_token_scores(in, path.string());
}

void write_token_scores(std::ostream& out,
                        const std::vector<TokenScoredSegment>& segments) {
  for (const auto& seg : segments) {
    out << "{\"seg\":" << seg.seg_id
        << ",\"tokens\":" << nlohmann::json(seg.tokens).dump() << ",\"logp\":[";
    for (Eigen::Index i = 0; i < seg.logprobs.size(); ++i) {
      if (i) out << ',';
      const double v = seg.logprobs[i];
      // "-0" would read back as the integer 0 and lose the sign.
      out << (v == 0.0 && std::signbit(v) ? std::string("-0.0") : format_full(v));
    }
    out << "]}\n";
  }
}

void save_token_scores(const std::filesystem::path& path,
                       const std::vector<TokenScoredSegment>& segments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_token_scores(out, segments);
}

// ---------------------------------------------------------------------------

HumanJudgments read_human_scores(std::istream& in, const std::string& origin) {
  auto cols = read_header(in, origin);
  const auto lp_col = cols.at("lang_pair", origin);
  const auto sys_col = cols.at("system", origin);
  const auto score_col = cols.at("score", origin);
  const auto width = std::max({lp_col, sys_col, score_col}) + 1;

  HumanJudgments out;
  for_each_row(in, origin, width, [&](const auto& f, const std::string& at) {
    SystemKey key{parse_pair_at(f[lp_col], at), f[sys_col]};
    double score = parse_real(f[score_col], at);
    if (!out.system_scores.emplace(key, score).second) {
      throw Error(ErrorKind::Duplicate, at + ": second row for (" +
                                            key.first.str() + ", " +
                                            key.second + ")");
    }
  });
  return out;
}

void read_human_segment_scores(std::istream& in, const std::string& origin,
                               HumanJudgments& into) {
  auto cols = read_header(in, origin);
  const auto lp_col = cols.at("lang_pair", origin);
  const auto sys_col = cols.at("system", origin);
  const auto seg_col = cols.at("seg", origin);
  const auto score_col = cols.at("score", origin);
  const auto width = std::max({lp_col, sys_col, seg_col, score_col}) + 1;

  for_each_row(in, origin, width, [&](const auto& f, const std::string& at) {
    SegmentKey key{parse_pair_at(f[lp_col], at), f[sys_col],
                   parse_int(f[seg_col], at)};
    double score = parse_real(f[score_col], at);
    if (!into.segment_scores.emplace(key, score).second) {
      throw Error(ErrorKind::Duplicate,
                  at + ": second row for segment " +
                      std::to_string(std::get<2>(key)) + " of " +
                      std::get<1>(key));
    }
  });
}

HumanJudgments load_human_scores(
    const std::filesystem::path& system_path,
    const std::optional<std::filesystem::path>& segment_path) {
  auto in = open_input(system_path);
  auto human = read_human_scores(in, system_path.string());
  if (segment_path) {
    auto seg_in = open_input(*segment_path);
    read_human_segment_scores(seg_in, segment_path->string(), human);
    try {
      human.validate();
    } catch (const Error& e) {
      throw e.within(segment_path->string());
    }
  }
  return human;
}

std::map<SystemKey, double> load_system_table(
    const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_human_scores(in, path.string()).system_scores;
}

std::map<SegmentKey, double> load_segment_table(
    const std::filesystem::path& path) {
  auto in = open_input(path);
  HumanJudgments tmp;
  read_human_segment_scores(in, path.string(), tmp);
  return std::move(tmp.segment_scores);
}

// ---------------------------------------------------------------------------

std::vector<TextSegment> load_text_segments(
    const std::filesystem::path& path,
    const std::optional<std::filesystem::path>& ids_path) {
  auto in = open_input(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    lines.push_back(std::move(line));
  }

  std::vector<int> ids;
  if (ids_path) {
    auto id_in = open_input(*ids_path);
    std::size_t lineno = 0;
    while (std::getline(id_in, line)) {
      ++lineno;
      strip_cr(line);
      if (line.empty()) continue;
      ids.push_back(parse_int(line, where(ids_path->string(), lineno)));
    }
    if (ids.size() != lines.size()) {
      throw Error(ErrorKind::Alignment,
                  ids_path->string() + ": " + std::to_string(ids.size()) +
                      " ids for " + std::to_string(lines.size()) +
                      " lines in " + path.string());
    }
  } else {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      ids.push_back(static_cast<int>(i));
    }
  }

  std::vector<TextSegment> out;
  std::set<int> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!seen.insert(ids[i]).second) {
      throw Error(ErrorKind::Duplicate, path.string() + ": segment id " +
                                            std::to_string(ids[i]) +
                                            " appears twice");
    }
    out.push_back({ids[i], std::move(lines[i])});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.seg_id < b.seg_id; });
  return out;
}

SystemOutput make_system_output(std::string name, LanguagePair lp,
                                const std::vector<TextSegment>& sources,
                                const std::vector<TextSegment>& targets) {
  std::map<int, std::string> src;
  for (const auto& s : sources) src[s.seg_id] = s.text;
  SystemOutput out{std::move(name), std::move(lp), {}, std::nullopt};
  for (const auto& t : targets) {
    auto it = src.find(t.seg_id);
    out.segments.push_back(
        {t.seg_id, it == src.end() ? std::string{} : it->second, t.text});
  }
  return out;
}

EvalDataset assemble_dataset(std::vector<SystemOutput> outputs,
                             const HumanJudgments& human,
                             std::optional<std::vector<std::string>> references) {
  if (outputs.size() < 2) {
    throw Error(ErrorKind::InsufficientData,
                "a dataset needs at least 2 systems, got " +
                    std::to_string(outputs.size()));
  }
  const LanguagePair lp = outputs.front().lang_pair;
  for (const auto& o : outputs) {
    if (o.lang_pair != lp) {
      throw Error(ErrorKind::Alignment, "system '" + o.system_name +
                                            "' is " + o.lang_pair.str() +
                                            ", expected " + lp.str());
    }
  }

  std::sort(outputs.begin(), outputs.end(), [](const auto& a, const auto& b) {
    return a.system_name < b.system_name;
  });
  for (std::size_t i = 1; i < outputs.size(); ++i) {
    if (outputs[i].system_name == outputs[i - 1].system_name) {
      throw Error(ErrorKind::Duplicate,
                  "system '" + outputs[i].system_name + "' given twice");
    }
  }

  std::set<int> all_ids;
  std::vector<std::set<int>> ids(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    auto& o = outputs[i];
    std::sort(o.segments.begin(), o.segments.end(),
              [](const auto& a, const auto& b) { return a.seg_id < b.seg_id; });
    for (const auto& s : o.segments) ids[i].insert(s.seg_id);
    if (ids[i].size() != o.segments.size()) {
      throw Error(ErrorKind::Duplicate,
                  "system '" + o.system_name + "' repeats a segment id");
    }
    all_ids.insert(ids[i].begin(), ids[i].end());
  }

  std::string misaligned;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    bool bad = ids[i] != all_ids;
    if (outputs[i].token_scores) {
      std::set<int> tok_ids;
      for (const auto& t : *outputs[i].token_scores) tok_ids.insert(t.seg_id);
      bad = bad || tok_ids != ids[i];
    }
    if (bad) {
      if (!misaligned.empty()) misaligned += ", ";
      misaligned += outputs[i].system_name;
    }
  }
  if (!misaligned.empty()) {
    throw Error(ErrorKind::Alignment,
                lp.str() + ": segment ids differ for systems: " + misaligned);
  }

  std::string missing;
  for (const auto& o : outputs) {
    if (!human.system_scores.contains({lp, o.system_name})) {
      if (!missing.empty()) missing += ", ";
      missing += o.system_name;
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::MissingJudgment,
                lp.str() + ": no human system score for: " + missing);
  }

  if (references && references->size() != all_ids.size()) {
    throw Error(ErrorKind::Alignment,
                lp.str() + ": " + std::to_string(references->size()) +
                    " references for " + std::to_string(all_ids.size()) +
                    " segments");
  }

  EvalDataset ds;
  ds.lang_pair = lp;
  ds.systems = std::move(outputs);
  ds.references = std::move(references);
  ds.human = human.restricted_to(lp);
  return ds;
}

}  // namespace mtpeer
