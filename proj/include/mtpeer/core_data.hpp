#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace mtpeer {

/// Source/target language codes, normalized to lowercase. Parsed from and
/// printed as "src-tgt".
class LanguagePair {
 public:
  LanguagePair() = default;
  LanguagePair(std::string source, std::string target);

  static LanguagePair parse(std::string_view text);

  const std::string& source() const { return source_; }
  const std::string& target() const { return target_; }
  std::string str() const { return source_ + "-" + target_; }

  auto operator<=>(const LanguagePair&) const = default;

 private:
  std::string source_;
  std::string target_;
};

/// Report grouping used in summary tables.
enum class PairGroup { EnXx, XxEn, XxYy };

PairGroup group_of(const LanguagePair& lp);
std::string_view to_string(PairGroup group);

struct SegmentPair {
  int seg_id = 0;
  std::string source_text;
  std::string target_text;
};

/// One segment's tokens and their natural-log probabilities.
struct TokenScoredSegment {
  int seg_id = 0;
  std::vector<std::string> tokens;
  Eigen::VectorXd logprobs;

  Eigen::Index length() const { return logprobs.size(); }

  // Throws Structural/Domain errors when the invariants do not hold.
  void validate() const;
};

struct SystemOutput {
  std::string system_name;
  LanguagePair lang_pair;
  std::vector<SegmentPair> segments;
  std::optional<std::vector<TokenScoredSegment>> token_scores;
};

using SystemKey = std::pair<LanguagePair, std::string>;
using SegmentKey = std::tuple<LanguagePair, std::string, int>;

struct HumanJudgments {
  std::map<SystemKey, double> system_scores;
  std::map<SegmentKey, double> segment_scores;

  /// Scores for one language pair keyed by system name.
  std::map<std::string, double> systems_for(const LanguagePair& lp) const;
  /// Segment scores of one system keyed by seg_id.
  std::map<int, double> segments_for(const LanguagePair& lp,
                                     const std::string& system) const;
  std::vector<LanguagePair> language_pairs() const;

  HumanJudgments restricted_to(const LanguagePair& lp) const;
  void validate() const;
};

struct EvalDataset {
  LanguagePair lang_pair;
  std::vector<SystemOutput> systems;  // sorted by system_name
  std::optional<std::vector<std::string>> references;
  HumanJudgments human;

  std::vector<int> seg_ids() const;
  const SystemOutput& system(const std::string& name) const;
};

// ---------------------------------------------------------------------------
// Token scores (JSON lines).

std::vector<TokenScoredSegment> read_token_scores(std::istream& in,
                                                  const std::string& origin);
std::vector<TokenScoredSegment> load_token_scores(
    const std::filesystem::path& path);

void write_token_scores(std::ostream& out,
                        const std::vector<TokenScoredSegment>& segments);
void save_token_scores(const std::filesystem::path& path,
                       const std::vector<TokenScoredSegment>& segments);

// ---------------------------------------------------------------------------
// Human judgments (TSV).

HumanJudgments read_human_scores(std::istream& system_level,
                                 const std::string& origin);
void read_human_segment_scores(std::istream& in, const std::string& origin,
                               HumanJudgments& into);

/// Loads system-level scores and, when given, the segment-level table.
HumanJudgments load_human_scores(
    const std::filesystem::path& system_path,
    const std::optional<std::filesystem::path>& segment_path = std::nullopt);

/// Header-driven reader for (lang_pair, system, score) tables. Column order is
/// free and extra columns are ignored, so the output of `score` and `bleu`
/// can be fed back directly.
std::map<SystemKey, double> load_system_table(const std::filesystem::path& path);

/// Reader for (lang_pair, system, seg, score) tables.
std::map<SegmentKey, double> load_segment_table(
    const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Plain-text segments.

struct TextSegment {
  int seg_id;
  std::string text;
};

/// One segment per line; ids come from the sidecar file (one integer per
/// line) or from 0-based line numbers.
std::vector<TextSegment> load_text_segments(
    const std::filesystem::path& path,
    const std::optional<std::filesystem::path>& ids_path = std::nullopt);

SystemOutput make_system_output(std::string name, LanguagePair lp,
                                const std::vector<TextSegment>& sources,
                                const std::vector<TextSegment>& targets);

EvalDataset assemble_dataset(
    std::vector<SystemOutput> outputs, const HumanJudgments& human,
    std::optional<std::vector<std::string>> references = std::nullopt);

/// Round-trip decimal text for a double (17 significant digits).
std::string format_full(double value);

}  // namespace mtpeer
