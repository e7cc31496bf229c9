#include "mtpeer/subword.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "mtpeer/core_data.hpp"
#include "mtpeer/error.hpp"

namespace mtpeer {

namespace {

// Log-probability given to pieces that received no Viterbi count. Far below
// any estimated piece so that it only matters for coverage.
constexpr double kUnusedLogprob = -50.0;

int utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

// Byte offsets of code point boundaries, including 0 and text.size().
std::vector<std::size_t> char_offsets(std::string_view text) {
  std::vector<std::size_t> off{0};
  std::size_t i = 0;
  while (i < text.size()) {
    auto len = static_cast<std::size_t>(
        utf8_length(static_cast<unsigned char>(text[i])));
    i = std::min(text.size(), i + len);
    off.push_back(i);
  }
  return off;
}

struct Hyp {
  double score;
  int start;      // code point index where the last piece begins
  int prev_rank;  // rank within the hypothesis list at `start`
};

bool better(const Hyp& a, const Hyp& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.start != b.start) return a.start < b.start;
  return a.prev_rank < b.prev_rank;
}

void check_coverage(const UnigramSubwordModel& model, std::string_view text,
                    const std::vector<std::size_t>& off) {
  for (std::size_t i = 0; i + 1 < off.size(); ++i) {
    auto ch = text.substr(off[i], off[i + 1] - off[i]);
    if (!model.contains(ch)) {
      throw Error(ErrorKind::Coverage,
                  "character '" + std::string(ch) + "' at position " +
                      std::to_string(i) + " is not in the subword vocabulary");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

UnigramSubwordModel::UnigramSubwordModel(
    std::unordered_map<std::string, double> vocab)
    : vocab_(std::move(vocab)) {
  double mass = 0.0;
  for (const auto& [piece, lp] : vocab_) {
    if (piece.empty()) {
      throw Error(ErrorKind::Domain, "empty piece in subword vocabulary");
    }
    if (!(lp <= 0.0) || std::isnan(lp)) {
      throw Error(ErrorKind::Domain,
                  "piece '" + piece + "' has log-probability " + format_full(lp));
    }
    mass += std::exp(lp);
    max_len_ = std::max(max_len_, static_cast<int>(char_offsets(piece).size()) - 1);
  }
  if (mass > 1.0 + 1e-6) {
    throw Error(ErrorKind::Domain, "subword probabilities sum to " +
                                       format_full(mass) + " > 1");
  }
}

bool UnigramSubwordModel::contains(std::string_view piece) const {
  return vocab_.find(std::string(piece)) != vocab_.end();
}

double UnigramSubwordModel::logprob(std::string_view piece) const {
  auto it = vocab_.find(std::string(piece));
  if (it == vocab_.end()) {
    throw Error(ErrorKind::Coverage,
                "piece '" + std::string(piece) + "' is not in the vocabulary");
  }
  return it->second;
}

void UnigramSubwordModel::write(std::ostream& out) const {
  std::map<std::string, double> sorted(vocab_.begin(), vocab_.end());
  for (const auto& [piece, lp] : sorted) {
    if (piece.find_first_of("\t\n") != std::string::npos) {
      throw Error(ErrorKind::Io, "piece contains a tab or newline");
    }
    out << piece << '\t' << format_full(lp) << '\n';
  }
}

UnigramSubwordModel UnigramSubwordModel::read(std::istream& in,
                                              const std::string& origin) {
  std::unordered_map<std::string, double> vocab;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.rfind('\t');
    const auto at = origin + ":" + std::to_string(lineno);
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorKind::Parse, at + ": expected piece<TAB>logprob");
    }
    double lp = 0.0;
    try {
      std::size_t used = 0;
      lp = std::stod(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse, at + ": bad log-probability");
    }
    if (!vocab.emplace(line.substr(0, tab), lp).second) {
      throw Error(ErrorKind::Duplicate, at + ": piece listed twice");
    }
  }
  return UnigramSubwordModel(std::move(vocab));
}

void UnigramSubwordModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write(out);
}

UnigramSubwordModel UnigramSubwordModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read(in, path.string());
}

std::vector<std::string> utf8_chars(std::string_view text) {
  auto off = char_offsets(text);
  std::vector<std::string> out;
  out.reserve(off.size() - 1);
  for (std::size_t i = 0; i + 1 < off.size(); ++i) {
    out.emplace_back(text.substr(off[i], off[i + 1] - off[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Segmentation> nbest_segmentations(const UnigramSubwordModel& model,
                                              std::string_view text, int n) {
  if (n < 1) throw Error(ErrorKind::Configuration, "n-best size must be >= 1");
  if (text.empty()) throw Error(ErrorKind::Domain, "cannot segment empty text");
  const auto off = char_offsets(text);
  check_coverage(model, text, off);

  const int len = static_cast<int>(off.size()) - 1;
  const int max_piece = std::max(1, model.max_piece_length());
  std::vector<std::vector<Hyp>> lists(static_cast<std::size_t>(len) + 1);
  lists[0].push_back({0.0, -1, -1});

  std::vector<Hyp> candidates;
  for (int end = 1; end <= len; ++end) {
    candidates.clear();
    for (int start = std::max(0, end - max_piece); start < end; ++start) {
      const auto& prev = lists[static_cast<std::size_t>(start)];
      if (prev.empty()) continue;
      auto it = model.vocab().find(
          std::string(text.substr(off[start], off[end] - off[start])));
      if (it == model.vocab().end()) continue;
      for (int k = 0; k < static_cast<int>(prev.size()); ++k) {
        candidates.push_back(
            {prev[static_cast<std::size_t>(k)].score + it->second, start, k});
      }
    }
    const auto keep = std::min<std::size_t>(candidates.size(),
                                            static_cast<std::size_t>(n));
    std::partial_sort(candidates.begin(), candidates.begin() + keep,
                      candidates.end(), better);
    lists[static_cast<std::size_t>(end)].assign(candidates.begin(),
                                                candidates.begin() + keep);
  }

  std::vector<Segmentation> out;
  for (int k = 0; k < static_cast<int>(lists[len].size()); ++k) {
    Segmentation seg;
    seg.score = lists[len][static_cast<std::size_t>(k)].score;
    int end = len;
    int rank = k;
    while (end > 0) {
      const auto& h = lists[static_cast<std::size_t>(end)][static_cast<std::size_t>(rank)];
      seg.pieces.emplace_back(text.substr(off[h.start], off[end] - off[h.start]));
      end = h.start;
      rank = h.prev_rank;
    }
    std::reverse(seg.pieces.begin(), seg.pieces.end());
    out.push_back(std::move(seg));
  }
  return out;
}

Segmentation best_segmentation(const UnigramSubwordModel& model,
                               std::string_view text) {
  return nbest_segmentations(model, text, 1).front();
}

std::size_t sample_index(const std::vector<double>& scores, double alpha,
                         std::uint64_t seed) {
  if (scores.empty()) throw Error(ErrorKind::Empty, "sampling from no items");
  if (!(alpha >= 0.0)) throw Error(ErrorKind::Configuration, "alpha must be >= 0");
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> cumulative;
  double total = 0.0;
  for (double s : scores) {
    total += alpha == 0.0 ? 1.0 : std::exp(alpha * (s - top));
    cumulative.push_back(total);
  }
  std::mt19937_64 rng(seed);
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                               scores.size() - 1);
}

Segmentation sample_segmentation(const UnigramSubwordModel& model,
                                 std::string_view text, int n, double alpha,
                                 std::uint64_t seed) {
  auto list = nbest_segmentations(model, text, n);
  std::vector<double> scores;
  for (const auto& s : list) scores.push_back(s.score);
  return list[sample_index(scores, alpha, seed)];
}

// ---------------------------------------------------------------------------

namespace {

using Counts = std::unordered_map<std::string, double>;

// Viterbi-segments every sentence, returning the corpus log-likelihood and
// accumulating piece counts.
double viterbi_counts(const UnigramSubwordModel& model,
                      const std::vector<std::string>& corpus, Counts* counts) {
  double ll = 0.0;
  for (const auto& sentence : corpus) {
    if (sentence.empty()) continue;
    auto best = best_segmentation(model, sentence);
    ll += best.score;
    if (counts) {
      for (auto& p : best.pieces) (*counts)[p] += 1.0;
    }
  }
  return ll;
}

std::unordered_map<std::string, double> reestimate(
    const std::unordered_map<std::string, double>& vocab, const Counts& counts) {
  double total = 0.0;
  for (const auto& [p, c] : counts) total += c;
  std::unordered_map<std::string, double> next;
  for (const auto& [piece, lp] : vocab) {
    auto it = counts.find(piece);
    next[piece] = it != counts.end() && it->second > 0.0
                      ? std::log(it->second / total)
                      : kUnusedLogprob;
  }
  return next;
}

bool is_single_char(const std::string& piece) {
  return char_offsets(piece).size() == 2;
}

}  // namespace

double corpus_log_likelihood(const UnigramSubwordModel& model,
                             const std::vector<std::string>& corpus) {
  return viterbi_counts(model, corpus, nullptr);
}

UnigramSubwordModel train_unigram(const std::vector<std::string>& corpus,
                                  int vocab_size, int rounds,
                                  const UnigramTrainerOptions& options,
                                  std::vector<TrainingStep>* trace) {
  if (corpus.empty()) {
    throw Error(ErrorKind::Configuration, "training corpus is empty");
  }
  if (rounds < 0) throw Error(ErrorKind::Configuration, "rounds must be >= 0");

  // Seed: every character plus frequent substrings without inner spaces.
  std::unordered_map<std::string, double> freq;
  std::set<std::string> alphabet;
  for (const auto& sentence : corpus) {
    auto chars = utf8_chars(sentence);
    for (std::size_t i = 0; i < chars.size(); ++i) {
      alphabet.insert(chars[i]);
      std::string piece;
      for (std::size_t j = i;
           j < chars.size() &&
           j - i < static_cast<std::size_t>(options.max_piece_length);
           ++j) {
        if (j > i && (chars[j] == " " || chars[i] == " ")) break;
        piece += chars[j];
        freq[piece] += 1.0;
      }
    }
  }
  if (vocab_size < static_cast<int>(alphabet.size())) {
    throw Error(ErrorKind::Configuration,
                "vocab_size " + std::to_string(vocab_size) +
                    " is below the alphabet size " +
                    std::to_string(alphabet.size()));
  }

  std::unordered_map<std::string, double> vocab;
  double total = 0.0;
  for (const auto& [piece, f] : freq) {
    if (alphabet.contains(piece) || f >= options.min_frequency) {
      vocab[piece] = f;
      total += f;
    }
  }
  for (auto& [piece, f] : vocab) f = std::log(f / total);

  UnigramSubwordModel model(vocab);
  auto record = [&](int round, bool pruned, double ll) {
    if (trace) trace->push_back({round, model.size(), pruned, ll});
  };

  Counts counts;
  auto em_step = [&](int round) {
    counts.clear();
    viterbi_counts(model, corpus, &counts);
    model = UnigramSubwordModel(reestimate(model.vocab(), counts));
    counts.clear();
    record(round, false, viterbi_counts(model, corpus, &counts));
  };

  auto prune_to = [&](std::size_t target) {
    if (model.size() <= target) return false;
    // Utility: likelihood lost if the piece had to be re-segmented.
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [piece, lp] : model.vocab()) {
      if (is_single_char(piece)) continue;
      auto it = counts.find(piece);
      const double c = it == counts.end() ? 0.0 : it->second;
      double utility = 0.0;
      if (c > 0.0) {
        for (const auto& alt : nbest_segmentations(model, piece, 2)) {
          if (alt.pieces.size() > 1) {
            utility = c * (lp - alt.score);
            break;
          }
        }
      }
      ranked.emplace_back(utility, piece);
    }
    std::sort(ranked.begin(), ranked.end());
    auto next = model.vocab();
    for (const auto& [utility, piece] : ranked) {
      if (next.size() <= target) break;
      next.erase(piece);
    }
    model = UnigramSubwordModel(std::move(next));
    return true;
  };

  counts.clear();
  record(0, false, viterbi_counts(model, corpus, &counts));
  const auto target = static_cast<std::size_t>(vocab_size);
  for (int round = 1; round <= rounds; ++round) {
    for (int s = 0; s < options.em_steps_per_round; ++s) em_step(round);
    const auto shrunk = static_cast<std::size_t>(
        static_cast<double>(model.size()) * options.shrink_factor);
    if (prune_to(std::max(target, shrunk))) {
      counts.clear();
      record(round, true, viterbi_counts(model, corpus, &counts));
    }
  }
  if (prune_to(target)) {
    counts.clear();
    record(rounds + 1, true, viterbi_counts(model, corpus, &counts));
    em_step(rounds + 1);
  }
  return model;
}

}  // namespace mtpeer
