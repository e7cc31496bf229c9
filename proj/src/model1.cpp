#include "mtpeer/model1.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mtpeer/error.hpp"

namespace mtpeer {

double LexicalTable::prob(const std::string& target,
                          const std::string& source) const {
  auto it = t_.find(source);
  if (it == t_.end()) return 0.0;
  auto jt = it->second.find(target);
  return jt == it->second.end() ? 0.0 : jt->second;
}

void LexicalTable::set(const std::string& target, const std::string& source,
                       double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::Domain, "translation probability outside [0, 1]");
  }
  t_[source][target] = p;
}

const std::unordered_map<std::string, double>& LexicalTable::row(
    const std::string& source) const {
  static const std::unordered_map<std::string, double> empty;
  auto it = t_.find(source);
  return it == t_.end() ? empty : it->second;
}

std::vector<std::string> LexicalTable::sources() const {
  std::vector<std::string> out;
  for (const auto& [s, row] : t_) out.push_back(s);
  std::sort(out.begin(), out.end());
  return out;
}

void LexicalTable::write(std::ostream& out) const {
  std::map<std::pair<std::string, std::string>, double> sorted;
  for (const auto& [s, row] : t_) {
    for (const auto& [y, p] : row) sorted[{y, s}] = p;
  }
  for (const auto& [key, p] : sorted) {
    out << key.first << '\t' << key.second << '\t' << format_full(p) << '\n';
  }
}

LexicalTable LexicalTable::read(std::istream& in, const std::string& origin) {
  LexicalTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto at = origin + ":" + std::to_string(lineno);
    auto a = line.find('\t');
    auto b = a == std::string::npos ? a : line.find('\t', a + 1);
    if (b == std::string::npos) {
      throw Error(ErrorKind::Parse, at + ": expected target<TAB>source<TAB>prob");
    }
    double p = 0.0;
    try {
      std::size_t used = 0;
      p = std::stod(line.substr(b + 1), &used);
      if (used != line.size() - b - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse, at + ": bad probability");
    }
    try {
      table.set(line.substr(0, a), line.substr(a + 1, b - a - 1), p);
    } catch (const Error& e) {
      throw e.within(at);
    }
  }
  return table;
}

void LexicalTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write(out);
}

LexicalTable LexicalTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read(in, path.string());
}

// ---------------------------------------------------------------------------

namespace {

struct Vocabulary {
  std::unordered_map<std::string, int> ids;
  std::vector<std::string> words;

  int id(const std::string& w) {
    auto [it, inserted] = ids.emplace(w, static_cast<int>(words.size()));
    if (inserted) words.push_back(w);
    return it->second;
  }
};

struct EncodedPair {
  std::vector<int> source;  // position 0 is NULL
  std::vector<int> target;
};

}  // namespace

Model1Training train_model1(const std::vector<SentencePair>& corpus,
                            int iterations) {
  if (iterations < 1) {
    throw Error(ErrorKind::Configuration, "iterations must be >= 1");
  }
  Model1Training result;
  Vocabulary src_vocab;
  Vocabulary tgt_vocab;
  src_vocab.id(kNullToken);

  std::vector<EncodedPair> pairs;
  for (const auto& p : corpus) {
    if (p.source.empty() || p.target.empty()) {
      ++result.skipped_pairs;
      continue;
    }
    EncodedPair e;
    e.source.push_back(0);
    for (const auto& w : p.source) e.source.push_back(src_vocab.id(w));
    for (const auto& w : p.target) e.target.push_back(tgt_vocab.id(w));
    pairs.push_back(std::move(e));
  }
  if (result.skipped_pairs > 0) {
    warn("Model 1 training skipped " + std::to_string(result.skipped_pairs) +
         " sentence pairs with an empty side");
  }
  if (pairs.empty()) {
    throw Error(ErrorKind::Configuration, "no usable sentence pairs");
  }

  // Uniform initialisation over co-occurring pairs.
  const double uniform = 1.0 / static_cast<double>(tgt_vocab.words.size());
  std::vector<std::unordered_map<int, double>> t(src_vocab.words.size());
  for (const auto& p : pairs) {
    for (int s : p.source) {
      for (int y : p.target) t[static_cast<std::size_t>(s)].emplace(y, uniform);
    }
  }

  auto e_step = [&](std::vector<std::unordered_map<int, double>>* counts) {
    double ll = 0.0;
    for (const auto& p : pairs) {
      const double norm = static_cast<double>(p.source.size());
      for (int y : p.target) {
        double denom = 0.0;
        for (int s : p.source) denom += t[static_cast<std::size_t>(s)].at(y);
        ll += std::log(denom / norm);
        if (counts) {
          for (int s : p.source) {
            (*counts)[static_cast<std::size_t>(s)][y] +=
                t[static_cast<std::size_t>(s)].at(y) / denom;
          }
        }
      }
    }
    return ll;
  };

  std::vector<std::unordered_map<int, double>> counts(t.size());
  for (int it = 0; it < iterations; ++it) {
    for (auto& row : counts) {
      for (auto& [y, c] : row) c = 0.0;
    }
    result.log_likelihood.push_back(e_step(&counts));
    for (std::size_t s = 0; s < t.size(); ++s) {
      double total = 0.0;
      for (const auto& [y, c] : counts[s]) total += c;
      if (total <= 0.0) continue;
      for (auto& [y, p] : t[s]) {
        auto jt = counts[s].find(y);
        p = jt == counts[s].end() ? 0.0 : jt->second / total;
      }
    }
  }
  result.log_likelihood.push_back(e_step(nullptr));

  for (std::size_t s = 0; s < t.size(); ++s) {
    for (const auto& [y, p] : t[s]) {
      result.table.set(tgt_vocab.words[static_cast<std::size_t>(y)],
                       src_vocab.words[s], p);
    }
  }
  return result;
}

TokenScoredSegment score_tokens(const LexicalTable& table,
                                const std::vector<std::string>& source,
                                const std::vector<std::string>& target,
                                int seg_id) {
  if (target.empty()) {
    throw Error(ErrorKind::EmptySegment,
                "segment " + std::to_string(seg_id) + " has an empty target");
  }
  const double norm = static_cast<double>(source.size() + 1);
  TokenScoredSegment seg;
  seg.seg_id = seg_id;
  seg.tokens = target;
  seg.logprobs.resize(static_cast<Eigen::Index>(target.size()));
  std::vector<double> terms;
  for (std::size_t j = 0; j < target.size(); ++j) {
    // Summed in sorted order so the result does not depend on word order.
    terms.clear();
    for (const auto& s : source) terms.push_back(table.prob(target[j], s));
    std::sort(terms.begin(), terms.end());
    double total = table.prob(target[j], kNullToken);
    for (double v : terms) total += v;
    const double p = std::min(1.0, total / norm);
    seg.logprobs[static_cast<Eigen::Index>(j)] =
        std::log(std::max(p, kProbabilityFloor));
  }
  return seg;
}

std::vector<std::string> split_whitespace(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace mtpeer
