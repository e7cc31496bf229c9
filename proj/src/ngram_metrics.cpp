#include "mtpeer/ngram_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <unordered_map>

#include <unicode/regex.h>
#include <unicode/unistr.h>

#include "mtpeer/error.hpp"
#include "mtpeer/subword.hpp"

namespace mtpeer {

namespace {

// The three international-tokenizer rewrites, applied in order.
class IntlRules {
 public:
  IntlRules() {
    add(R"((\P{N})(\p{P}))", "$1 $2 ");
    add(R"((\p{P})(\P{N}))", " $1 $2");
    add(R"((\p{S}))", " $1 ");
  }

  std::string apply(std::string_view text) const {
    auto s = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    for (const auto& [pattern, replacement] : rules_) {
      UErrorCode status = U_ZERO_ERROR;
      std::unique_ptr<icu::RegexMatcher> m(pattern->matcher(s, status));
      s = m->replaceAll(replacement, status);
      if (U_FAILURE(status)) {
        throw Error(ErrorKind::Parse, "tokenizer failed on input");
      }
    }
    std::string out;
    s.toUTF8String(out);
    return out;
  }

 private:
  void add(const char* pattern, const char* replacement) {
    UErrorCode status = U_ZERO_ERROR;
    UParseError pe;
    std::unique_ptr<icu::RegexPattern> p(icu::RegexPattern::compile(
        icu::UnicodeString::fromUTF8(pattern), 0, pe, status));
    if (U_FAILURE(status)) throw Error(ErrorKind::Configuration, "bad regex");
    rules_.emplace_back(std::move(p), icu::UnicodeString::fromUTF8(replacement));
  }

  std::vector<std::pair<std::unique_ptr<icu::RegexPattern>, icu::UnicodeString>>
      rules_;
};

const IntlRules& intl_rules() {
  static const IntlRules rules;
  return rules;
}

char32_t decode(const std::string& ch) {
  const auto* b = reinterpret_cast<const unsigned char*>(ch.data());
  switch (ch.size()) {
    case 1: return b[0];
    case 2: return ((b[0] & 0x1Fu) << 6) | (b[1] & 0x3Fu);
    case 3: return ((b[0] & 0x0Fu) << 12) | ((b[1] & 0x3Fu) << 6) | (b[2] & 0x3Fu);
    case 4:
      return ((b[0] & 0x07u) << 18) | ((b[1] & 0x3Fu) << 12) |
             ((b[2] & 0x3Fu) << 6) | (b[3] & 0x3Fu);
    default: return 0;
  }
}

bool is_cjk(char32_t c) {
  return (c >= 0x3400 && c <= 0x4DBF) || (c >= 0x4E00 && c <= 0x9FFF) ||
         (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x3000 && c <= 0x303F) ||
         (c >= 0xFF00 && c <= 0xFFEF) || (c >= 0x20000 && c <= 0x2FA1F);
}

std::vector<std::string> split_spaces(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

using NgramCounts = std::unordered_map<std::string, double>;

NgramCounts count_ngrams(const std::vector<std::string>& units, int n) {
  NgramCounts counts;
  if (static_cast<int>(units.size()) < n) return counts;
  std::string key;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= units.size(); ++i) {
    key.clear();
    for (int k = 0; k < n; ++k) {
      if (k) key += '\x01';
      key += units[i + static_cast<std::size_t>(k)];
    }
    counts[key] += 1.0;
  }
  return counts;
}

double clipped_matches(const NgramCounts& hyp, const NgramCounts& ref) {
  double m = 0.0;
  for (const auto& [g, c] : hyp) {
    auto it = ref.find(g);
    if (it != ref.end()) m += std::min(c, it->second);
  }
  return m;
}

void check_corpus(const std::vector<std::string>& hyps,
                  const std::vector<std::string>& refs) {
  if (hyps.size() != refs.size()) {
    throw Error(ErrorKind::Alignment,
                std::to_string(hyps.size()) + " hypotheses for " +
                    std::to_string(refs.size()) + " references");
  }
  if (refs.empty()) {
    throw Error(ErrorKind::Domain, "empty reference corpus");
  }
}

}  // namespace

BleuTokenizer parse_tokenizer(std::string_view name) {
  if (name == "intl") return BleuTokenizer::Intl;
  if (name == "none" || name == "whitespace") return BleuTokenizer::Whitespace;
  if (name == "zh") return BleuTokenizer::Zh;
  throw Error(ErrorKind::Configuration,
              "unknown tokenizer '" + std::string(name) + "'");
}

std::vector<std::string> bleu_tokenize(std::string_view text,
                                       BleuTokenizer tokenizer) {
  switch (tokenizer) {
    case BleuTokenizer::Whitespace:
      return split_spaces(std::string(text));
    case BleuTokenizer::Intl:
      return split_spaces(intl_rules().apply(text));
    case BleuTokenizer::Zh: {
      std::string spaced;
      for (const auto& ch : utf8_chars(text)) {
        if (is_cjk(decode(ch))) {
          spaced += ' ';
          spaced += ch;
          spaced += ' ';
        } else {
          spaced += ch;
        }
      }
      return split_spaces(intl_rules().apply(spaced));
    }
  }
  return {};
}

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (std::size_t n = 0; n < matches.size() && n < o.matches.size(); ++n) {
    matches[n] += o.matches[n];
    totals[n] += o.totals[n];
  }
  hyp_length += o.hyp_length;
  ref_length += o.ref_length;
  return *this;
}

BleuStats bleu_segment_stats(const std::vector<std::string>& hyp,
                             const std::vector<std::string>& ref,
                             int max_order) {
  BleuStats s(max_order);
  s.hyp_length = static_cast<double>(hyp.size());
  s.ref_length = static_cast<double>(ref.size());
  for (int n = 1; n <= max_order; ++n) {
    const auto h = count_ngrams(hyp, n);
    const auto r = count_ngrams(ref, n);
    s.matches[static_cast<std::size_t>(n - 1)] = clipped_matches(h, r);
    s.totals[static_cast<std::size_t>(n - 1)] = static_cast<double>(
        std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(hyp.size()) - n + 1));
  }
  return s;
}

double bleu_from_stats(const BleuStats& stats, const BleuConfig& cfg) {
  if (stats.ref_length <= 0.0) {
    throw Error(ErrorKind::Domain, "reference corpus has no tokens");
  }
  if (stats.hyp_length <= 0.0) return 0.0;

  double log_sum = 0.0;
  int orders = 0;
  double smooth = 1.0;
  for (std::size_t n = 0; n < stats.totals.size(); ++n) {
    const double total = stats.totals[n];
    if (total <= 0.0) continue;
    double p = stats.matches[n] / total;
    if (stats.matches[n] <= 0.0) {
      if (cfg.smoothing == BleuSmoothing::None) return 0.0;
      smooth *= 2.0;
      p = 1.0 / (smooth * total);
    }
    log_sum += std::log(p);
    ++orders;
  }
  if (orders == 0) return 0.0;

  const double bp = stats.hyp_length < stats.ref_length
                        ? std::exp(1.0 - stats.ref_length / stats.hyp_length)
                        : 1.0;
  return std::clamp(100.0 * bp * std::exp(log_sum / orders), 0.0, 100.0);
}

double bleu(const std::vector<std::string>& hypotheses,
            const std::vector<std::string>& references, const BleuConfig& cfg) {
  if (cfg.max_order < 1) {
    throw Error(ErrorKind::Configuration, "BLEU max_order must be >= 1");
  }
  check_corpus(hypotheses, references);
  BleuStats total(cfg.max_order);
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    total += bleu_segment_stats(bleu_tokenize(hypotheses[i], cfg.tokenizer),
                                bleu_tokenize(references[i], cfg.tokenizer),
                                cfg.max_order);
  }
  return bleu_from_stats(total, cfg);
}

double chrf(const std::vector<std::string>& hypotheses,
            const std::vector<std::string>& references, const ChrfConfig& cfg) {
  if (cfg.char_order < 1 || !(cfg.beta > 0.0)) {
    throw Error(ErrorKind::Configuration, "chrF needs order >= 1 and beta > 0");
  }
  check_corpus(hypotheses, references);

  const auto orders = static_cast<std::size_t>(cfg.char_order);
  std::vector<double> hyp_count(orders, 0.0), ref_count(orders, 0.0),
      match(orders, 0.0);
  auto strip = [](const std::string& s) {
    std::vector<std::string> chars;
    for (auto& c : utf8_chars(s)) {
      if (c.size() == 1 && std::isspace(static_cast<unsigned char>(c[0]))) continue;
      chars.push_back(std::move(c));
    }
    return chars;
  };
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto h = strip(hypotheses[i]);
    const auto r = strip(references[i]);
    for (std::size_t n = 1; n <= orders; ++n) {
      const auto hc = count_ngrams(h, static_cast<int>(n));
      const auto rc = count_ngrams(r, static_cast<int>(n));
      for (const auto& [g, c] : hc) hyp_count[n - 1] += c;
      for (const auto& [g, c] : rc) ref_count[n - 1] += c;
      match[n - 1] += clipped_matches(hc, rc);
    }
  }

  if (ref_count[0] <= 0.0) {
    throw Error(ErrorKind::Domain, "reference corpus has no characters");
  }
  // Precision and recall are averaged over the orders both sides have, then
  // combined into one F-beta.
  double avg_p = 0.0;
  double avg_r = 0.0;
  int effective = 0;
  for (std::size_t n = 0; n < orders; ++n) {
    if (hyp_count[n] <= 0.0 || ref_count[n] <= 0.0) continue;
    ++effective;
    avg_p += match[n] / hyp_count[n];
    avg_r += match[n] / ref_count[n];
  }
  if (effective == 0) return 0.0;
  avg_p /= effective;
  avg_r /= effective;
  const double b2 = cfg.beta * cfg.beta;
  const double denom = b2 * avg_p + avg_r;
  if (denom <= 0.0) return 0.0;
  return std::clamp(100.0 * (1.0 + b2) * avg_p * avg_r / denom, 0.0, 100.0);
}

double cross_bleu(const std::vector<std::string>& output_a,
                  const std::vector<std::string>& output_b,
                  const BleuConfig& cfg) {
  return bleu(output_a, output_b, cfg);
}

CrossBleuMatrix cross_bleu_matrix(
    const std::vector<std::string>& systems,
    const std::vector<std::vector<std::string>>& outputs, const BleuConfig& cfg) {
  if (systems.size() != outputs.size() || systems.size() < 2) {
    throw Error(ErrorKind::Configuration,
                "cross-BLEU matrix needs at least 2 named systems");
  }
  const auto s = static_cast<Eigen::Index>(systems.size());

  // Tokenize each output once.
  std::vector<std::vector<std::vector<std::string>>> tokens(systems.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].size() != outputs.front().size()) {
      throw Error(ErrorKind::Alignment, "system '" + systems[i] +
                                            "' has a different segment count");
    }
    for (const auto& line : outputs[i]) {
      tokens[i].push_back(bleu_tokenize(line, cfg.tokenizer));
    }
  }

  CrossBleuMatrix m{systems, Eigen::MatrixXd::Zero(s, s), Eigen::VectorXd::Zero(s)};
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = 0; j < s; ++j) {
      BleuStats total(cfg.max_order);
      const auto& hi = tokens[static_cast<std::size_t>(i)];
      const auto& rj = tokens[static_cast<std::size_t>(j)];
      for (std::size_t k = 0; k < hi.size(); ++k) {
        total += bleu_segment_stats(hi[k], rj[k], cfg.max_order);
      }
      m.scores(i, j) = bleu_from_stats(total, cfg);
    }
    double acc = 0.0;
    for (Eigen::Index j = 0; j < s; ++j) {
      if (j != i) acc += m.scores(i, j);
    }
    m.average[i] = acc / static_cast<double>(s - 1);
  }
  return m;
}

}  // namespace mtpeer
