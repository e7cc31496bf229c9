#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace mtpeer {

enum class BleuTokenizer { Intl, Whitespace, Zh };
enum class BleuSmoothing { None, ExpFloor };

struct BleuConfig {
  int max_order = 4;
  BleuSmoothing smoothing = BleuSmoothing::None;
  BleuTokenizer tokenizer = BleuTokenizer::Intl;
};

struct ChrfConfig {
  int char_order = 6;
  double beta = 2.0;
};

BleuTokenizer parse_tokenizer(std::string_view name);

/// Tokenizes one segment as BLEU sees it.
std::vector<std::string> bleu_tokenize(std::string_view text,
                                       BleuTokenizer tokenizer);

/// Sufficient statistics of corpus BLEU.
struct BleuStats {
  std::vector<double> matches;  // clipped n-gram matches per order
  std::vector<double> totals;   // hypothesis n-grams per order
  double hyp_length = 0.0;
  double ref_length = 0.0;

  explicit BleuStats(int max_order = 4)
      : matches(static_cast<std::size_t>(max_order), 0.0),
        totals(static_cast<std::size_t>(max_order), 0.0) {}
  BleuStats& operator+=(const BleuStats& o);
};

BleuStats bleu_segment_stats(const std::vector<std::string>& hyp,
                             const std::vector<std::string>& ref,
                             int max_order);

/// BLEU in [0, 100] from accumulated statistics. Orders for which the
/// hypothesis has no n-grams at all are left out of the geometric mean.
double bleu_from_stats(const BleuStats& stats, const BleuConfig& cfg);

/// Corpus-level BLEU with clipped precisions and brevity penalty.
double bleu(const std::vector<std::string>& hypotheses,
            const std::vector<std::string>& references,
            const BleuConfig& cfg = {});

/// Corpus-level chrF over character n-grams with whitespace removed: F-beta
/// of the precision and recall averaged over the orders both sides have.
double chrf(const std::vector<std::string>& hypotheses,
            const std::vector<std::string>& references,
            const ChrfConfig& cfg = {});

/// BLEU of output_a scored against output_b as the reference.
double cross_bleu(const std::vector<std::string>& output_a,
                  const std::vector<std::string>& output_b,
                  const BleuConfig& cfg = {});

struct CrossBleuMatrix {
  std::vector<std::string> systems;
  Eigen::MatrixXd scores;   // (i, j) = BLEU of system i against system j
  Eigen::VectorXd average;  // mean over the other systems of row i
};

CrossBleuMatrix cross_bleu_matrix(
    const std::vector<std::string>& systems,
    const std::vector<std::vector<std::string>>& outputs,
    const BleuConfig& cfg = {});

}  // namespace mtpeer
