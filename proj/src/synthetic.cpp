#include "mtpeer/synthetic.hpp"

#include <cstdio>
#include <random>

namespace mtpeer {

namespace {

std::string word(char prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%d", prefix, i);
  return buf;
}

}  // namespace

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

NoiseBenchmark make_noise_benchmark(const NoiseBenchmarkConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> zipf;
  for (int i = 0; i < cfg.vocabulary; ++i) zipf.push_back(1.0 / (i + 1.0));
  std::discrete_distribution<int> pick_word(zipf.begin(), zipf.end());
  std::uniform_int_distribution<int> pick_length(cfg.min_length, cfg.max_length);
  std::bernoulli_distribution use_alternate(cfg.alternate_translation);

  auto sentence_pair = [&]() {
    SentencePair p;
    const int len = pick_length(rng);
    for (int k = 0; k < len; ++k) {
      const int w = pick_word(rng);
      p.source.push_back(word('s', w));
      p.target.push_back(word(use_alternate(rng) ? 'u' : 't', w));
    }
    return p;
  };

  NoiseBenchmark bench;
  for (int i = 0; i < cfg.train_pairs; ++i) bench.train.push_back(sentence_pair());
  for (int i = 0; i < cfg.test_segments; ++i) {
    auto p = sentence_pair();
    bench.test_sources.push_back(std::move(p.source));
    bench.references.push_back(std::move(p.target));
  }

  std::uniform_int_distribution<int> pick_any(0, cfg.vocabulary - 1);
  for (std::size_t s = 0; s < cfg.noise_rates.size(); ++s) {
    SyntheticSystem sys;
    sys.noise_rate = cfg.noise_rates[s];
    char name[32];
    std::snprintf(name, sizeof name, "sys%02zu", s);
    sys.name = name;
    std::bernoulli_distribution corrupt(sys.noise_rate);
    for (const auto& ref : bench.references) {
      std::vector<std::string> out = ref;
      int kept = 0;
      for (auto& tok : out) {
        if (corrupt(rng)) tok = word('t', pick_any(rng));
        kept += tok == ref[static_cast<std::size_t>(&tok - out.data())];
      }
      sys.kept_fraction.push_back(static_cast<double>(kept) /
                                  static_cast<double>(out.size()));
      sys.outputs.push_back(std::move(out));
    }
    bench.systems.push_back(std::move(sys));
  }
  return bench;
}

HumanJudgments synthetic_human(const NoiseBenchmark& bench,
                               const LanguagePair& lp, double segment_jitter,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, segment_jitter);
  HumanJudgments human;
  for (const auto& sys : bench.systems) {
    human.system_scores[{lp, sys.name}] = 100.0 * (1.0 - sys.noise_rate);
    for (std::size_t i = 0; i < sys.kept_fraction.size(); ++i) {
      human.segment_scores[{lp, sys.name, static_cast<int>(i)}] =
          100.0 * sys.kept_fraction[i] + jitter(rng);
    }
  }
  return human;
}

}  // namespace mtpeer
