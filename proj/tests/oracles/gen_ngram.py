"""Writes ngram_oracle.inc: sacrebleu reference values for BLEU, chrF and
the tokenizers. Hypotheses are long enough that every order has n-grams, so
the effective-order rule never applies here."""
import json
import sys

import numpy as np
from sacrebleu.metrics import BLEU, CHRF
from sacrebleu.tokenizers.tokenizer_intl import TokenizerV14International
from sacrebleu.tokenizers.tokenizer_zh import TokenizerZh

rng = np.random.default_rng(7)


def cstr(s):
    return json.dumps(s, ensure_ascii=False)


def strings(xs):
    return "{" + ", ".join(cstr(x) for x in xs) + "}"


words = ["the", "cat", "sat", "on", "mat", "a", "dog", "ran", "fast", "3.5",
         "Hello,", "world!", "don't", "$100", "(really)", "naïve", "café",
         "über", "end.", "x-ray", "1,000", "e-mail", "+", "%", "—"]
zh_words = ["我们", "今天", "去", "北京", "。", "他", "说", "好", "，", "2020年",
            "ok", "的", "人", "！"]


def sentence(vocab, lo, hi):
    n = int(rng.integers(lo, hi))
    return " ".join(vocab[int(i)] for i in rng.integers(0, len(vocab), size=n))


def corrupt(s, vocab, rate):
    toks = s.split(" ")
    out = [vocab[int(rng.integers(0, len(vocab)))] if rng.random() < rate else t
           for t in toks]
    if rng.random() < 0.3 and len(out) > 4:
        out = out[:-1]
    return " ".join(out)


lines = []
lines.append("struct BleuCase { std::vector<std::string> hyp, ref; std::string tokenizer; std::string smooth; double bleu; };")
lines.append("inline const std::vector<BleuCase> kBleuCases = {")
count = 0
for k in range(24):
    zh = k % 6 == 5
    vocab = zh_words if zh else words
    refs = [sentence(vocab, 5, 15) for _ in range(int(rng.integers(1, 8)))]
    hyps = [corrupt(r, vocab, float(rng.uniform(0.0, 0.6))) for r in refs]
    tok = "zh" if zh else ("none" if k % 6 == 4 else "intl")
    smooth = "exp" if k % 4 == 3 else "none"
    b = BLEU(tokenize=tok, smooth_method=smooth).corpus_score(hyps, [refs]).score
    lines.append(f"  {{{strings(hyps)}, {strings(refs)}, {cstr(tok)}, {cstr(smooth)}, {b!r}}},")
lines.append("};")

lines.append("struct ChrfCase { std::vector<std::string> hyp, ref; int order; double beta; double chrf; };")
lines.append("inline const std::vector<ChrfCase> kChrfCases = {")
chrf_cases = [(["abc"], ["abd"], 2, 2.0)]
for k in range(22):
    vocab = zh_words if k % 5 == 4 else words
    refs = [sentence(vocab, 3, 12) for _ in range(int(rng.integers(1, 6)))]
    hyps = [corrupt(r, vocab, float(rng.uniform(0.0, 0.7))) for r in refs]
    order = [6, 6, 4, 2, 3][k % 5]
    beta = [2.0, 2.0, 1.0, 3.0, 0.5][k % 5]
    chrf_cases.append((hyps, refs, order, beta))
for hyps, refs, order, beta in chrf_cases:
    c = CHRF(char_order=order, word_order=0, beta=beta).corpus_score(hyps, [refs]).score
    lines.append(f"  {{{strings(hyps)}, {strings(refs)}, {order}, {beta!r}, {c!r}}},")
lines.append("};")

intl = TokenizerV14International()
zh = TokenizerZh()
lines.append("struct TokenizeCase { std::string text; std::string tokenizer; std::string expected; };")
lines.append("inline const std::vector<TokenizeCase> kTokenizeCases = {")
samples = ["Hello, world!", "It costs $100.50 (approx.)", "3.5 million, 1,000 items",
           "e-mail: a@b.com", "naïve café — über", "don't stop...", "« quoted »",
           "a+b=c", "50% off!", "The end."]
for s in samples:
    lines.append(f"  {{{cstr(s)}, \"intl\", {cstr(intl(s))}}},")
for s in ["我们今天去北京。", "他说：好！ok", "2020年的人", "Hello,世界", "abc 中文 def."]:
    lines.append(f"  {{{cstr(s)}, \"zh\", {cstr(zh(s))}}},")
lines.append("};")

header = ["// Generated by tests/oracles/gen_ngram.py. Do not edit.", "#pragma once",
          "#include <string>", "#include <vector>", "", "namespace oracle {"]
with open(sys.argv[1], "w", encoding="utf-8") as f:
    f.write("\n".join(header + lines + ["}  // namespace oracle", ""]))
