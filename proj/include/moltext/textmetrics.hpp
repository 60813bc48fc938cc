#pragma once

#include <string>
#include <vector>

namespace moltext {

enum class TokenMode { Word, Character };

struct TokenSequence {
  std::vector<std::string> units;
  TokenMode mode = TokenMode::Word;
};

// Lowercases and splits on whitespace/punctuation boundaries; punctuation
// runs are dropped.
TokenSequence word_tokens(const std::string& text);
TokenSequence char_tokens(const std::string& text);

// Sentence BLEU with add-one smoothing on n>1 precisions and a half-count
// floor on the unigram precision; brevity penalty exp(1 - |ref|/|cand|)
// when the candidate is shorter. max_n in {2,4}.
double bleu(const TokenSequence& cand, const TokenSequence& ref, int max_n);

// variant 1 / 2 -> n-gram F1, variant 0 -> LCS-based F1 (ROUGE-L)
double rouge(const TokenSequence& cand, const TokenSequence& ref, int variant);

// Unigram alignment (exact then suffix-stem), F-mean with recall weight 9,
// fragmentation penalty 0.5*(chunks/matches)^3.
double meteor_lite(const TokenSequence& cand, const TokenSequence& ref);

// character-level edit distance
int levenshtein(const std::string& a, const std::string& b);

// Mask over the six language metrics, in the order BLEU-2, BLEU-4,
// METEOR, ROUGE-1, ROUGE-2, ROUGE-L. Disabled components contribute 0
// while the denominator stays 6, so each enabled metric widens the
// attainable range.
struct LanguageMask {
  bool bleu2 = true, bleu4 = true, meteor = true;
  bool rouge1 = true, rouge2 = true, rougeL = true;
};

double r_language(const std::string& cand, const std::string& ref,
                  const LanguageMask& mask = {});

// character 4-gram BLEU on the raw strings
double selfies_sim(const std::string& cand, const std::string& ref);

}  // namespace moltext
