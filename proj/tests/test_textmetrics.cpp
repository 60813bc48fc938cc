#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "moltext/textmetrics.hpp"

using namespace moltext;

TEST_CASE("word tokenization lowercases and drops punctuation") {
  TokenSequence t = word_tokens("The molecule, a 2-ring SYSTEM; ends.");
  std::vector<std::string> expected = {"the", "molecule", "a",     "2",
                                       "ring", "system",   "ends"};
  CHECK(t.units == expected);
  CHECK(word_tokens("  \t\n ").units.empty());

  TokenSequence c = char_tokens("[C]");
  CHECK(c.units.size() == 3);
  CHECK(c.units[0] == "[");
}

TEST_CASE("bleu hand-worked example with brevity penalty") {
  // p1 = 3/3, p2 = (2+1)/(2+1) = 1, BP = exp(1 - 4/3)
  double score = bleu(word_tokens("the cat sat"), word_tokens("the cat sat down"), 2);
  CHECK(score == doctest::Approx(std::exp(1.0 - 4.0 / 3.0)).epsilon(1e-9));
  CHECK(score == doctest::Approx(0.7165).epsilon(1e-3));
}

TEST_CASE("bleu edge behavior") {
  TokenSequence same = word_tokens("alpha beta gamma delta");
  CHECK(bleu(same, same, 2) == doctest::Approx(1.0));
  CHECK(bleu(same, same, 4) == doctest::Approx(1.0));

  CHECK(bleu(word_tokens(""), same, 2) == doctest::Approx(0.0));

  // zero overlap: unigram floor 1/(2*3), bigram smoothing 1/(2+1)
  double floor = bleu(word_tokens("a b c"), word_tokens("x y z"), 2);
  CHECK(floor == doctest::Approx(std::sqrt(1.0 / 6.0 * 1.0 / 3.0)));
  CHECK(floor > 0.0);
  CHECK(floor < 0.3);
}

TEST_CASE("bleu is bounded on random word pairs") {
  std::mt19937_64 rng(31);
  const char* words[] = {"red", "blue", "acid", "base", "ring", "chain"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string a, b;
    for (int i = 0; i < static_cast<int>(rng() % 6 + 1); ++i)
      a += std::string(words[rng() % 6]) + " ";
    for (int i = 0; i < static_cast<int>(rng() % 6 + 1); ++i)
      b += std::string(words[rng() % 6]) + " ";
    for (int n : {2, 4}) {
      double s = bleu(word_tokens(a), word_tokens(b), n);
      CHECK(s >= 0.0);
      CHECK(s <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("rouge-1 precision/recall example") {
  double f1 = rouge(word_tokens("a b c"), word_tokens("a c"), 1);
  CHECK(f1 == doctest::Approx(0.8));
  CHECK(rouge(word_tokens("x"), word_tokens("x"), 1) == doctest::Approx(1.0));
  CHECK(rouge(word_tokens(""), word_tokens(""), 1) == doctest::Approx(1.0));
  CHECK(rouge(word_tokens("x"), word_tokens(""), 1) == doctest::Approx(0.0));
  CHECK(rouge(word_tokens(""), word_tokens("x"), 1) == doctest::Approx(0.0));
}

TEST_CASE("rouge-2 and rouge-L") {
  TokenSequence a = word_tokens("a b c d");
  TokenSequence b = word_tokens("a c b d");
  // LCS("a b c d", "a c b d") = 3 -> P = R = 3/4
  CHECK(rouge(a, b, 0) == doctest::Approx(0.75));
  CHECK(rouge(a, a, 2) == doctest::Approx(1.0));
  CHECK(rouge(a, a, 0) == doctest::Approx(1.0));
  // bigrams of a: ab bc cd; of b: ac cb bd -> no overlap
  CHECK(rouge(a, b, 2) == doctest::Approx(0.0));
}

TEST_CASE("meteor identical text gets only the chunk penalty") {
  TokenSequence four = word_tokens("one two three four");
  CHECK(meteor_lite(four, four) ==
        doctest::Approx(1.0 - 0.5 / (4.0 * 4.0 * 4.0)));
  CHECK(meteor_lite(four, four) == doctest::Approx(0.9922).epsilon(1e-3));
  CHECK(meteor_lite(word_tokens("aa bb"), word_tokens("cc dd")) ==
        doctest::Approx(0.0));
}

TEST_CASE("meteor stem matching aligns inflected forms") {
  double s = meteor_lite(word_tokens("cats"), word_tokens("cat"));
  CHECK(s > 0.0);
  double plain = meteor_lite(word_tokens("dog"), word_tokens("cat"));
  CHECK(plain == doctest::Approx(0.0));
}

TEST_CASE("meteor fragmentation penalty favors contiguous matches") {
  TokenSequence ref = word_tokens("a b c d e f");
  double contiguous = meteor_lite(word_tokens("a b c d e f"), ref);
  double scrambled = meteor_lite(word_tokens("f e d c b a"), ref);
  CHECK(contiguous > scrambled);
}

TEST_CASE("levenshtein classics") {
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("", "[C]") == 3);
  CHECK(levenshtein("same", "same") == 0);
  CHECK(levenshtein("abc", "") == 3);
}

TEST_CASE("levenshtein triangle inequality on random strings") {
  std::mt19937_64 rng(47);
  auto rand_str = [&]() {
    std::string s;
    for (int i = 0; i < static_cast<int>(rng() % 10); ++i)
      s += static_cast<char>('a' + rng() % 4);
    return s;
  };
  for (int trial = 0; trial < 300; ++trial) {
    std::string a = rand_str(), b = rand_str(), c = rand_str();
    CHECK(levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c));
    CHECK(levenshtein(a, b) == levenshtein(b, a));
  }
}

TEST_CASE("r_language averages six components") {
  std::string text = "the molecule is an aromatic acid";
  double self_score = r_language(text, text);
  CHECK(self_score >= 0.99);
  CHECK(self_score < 1.0);  // METEOR chunk penalty

  double far = r_language("completely unrelated words here", text);
  CHECK(far < 0.1);
  CHECK(far >= 0.0);

  // disabled components contribute zero while the denominator stays 6
  LanguageMask only_rouge1;
  only_rouge1.bleu2 = only_rouge1.bleu4 = only_rouge1.meteor = false;
  only_rouge1.rouge2 = only_rouge1.rougeL = false;
  CHECK(r_language(text, text, only_rouge1) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("selfies_sim is character 4-gram bleu") {
  CHECK(selfies_sim("[C][O]", "[C][O]") == doctest::Approx(1.0));
  double near = selfies_sim("[C][C][O]", "[C][C][N]");
  double far = selfies_sim("[S][S]", "[C][C][N]");
  CHECK(near > far);
  CHECK(near < 1.0);
  CHECK(selfies_sim("", "[C]") == doctest::Approx(0.0));
}
