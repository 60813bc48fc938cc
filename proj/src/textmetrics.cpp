#include "moltext/textmetrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace moltext {

TokenSequence word_tokens(const std::string& text) {
  TokenSequence seq;
  seq.mode = TokenMode::Word;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      seq.units.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) seq.units.push_back(cur);
  return seq;
}

TokenSequence char_tokens(const std::string& text) {
  TokenSequence seq;
  seq.mode = TokenMode::Character;
  for (char c : text) seq.units.push_back(std::string(1, c));
  return seq;
}

namespace {

std::map<std::string, int> ngram_counts(const std::vector<std::string>& units,
                                        int n) {
  std::map<std::string, int> counts;
  if (static_cast<int>(units.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= units.size(); ++i) {
    std::string key;
    for (int k = 0; k < n; ++k) key += units[i + k] + "\x1f";
    counts[key] += 1;
  }
  return counts;
}

int lcs_length(const std::vector<std::string>& a,
               const std::vector<std::string>& b) {
  std::vector<std::vector<int>> dp(a.size() + 1,
                                   std::vector<int>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      dp[i][j] = a[i - 1] == b[j - 1]
                     ? dp[i - 1][j - 1] + 1
                     : std::max(dp[i - 1][j], dp[i][j - 1]);
  return dp[a.size()][b.size()];
}

// fixed English suffix-stripping for the stem match fallback
std::string stem(const std::string& w) {
  static const char* suffixes[] = {"ingly", "edly", "ings", "ing", "ely",
                                   "ed",    "es",   "ies", "ly",  "s",
                                   "er",    "est"};
  for (const char* suf : suffixes) {
    std::size_t n = std::char_traits<char>::length(suf);
    if (w.size() > n + 2 && w.compare(w.size() - n, n, suf) == 0)
      return w.substr(0, w.size() - n);
  }
  return w;
}

}  // namespace

double bleu(const TokenSequence& cand, const TokenSequence& ref, int max_n) {
  const auto& c = cand.units;
  const auto& r = ref.units;
  if (c.empty()) return 0.0;

  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    auto cc = ngram_counts(c, n);
    auto rc = ngram_counts(r, n);
    long matches = 0, total = 0;
    for (const auto& [gram, cnt] : cc) {
      total += cnt;
      auto it = rc.find(gram);
      if (it != rc.end()) matches += std::min(cnt, it->second);
    }
    double p;
    if (n == 1) {
      if (total == 0) return 0.0;
      // half-count floor keeps zero-overlap scores off exact zero
      p = matches > 0 ? static_cast<double>(matches) / total
                      : 1.0 / (2.0 * total);
    } else {
      p = static_cast<double>(matches + 1) / (total + 1);
    }
    log_sum += std::log(p);
  }
  double score = std::exp(log_sum / max_n);
  if (c.size() < r.size())
    score *= std::exp(1.0 - static_cast<double>(r.size()) / c.size());
  return score;
}

double rouge(const TokenSequence& cand, const TokenSequence& ref,
             int variant) {
  const auto& c = cand.units;
  const auto& r = ref.units;
  if (c.empty() && r.empty()) return 1.0;
  if (c.empty() || r.empty()) return 0.0;

  double match, csize, rsize;
  if (variant == 0) {  // ROUGE-L
    match = lcs_length(c, r);
    csize = static_cast<double>(c.size());
    rsize = static_cast<double>(r.size());
  } else {
    auto cc = ngram_counts(c, variant);
    auto rc = ngram_counts(r, variant);
    long m = 0, ct = 0, rt = 0;
    for (const auto& [gram, cnt] : cc) {
      ct += cnt;
      auto it = rc.find(gram);
      if (it != rc.end()) m += std::min(cnt, it->second);
    }
    for (const auto& [gram, cnt] : rc) rt += cnt;
    if (ct == 0 || rt == 0) return 0.0;
    match = static_cast<double>(m);
    csize = static_cast<double>(ct);
    rsize = static_cast<double>(rt);
  }
  if (match == 0) return 0.0;
  double prec = match / csize;
  double rec = match / rsize;
  return 2.0 * prec * rec / (prec + rec);
}

double meteor_lite(const TokenSequence& cand, const TokenSequence& ref) {
  const auto& c = cand.units;
  const auto& r = ref.units;
  if (c.empty() || r.empty()) return 0.0;

  // alignment: exact pass then stem pass, each greedy left-to-right
  std::vector<int> match_of(c.size(), -1);
  std::vector<bool> ref_used(r.size(), false);
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (match_of[i] >= 0) continue;
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (ref_used[j]) continue;
        bool hit = pass == 0 ? c[i] == r[j] : stem(c[i]) == stem(r[j]);
        if (hit) {
          match_of[i] = static_cast<int>(j);
          ref_used[j] = true;
          break;
        }
      }
    }
  }
  int m = 0;
  for (int x : match_of) m += x >= 0;
  if (m == 0) return 0.0;

  // chunks: maximal runs of adjacent candidate matches mapping to
  // consecutive reference positions
  int chunks = 0, prev = -2;
  bool in_chunk = false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (match_of[i] < 0) {
      in_chunk = false;
      continue;
    }
    if (!in_chunk || match_of[i] != prev + 1) ++chunks;
    in_chunk = true;
    prev = match_of[i];
  }

  double prec = static_cast<double>(m) / c.size();
  double rec = static_cast<double>(m) / r.size();
  double fmean = 10.0 * prec * rec / (rec + 9.0 * prec);
  double frag = static_cast<double>(chunks) / m;
  return fmean * (1.0 - 0.5 * frag * frag * frag);
}

int levenshtein(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      int sub = prev[j - 1] + (a[i - 1] != b[j - 1]);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double r_language(const std::string& cand, const std::string& ref,
                  const LanguageMask& mask) {
  TokenSequence c = word_tokens(cand);
  TokenSequence r = word_tokens(ref);
  double sum = 0.0;
  if (mask.bleu2) sum += bleu(c, r, 2);
  if (mask.bleu4) sum += bleu(c, r, 4);
  if (mask.meteor) sum += meteor_lite(c, r);
  if (mask.rouge1) sum += rouge(c, r, 1);
  if (mask.rouge2) sum += rouge(c, r, 2);
  if (mask.rougeL) sum += rouge(c, r, 0);
  return sum / 6.0;
}

double selfies_sim(const std::string& cand, const std::string& ref) {
  return bleu(char_tokens(cand), char_tokens(ref), 4);
}

}  // namespace moltext
