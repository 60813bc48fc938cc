#include "moltext/rewards.hpp"

#include "moltext/fingerprints.hpp"
#include "moltext/fragments.hpp"
#include "moltext/selfies.hpp"

namespace moltext {

namespace {

const std::string kOpen = "<answer>";
const std::string kClose = "</answer>";

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::size_t count_occurrences(const std::string& s, const std::string& pat) {
  std::size_t n = 0, pos = 0;
  while ((pos = s.find(pat, pos)) != std::string::npos) {
    ++n;
    pos += pat.size();
  }
  return n;
}

}  // namespace

ModelResponse extract_answer(const std::string& response) {
  ModelResponse out;
  out.text = response;
  if (count_occurrences(response, kOpen) != 1 ||
      count_occurrences(response, kClose) != 1)
    return out;
  std::size_t open = response.find(kOpen);
  std::size_t close = response.find(kClose);
  if (close < open) return out;
  std::string payload =
      trim(response.substr(open + kOpen.size(), close - open - kOpen.size()));
  if (payload.empty()) return out;
  out.extracted_answer = payload;
  out.format_ok = true;
  return out;
}

RewardBreakdown r_cap(const std::string& response,
                      const std::string& ref_caption,
                      const LanguageMask& mask) {
  RewardBreakdown rb;
  ModelResponse resp = extract_answer(response);
  if (!resp.format_ok) return rb;

  TokenSequence c = word_tokens(*resp.extracted_answer);
  TokenSequence r = word_tokens(ref_caption);
  rb.sub_scores["bleu2"] = bleu(c, r, 2);
  rb.sub_scores["bleu4"] = bleu(c, r, 4);
  rb.sub_scores["meteor"] = meteor_lite(c, r);
  rb.sub_scores["rouge1"] = rouge(c, r, 1);
  rb.sub_scores["rouge2"] = rouge(c, r, 2);
  rb.sub_scores["rougeL"] = rouge(c, r, 0);
  rb.format_component = 0.5;
  rb.similarity_component =
      1.5 * r_language(*resp.extracted_answer, ref_caption, mask);
  rb.total = rb.format_component + rb.similarity_component;
  return rb;
}

double r_structural(const MolGraph& pred, const MolGraph& ref,
                    const std::string& pred_selfies,
                    const std::string& ref_selfies,
                    const StructuralMask& mask) {
  double sum = 0.0;
  if (mask.fp) sum += fp_sim(pred, ref);
  if (mask.selfies) sum += selfies_sim(pred_selfies, ref_selfies);
  if (mask.frag || mask.fg) {
    FragmentSet fp_frag = decompose(pred);
    FragmentSet ref_frag = decompose(ref);
    if (mask.frag) sum += frag_sim(fp_frag, ref_frag);
    if (mask.fg) sum += fg_match(fp_frag, ref_frag);
  }
  return sum / 4.0;
}

RewardBreakdown r_gen(const std::string& response,
                      const std::string& ref_selfies,
                      const StructuralMask& mask) {
  RewardBreakdown rb;
  ModelResponse resp = extract_answer(response);
  if (!resp.format_ok) return rb;
  rb.format_component = 0.5;

  const std::string& payload = *resp.extracted_answer;
  MolGraph pred;
  bool decodable = true;
  try {
    pred = decode_string(payload);
  } catch (const SelfiesError&) {
    decodable = false;
  }

  double structural;
  double s_sim = mask.selfies ? selfies_sim(payload, ref_selfies) : 0.0;
  rb.sub_scores["selfies_sim"] = selfies_sim(payload, ref_selfies);
  if (decodable) {
    MolGraph ref = decode_string(ref_selfies);
    FragmentSet pf = decompose(pred);
    FragmentSet rf = decompose(ref);
    rb.sub_scores["fp_sim"] = fp_sim(pred, ref);
    rb.sub_scores["frag_sim"] = frag_sim(pf, rf);
    rb.sub_scores["fg_match"] = fg_match(pf, rf);
    double sum = s_sim;
    if (mask.fp) sum += rb.sub_scores["fp_sim"];
    if (mask.frag) sum += rb.sub_scores["frag_sim"];
    if (mask.fg) sum += rb.sub_scores["fg_match"];
    structural = sum / 4.0;
  } else {
    // undecodable payload: character similarity only, graph terms 0
    rb.sub_scores["fp_sim"] = 0.0;
    rb.sub_scores["frag_sim"] = 0.0;
    rb.sub_scores["fg_match"] = 0.0;
    structural = s_sim / 4.0;
  }
  rb.similarity_component = 1.5 * structural;
  rb.total = rb.format_component + rb.similarity_component;
  return rb;
}

}  // namespace moltext
