#pragma once

#include <map>
#include <optional>
#include <string>

#include "moltext/molgraph.hpp"
#include "moltext/textmetrics.hpp"

namespace moltext {

struct ModelResponse {
  std::string text;
  std::optional<std::string> extracted_answer;
  bool format_ok = false;
};

struct RewardBreakdown {
  double total = 0.0;
  double format_component = 0.0;      // 0 or 0.5
  double similarity_component = 0.0;  // [0, 1.5]
  std::map<std::string, double> sub_scores;
};

// Mask over the four structural components; disabled ones contribute 0
// while the denominator stays 4.
struct StructuralMask {
  bool fp = true, selfies = true, frag = true, fg = true;
};

// Format gate: exactly one well-nested <answer>...</answer> pair with a
// non-empty trimmed payload. Tag spam and nesting fail the gate.
ModelResponse extract_answer(const std::string& response);

// Eq-style caption reward: 0 when the gate fails, else
// 0.5 + 1.5 * r_language(payload, ref_caption).
RewardBreakdown r_cap(const std::string& response,
                      const std::string& ref_caption,
                      const LanguageMask& mask = {});

// Mean of fingerprint similarity, SELFIES char-BLEU, fragment similarity
// and functional-group match.
double r_structural(const MolGraph& pred, const MolGraph& ref,
                    const std::string& pred_selfies,
                    const std::string& ref_selfies,
                    const StructuralMask& mask = {});

// Generation reward: 0 on a failed gate; a formatted but undecodable
// payload keeps the 0.5 floor and earns only the SELFIES character
// similarity term.
RewardBreakdown r_gen(const std::string& response,
                      const std::string& ref_selfies,
                      const StructuralMask& mask = {});

}  // namespace moltext
