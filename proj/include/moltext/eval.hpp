#pragma once

#include <map>
#include <string>
#include <vector>

#include "moltext/cot_pipeline.hpp"

namespace moltext {

struct EvalPair {
  std::string id;
  std::string response;   // model output, answer expected inside tags
  std::string reference;  // gold caption or gold SELFIES
};

struct IdMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-record metric rows plus corpus means. Means are arithmetic over all
// records; invalid generations contribute 0 to graph-based columns and
// count against Validity.
struct MetricReport {
  CotTask task = CotTask::Caption;
  std::vector<std::string> columns;
  std::vector<std::string> ids;
  std::vector<std::map<std::string, double>> rows;
  std::map<std::string, double> means;
  std::string config_hash;
  std::vector<std::string> notes;

  bool means_consistent(double tol = 1e-9) const;
  std::string to_csv() const;
  std::string to_markdown() const;
};

// Caption columns: BLEU-2, BLEU-4, METEOR, ROUGE-1, ROUGE-2, ROUGE-L.
// Generation columns: BLEU (char), Exact, Levenshtein, FTS-circular,
// FTS-path, FTS-keys, Frag-J, Frag-R, FG-Match, Validity.
// Answers are extracted from the response; a failed format gate scores as
// an empty candidate (and an invalid generation).
MetricReport evaluate(const std::vector<EvalPair>& pairs, CotTask task);

// JSONL loaders: predictions {"id","response"}, references
// {"id","reference"}; joined on id (every prediction id must resolve).
std::vector<EvalPair> read_eval_pairs(const std::string& pred_path,
                                      const std::string& ref_path);

}  // namespace moltext
