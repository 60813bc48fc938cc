#include "moltext/eval.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "moltext/fingerprints.hpp"
#include "moltext/fragments.hpp"
#include "moltext/hash.hpp"
#include "moltext/rewards.hpp"
#include "moltext/selfies.hpp"
#include "moltext/textmetrics.hpp"

namespace moltext {

namespace {

using nlohmann::json;

const std::vector<std::string> kCaptionColumns = {
    "BLEU-2", "BLEU-4", "METEOR", "ROUGE-1", "ROUGE-2", "ROUGE-L"};
const std::vector<std::string> kGenerationColumns = {
    "BLEU",      "Exact",  "Levenshtein", "FTS-circular", "FTS-path",
    "FTS-keys",  "Frag-J", "Frag-R",      "FG-Match",     "Validity"};

std::map<std::string, double> caption_row(const std::string& payload,
                                          const std::string& reference) {
  TokenSequence c = word_tokens(payload);
  TokenSequence r = word_tokens(reference);
  return {{"BLEU-2", bleu(c, r, 2)},   {"BLEU-4", bleu(c, r, 4)},
          {"METEOR", meteor_lite(c, r)}, {"ROUGE-1", rouge(c, r, 1)},
          {"ROUGE-2", rouge(c, r, 2)},   {"ROUGE-L", rouge(c, r, 0)}};
}

std::map<std::string, double> generation_row(const std::string& payload,
                                             const std::string& reference,
                                             bool format_ok) {
  std::map<std::string, double> row;
  row["BLEU"] = selfies_sim(payload, reference);
  row["Levenshtein"] = static_cast<double>(levenshtein(payload, reference));

  MolGraph pred;
  bool valid = false;
  if (format_ok) {
    try {
      pred = decode_string(payload);
      valid = true;
    } catch (const SelfiesError&) {
    }
  }
  row["Validity"] = valid ? 1.0 : 0.0;
  if (!valid) {
    row["Exact"] = row["FTS-circular"] = row["FTS-path"] = row["FTS-keys"] =
        row["Frag-J"] = row["Frag-R"] = row["FG-Match"] = 0.0;
    return row;
  }

  MolGraph ref = decode_string(reference);
  row["Exact"] = exact_match(pred, ref) ? 1.0 : 0.0;
  row["FTS-circular"] = tanimoto(circular_fp(pred), circular_fp(ref));
  row["FTS-path"] = tanimoto(path_fp(pred), path_fp(ref));
  row["FTS-keys"] = tanimoto(key_fp(pred), key_fp(ref));
  FragmentSet pf = decompose(pred);
  FragmentSet rf = decompose(ref);
  auto [j, r] = frag_metrics(pf, rf);
  row["Frag-J"] = j;
  row["Frag-R"] = r;
  row["FG-Match"] = fg_match(pf, rf);
  return row;
}

std::string hash_config(CotTask task, std::size_t n) {
  std::ostringstream cfg;
  cfg << "task=" << (task == CotTask::Caption ? "caption" : "generation")
      << ";records=" << n
      << ";bleu=add-one-smoothing;selfies-bleu-n=4;levenshtein=char;"
         "fingerprints=circular-r2-2048,path-1-7-2048,keys-166";
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0')
      << fnv1a64(cfg.str());
  return hex.str();
}

}  // namespace

MetricReport evaluate(const std::vector<EvalPair>& pairs, CotTask task) {
  MetricReport report;
  report.task = task;
  report.columns = task == CotTask::Caption ? kCaptionColumns
                                            : kGenerationColumns;
  report.config_hash = hash_config(task, pairs.size());
  report.notes = {
      "fingerprint columns use this tool's own bit assignments; absolute "
      "values are not comparable to third-party toolkit tables",
      "means are taken over all records, including invalid outputs"};

  for (const EvalPair& pair : pairs) {
    ModelResponse resp = extract_answer(pair.response);
    std::string payload = resp.format_ok ? *resp.extracted_answer : "";
    report.ids.push_back(pair.id);
    report.rows.push_back(
        task == CotTask::Caption
            ? caption_row(payload, pair.reference)
            : generation_row(payload, pair.reference, resp.format_ok));
  }

  for (const std::string& col : report.columns) {
    double sum = 0.0;
    for (const auto& row : report.rows) sum += row.at(col);
    report.means[col] = report.rows.empty() ? 0.0 : sum / report.rows.size();
  }
  return report;
}

bool MetricReport::means_consistent(double tol) const {
  for (const std::string& col : columns) {
    double sum = 0.0;
    for (const auto& row : rows) sum += row.at(col);
    double mean = rows.empty() ? 0.0 : sum / rows.size();
    if (std::abs(mean - means.at(col)) > tol) return false;
  }
  return true;
}

std::string MetricReport::to_csv() const {
  std::ostringstream out;
  out << "id";
  for (const std::string& col : columns) out << "," << col;
  out << "\n";
  out << std::setprecision(12);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << ids[i];
    for (const std::string& col : columns) out << "," << rows[i].at(col);
    out << "\n";
  }
  out << "mean";
  for (const std::string& col : columns) out << "," << means.at(col);
  out << "\n";
  return out.str();
}

std::string MetricReport::to_markdown() const {
  std::ostringstream out;
  out << "# "
      << (task == CotTask::Caption ? "Caption metrics" : "Generation metrics")
      << "\n\nconfig hash: `" << config_hash << "`\n\n";
  out << "| metric | mean |\n|---|---|\n";
  out << std::fixed << std::setprecision(4);
  for (const std::string& col : columns)
    out << "| " << col << " | " << means.at(col) << " |\n";
  out << "\nrecords: " << rows.size() << "\n";
  for (const std::string& note : notes) out << "\n> " << note << "\n";
  out << "\nconsistency: "
      << (means_consistent() ? "means equal per-record averages"
                             : "MEAN MISMATCH")
      << "\n";
  return out.str();
}

std::vector<EvalPair> read_eval_pairs(const std::string& pred_path,
                                      const std::string& ref_path) {
  auto read_field = [](const std::string& path, const std::string& field) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open file: " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        json row = json::parse(line);
        out.emplace_back(row.at("id").get<std::string>(),
                         row.at(field).get<std::string>());
      } catch (const json::exception& e) {
        throw SchemaError(path + ":" + std::to_string(lineno) + ": " +
                          e.what());
      }
    }
    return out;
  };

  auto preds = read_field(pred_path, "response");
  auto refs = read_field(ref_path, "reference");
  std::map<std::string, std::string> ref_by_id;
  for (auto& [id, text] : refs) {
    if (!ref_by_id.emplace(id, text).second)
      throw IdMismatch("duplicate reference id: " + id);
  }

  std::vector<EvalPair> pairs;
  for (auto& [id, response] : preds) {
    auto it = ref_by_id.find(id);
    if (it == ref_by_id.end())
      throw IdMismatch("prediction id has no reference: " + id);
    pairs.push_back({id, response, it->second});
  }
  return pairs;
}

}  // namespace moltext
