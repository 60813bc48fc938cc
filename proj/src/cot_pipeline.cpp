#include "moltext/cot_pipeline.hpp"

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "moltext/fragments.hpp"
#include "moltext/molgraph.hpp"
#include "moltext/rewards.hpp"
#include "moltext/selfies.hpp"
#include "moltext/textmetrics.hpp"

// keep the heavyweight HTTP header out of the public interface
#include <httplib.h>

namespace moltext {

namespace {

using nlohmann::json;

MolGraph decode_record(const MoleculeRecord& rec) {
  try {
    return decode_string(rec.selfies);
  } catch (const SelfiesError& e) {
    throw PromptBuildError("record " + rec.id +
                           ": SELFIES does not decode: " + e.what());
  }
}

std::string structural_sentences(const MolGraph& g) {
  StructuralInfo info = structural_info(g);
  std::ostringstream out;
  out << "1. " << render_ring_sentence(info) << "\n"
      << "2. " << render_weight_sentence(info) << "\n";
  return out.str();
}

// description split into numbered sentences on ". " boundaries
std::string numbered_description(const std::string& description) {
  std::vector<std::string> sentences;
  std::string rest = description;
  std::size_t pos;
  while ((pos = rest.find(". ")) != std::string::npos) {
    sentences.push_back(rest.substr(0, pos + 1));
    rest = rest.substr(pos + 2);
  }
  if (!rest.empty()) sentences.push_back(rest);
  std::ostringstream out;
  for (std::size_t i = 0; i < sentences.size(); ++i)
    out << (i + 1) << ". " << sentences[i] << "\n";
  return out.str();
}

}  // namespace

std::string fragment_labels(const std::string& selfies) {
  MolGraph g = decode_string(selfies);
  FragmentSet fs = decompose(g);
  std::ostringstream out;
  bool first = true;
  for (const std::string& id : fs.fragments) {  // std::set: sorted ids
    if (!first) out << " ";
    out << "<|" << id << "|>";
    first = false;
  }
  return out.str();
}

std::string build_caption_prompt(const MoleculeRecord& rec) {
  if (rec.description.empty())
    throw PromptBuildError("record " + rec.id + ": empty description");
  MolGraph g = decode_record(rec);
  FragmentSet fs = decompose(g);
  std::ostringstream out;
  out << "You are a professional chemist. Given a molecule's SELFIES and "
         "structural features, and identified functional fragments, your "
         "task is to generate a natural, concise, and chemically accurate "
         "description of the molecule. Do not reproduce or reference the "
         "original SELFIES string. Instead, decode it internally and "
         "abstractly summarize the key structural features it represents.\n"
      << "SELFIES:\n"
      << rec.selfies << "\n"
      << "Structural Info:\n"
      << structural_sentences(g) << "Fragments:\n"
      << fragment_labels(rec.selfies) << "\n"
      << "Please provide a step-by-step analysis that explains how you "
         "would interpret this molecular structure and summarize it into a "
         "concise and chemically accurate natural language description. "
         "Let's think step by step and return the final answer in <answer> "
      << rec.description << " </answer> tags.\n";
  return out.str();
}

std::string build_generation_prompt(const MoleculeRecord& rec) {
  if (rec.description.empty())
    throw PromptBuildError("record " + rec.id + ": empty description");
  MolGraph g = decode_record(rec);
  std::ostringstream out;
  out << "You are a professional biochemist designing molecular structures. "
         "Given the molecular description, basic structural information, "
         "and identified fragments. Your goal is not to re-predict the "
         "molecule's SELFIES, but to generate a logical, chemically sound "
         "reasoning chain that explains how one could deduce or construct "
         "this structure based on the given information.\n"
      << "Description:\n"
      << numbered_description(rec.description) << "Structural Info:\n"
      << structural_sentences(g) << "Fragments:\n"
      << fragment_labels(rec.selfies) << "\n"
      << "Please provide a step-by-step molecular reasoning chain that "
         "explains how you would reconstruct or deduce the molecular "
         "structure. Let's think step by step and return the final answer "
         "in <answer> "
      << rec.selfies << " </answer> tags.\n";
  return out.str();
}

MockProvider::MockProvider(double drop_tag_probability, std::uint64_t seed)
    : drop_tag_probability_(drop_tag_probability), state_(seed ? seed : 1) {}

std::string MockProvider::complete(const std::string& prompt) {
  ModelResponse gold = extract_answer(prompt);
  if (!gold.format_ok)
    throw ProviderError("mock provider: prompt carries no answer span");
  // xorshift64 keeps the mock free of any global RNG state
  state_ ^= state_ << 13;
  state_ ^= state_ >> 7;
  state_ ^= state_ << 17;
  double u = static_cast<double>(state_ >> 11) / 9007199254740992.0;
  if (u < drop_tag_probability_)
    return "Step 1: reasoning. Final: " + *gold.extracted_answer;
  return "Step 1: reasoning about the structure.\n<answer> " +
         *gold.extracted_answer + " </answer>";
}

HttpProvider::HttpProvider(std::string endpoint, int max_tokens,
                           double temperature)
    : max_tokens_(max_tokens), temperature_(temperature) {
  // split scheme://host[:port] from the request path
  std::size_t scheme = endpoint.find("://");
  std::size_t slash = endpoint.find(
      '/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash == std::string::npos) {
    base_ = endpoint;
    path_ = "/complete";
  } else {
    base_ = endpoint.substr(0, slash);
    path_ = endpoint.substr(slash);
  }
}

std::string HttpProvider::complete(const std::string& prompt) {
  json body = {{"prompt", prompt},
               {"max_tokens", max_tokens_},
               {"temperature", temperature_}};
  httplib::Client client(base_);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  const char* token = std::getenv("MOLTEXT_PROVIDER_TOKEN");
  httplib::Headers headers;
  if (token && *token)
    headers.emplace("Authorization", std::string("Bearer ") + token);

  std::string last_error;
  for (int attempt = 0; attempt < 3; ++attempt) {
    if (attempt)
      std::this_thread::sleep_for(
          std::chrono::milliseconds(200 << attempt));
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "status " + std::to_string(res->status);
      if (res->status >= 400 && res->status < 500 && res->status != 429)
        break;  // client errors won't heal on retry
      continue;
    }
    try {
      json parsed = json::parse(res->body);
      return parsed.at("text").get<std::string>();
    } catch (const json::exception& e) {
      last_error = std::string("bad response body: ") + e.what();
      break;
    }
  }
  throw ProviderError("provider " + base_ + path_ + ": " + last_error);
}

CotSample filter_sample(CotSample sample, const MoleculeRecord& rec,
                        const Thresholds& thresholds) {
  sample.accepted = false;
  sample.format_ok = false;
  sample.decodable = false;
  sample.similarity = 0.0;

  ModelResponse resp = extract_answer(sample.completion);
  sample.format_ok = resp.format_ok;
  if (!resp.format_ok) return sample;
  sample.answer_payload = resp.extracted_answer;

  if (sample.task == CotTask::Caption) {
    sample.similarity = r_language(*resp.extracted_answer, rec.description);
    sample.accepted = sample.similarity >= thresholds.tau_lang;
    return sample;
  }

  MolGraph pred;
  try {
    pred = decode_string(*resp.extracted_answer);
    sample.decodable = true;
  } catch (const SelfiesError&) {
    return sample;  // validity gate
  }
  MolGraph ref = decode_string(rec.selfies);
  sample.similarity = r_structural(pred, ref, *resp.extracted_answer,
                                   rec.selfies);
  sample.accepted = sample.similarity >= thresholds.tau_struct;
  return sample;
}

std::string PipelineSummary::to_string() const {
  std::ostringstream out;
  out << "records: " << total << "  resumed-skip: " << skipped_existing
      << "  attempted: " << attempted << "  accepted: " << accepted
      << "  acceptance-rate: " << acceptance_rate() << "\n"
      << "failures  prompt: " << prompt_failures
      << "  format: " << format_failures
      << "  validity: " << validity_failures
      << "  similarity: " << similarity_failures << "\n";
  return out.str();
}

std::vector<MoleculeRecord> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open corpus file: " + path);
  std::vector<MoleculeRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw SchemaError(path + ":" + std::to_string(lineno) +
                        ": invalid JSON: " + e.what());
    }
    MoleculeRecord rec;
    try {
      rec.id = row.at("id").get<std::string>();
      rec.selfies = row.at("selfies").get<std::string>();
      rec.description = row.at("description").get<std::string>();
      rec.split = row.value("split", "train");
    } catch (const json::exception& e) {
      throw SchemaError(path + ":" + std::to_string(lineno) +
                        ": missing field: " + e.what());
    }
    records.push_back(std::move(rec));
  }
  return records;
}

PipelineSummary run_pipeline(const std::vector<MoleculeRecord>& corpus,
                             CotTask task, CompletionProvider& provider,
                             const Thresholds& thresholds,
                             const std::string& out_path) {
  PipelineSummary summary;

  // resume support: collect ids already written
  std::set<std::string> seen;
  {
    std::ifstream existing(out_path);
    std::string line;
    while (existing && std::getline(existing, line)) {
      if (line.empty()) continue;
      try {
        seen.insert(json::parse(line).at("id").get<std::string>());
      } catch (const json::exception&) {
        throw SchemaError("resume file " + out_path +
                          " contains a non-conforming line");
      }
    }
  }

  std::ofstream out(out_path, std::ios::app);
  if (!out) throw SchemaError("cannot open output file: " + out_path);

  for (const MoleculeRecord& rec : corpus) {
    ++summary.total;
    if (seen.count(rec.id)) {
      ++summary.skipped_existing;
      continue;
    }
    CotSample sample;
    sample.id = rec.id;
    sample.task = task;
    try {
      sample.prompt = task == CotTask::Caption ? build_caption_prompt(rec)
                                               : build_generation_prompt(rec);
    } catch (const PromptBuildError&) {
      ++summary.prompt_failures;
      continue;
    }
    ++summary.attempted;
    sample.completion = provider.complete(sample.prompt);
    sample = filter_sample(std::move(sample), rec, thresholds);

    if (sample.accepted) {
      ++summary.accepted;
    } else if (!sample.format_ok) {
      ++summary.format_failures;
    } else if (task == CotTask::Generation && !sample.decodable) {
      ++summary.validity_failures;
    } else {
      ++summary.similarity_failures;
    }

    json row = {{"id", sample.id},
                {"task", task == CotTask::Caption ? "caption" : "generation"},
                {"prompt", sample.prompt},
                {"completion", sample.completion},
                {"answer", sample.answer_payload ? *sample.answer_payload
                                                 : std::string()},
                {"scores",
                 {{"format_ok", sample.format_ok},
                  {"decodable", sample.decodable},
                  {"similarity", sample.similarity}}},
                {"accepted", sample.accepted}};
    out << row.dump() << "\n";
    out.flush();  // every prefix of the file stays valid JSONL
    seen.insert(sample.id);
  }
  return summary;
}

}  // namespace moltext
