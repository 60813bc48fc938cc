#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace moltext {

enum class CotTask { Caption, Generation };

struct MoleculeRecord {
  std::string id;
  std::string selfies;
  std::string description;
  std::string split;  // train | valid | test
};

struct CotSample {
  std::string id;
  CotTask task = CotTask::Caption;
  std::string prompt;
  std::string completion;
  std::optional<std::string> answer_payload;
  bool format_ok = false;
  bool decodable = false;   // generation payloads only
  double similarity = 0.0;  // language or structural score
  bool accepted = false;
};

struct Thresholds {
  double tau_lang = 0.5;
  double tau_struct = 0.5;
};

struct PromptBuildError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProviderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic sorted `<|id|>` fragment labels for a decoded molecule.
std::string fragment_labels(const std::string& selfies);

// Prompt templates with SELFIES / description, structural-info sentences,
// fragment labels and the gold answer inside answer tags. Throw
// PromptBuildError when the record cannot be rendered (undecodable
// SELFIES, empty description).
std::string build_caption_prompt(const MoleculeRecord& rec);
std::string build_generation_prompt(const MoleculeRecord& rec);

class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

// Hermetic provider for tests and offline runs. Echo mode extracts the
// gold answer already present in the prompt; drop_tag_probability makes
// it strip the tags at random (seeded) to exercise the format gate.
class MockProvider : public CompletionProvider {
 public:
  explicit MockProvider(double drop_tag_probability = 0.0,
                        std::uint64_t seed = 1);
  std::string complete(const std::string& prompt) override;

 private:
  double drop_tag_probability_;
  std::uint64_t state_;
};

// POSTs {"prompt", "max_tokens", "temperature"} to `endpoint` and expects
// {"text": ...}; bearer token read from MOLTEXT_PROVIDER_TOKEN when set.
// Retries up to 3 times with exponential backoff, then ProviderError.
class HttpProvider : public CompletionProvider {
 public:
  explicit HttpProvider(std::string endpoint, int max_tokens = 1024,
                        double temperature = 0.7);
  std::string complete(const std::string& prompt) override;

 private:
  std::string base_;
  std::string path_;
  int max_tokens_;
  double temperature_;
};

// Scores a provider completion against its record and applies the
// acceptance gates (format; then language similarity for captions, or
// decodability + structural similarity for generation).
CotSample filter_sample(CotSample sample, const MoleculeRecord& rec,
                        const Thresholds& thresholds = {});

struct PipelineSummary {
  int total = 0;             // records seen
  int skipped_existing = 0;  // already present in the output (resume)
  int attempted = 0;
  int accepted = 0;
  int format_failures = 0;
  int validity_failures = 0;    // generation payload failed to decode
  int similarity_failures = 0;  // below threshold
  int prompt_failures = 0;      // record could not be rendered

  double acceptance_rate() const {
    return attempted ? static_cast<double>(accepted) / attempted : 0.0;
  }
  std::string to_string() const;
};

// JSONL corpus loader: {"id","selfies","description","split"}.
std::vector<MoleculeRecord> read_corpus(const std::string& path);

// Streams records through prompt -> provider -> filter, appending every
// scored sample (accepted or not) to `out_path` as JSONL. Rerunning with
// the same output file resumes: ids already present are skipped.
PipelineSummary run_pipeline(const std::vector<MoleculeRecord>& corpus,
                             CotTask task, CompletionProvider& provider,
                             const Thresholds& thresholds,
                             const std::string& out_path);

}  // namespace moltext
