#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace moltext {

// Logit table indexed by (context hash, token id).
using ParamTable = std::unordered_map<std::uint64_t, std::vector<double>>;

struct UnknownToken : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RatioOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tabular autoregressive policy over a fixed token alphabet with a
// hashed context window. Distribution is softmax(logits / temperature);
// unseen contexts are uniform.
struct ToyPolicy {
  std::vector<std::string> vocab;
  int context_window = 3;
  double temperature = 1.0;
  ParamTable params;

  int token_id(const std::string& tok) const;
  std::uint64_t context_key(std::span<const int> context) const;

  std::vector<double> probs(std::uint64_t key) const;
  double log_prob(std::uint64_t key, int token) const;

  // materializes the logit row for a context (needed before perturbing
  // single coordinates in finite-difference checks)
  std::vector<double>& row(std::uint64_t key);
};

struct GrpoConfig {
  int group_size = 8;
  double temperature = 0.7;
  double clip_epsilon = 0.2;
  double kl_beta = 0.04;
  int batch_size = 256;
  double learning_rate = 8.0;
  int epochs = 15;
  int steps_per_epoch = 24;
  int sft_warmup_steps = 8;
  double sft_warmup_lr = 0.35;
  int max_response_len = 12;
  std::uint64_t seed = 20240817;
};

struct RolloutGroup {
  std::vector<int> prompt;
  std::vector<std::vector<int>> responses;
  std::vector<std::vector<double>> old_log_probs;  // per token, under old
  std::vector<double> rewards;
  std::vector<double> advantages;
};

// loss = -sum_t log p(y_t | x, y_<t); gradient exact for the table.
std::pair<double, ParamTable> sft_loss(const ToyPolicy& policy,
                                       const std::vector<int>& prompt,
                                       const std::vector<int>& target);

// G ancestral samples at the policy temperature, terminated by the end
// token or max length; per-token log-probs recorded under the sampler.
RolloutGroup sample_group(const ToyPolicy& policy,
                          const std::vector<int>& prompt, int end_token,
                          const GrpoConfig& cfg, std::mt19937_64& rng);

// (R_i - mean) / population std; all zeros when std < 1e-8.
std::vector<double> advantages(const std::vector<double>& rewards);

// Clipped surrogate with per-token KL penalty against `ref`; gradient
// exact w.r.t. policy logits. Throws RatioOverflow when |log ratio| > 30.
std::pair<double, ParamTable> grpo_objective(
    const ToyPolicy& policy, const ToyPolicy& ref,
    const std::vector<RolloutGroup>& groups, const GrpoConfig& cfg);

struct EpochStats {
  int epoch = 0;
  double mean_reward = 0.0;
  double format_rate = 0.0;
  double mean_similarity = 0.0;
  double objective = 0.0;
  double kl = 0.0;
};

enum class RewardKind { Caption, Generation };

struct ToyTask {
  std::vector<int> prompt;  // token ids
  std::string reference;    // gold caption or SELFIES text
};

struct TrainLog {
  std::vector<EpochStats> epochs;
  std::string to_csv() const;
};

// Builds the bundled SELFIES-copy task set (vocabulary + tasks) used by
// the demo trainer.
struct ToyTaskSet {
  ToyPolicy policy;  // initialized uniform over the task vocabulary
  std::vector<ToyTask> tasks;
  int end_token = -1;
};
ToyTaskSet make_copy_taskset(double temperature);

// sample -> reward -> advantages -> objective -> ascent, seeded and
// deterministic. An SFT warm-up on the gold responses precedes the RL
// loop (the groups are reward-degenerate without it).
TrainLog train(ToyPolicy& policy, const std::vector<ToyTask>& tasks,
               int end_token, RewardKind kind, const GrpoConfig& cfg);

// Detokenizes a sampled response (stops at end token).
std::string render_response(const ToyPolicy& policy,
                            const std::vector<int>& tokens, int end_token);

}  // namespace moltext
