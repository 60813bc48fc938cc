#include "moltext/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "moltext/hash.hpp"
#include "moltext/rewards.hpp"

namespace moltext {

int ToyPolicy::token_id(const std::string& tok) const {
  for (std::size_t i = 0; i < vocab.size(); ++i)
    if (vocab[i] == tok) return static_cast<int>(i);
  throw UnknownToken("token not in vocabulary: " + tok);
}

std::uint64_t ToyPolicy::context_key(std::span<const int> context) const {
  std::uint64_t h = 1469598103934665603ull;
  int w = context_window;
  for (int k = w; k >= 1; --k) {
    int tok = -1;  // padding before the sequence start
    if (static_cast<int>(context.size()) >= k)
      tok = context[context.size() - k];
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(tok + 2));
  }
  return h;
}

std::vector<double> ToyPolicy::probs(std::uint64_t key) const {
  std::size_t v = vocab.size();
  std::vector<double> p(v, 0.0);
  auto it = params.find(key);
  double max_logit = 0.0;
  if (it != params.end())
    max_logit = *std::max_element(it->second.begin(), it->second.end());
  double z = 0.0;
  for (std::size_t i = 0; i < v; ++i) {
    double logit = it != params.end() ? it->second[i] : 0.0;
    p[i] = std::exp((logit - max_logit) / temperature);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

double ToyPolicy::log_prob(std::uint64_t key, int token) const {
  return std::log(probs(key)[token]);
}

std::vector<double>& ToyPolicy::row(std::uint64_t key) {
  auto it = params.find(key);
  if (it == params.end())
    it = params.emplace(key, std::vector<double>(vocab.size(), 0.0)).first;
  return it->second;
}

namespace {

void accumulate(ParamTable& grad, std::uint64_t key, std::size_t vocab_size,
                const std::vector<double>& p, int token, double scale,
                double temperature) {
  auto it = grad.find(key);
  if (it == grad.end())
    it = grad.emplace(key, std::vector<double>(vocab_size, 0.0)).first;
  for (std::size_t v = 0; v < vocab_size; ++v) {
    double indicator = static_cast<int>(v) == token ? 1.0 : 0.0;
    it->second[v] += scale * (indicator - p[v]) / temperature;
  }
}

}  // namespace

std::pair<double, ParamTable> sft_loss(const ToyPolicy& policy,
                                       const std::vector<int>& prompt,
                                       const std::vector<int>& target) {
  if (target.empty()) throw std::invalid_argument("empty target");
  for (int t : target)
    if (t < 0 || t >= static_cast<int>(policy.vocab.size()))
      throw UnknownToken("target token id out of range");

  std::vector<int> seq = prompt;
  double loss = 0.0;
  ParamTable grad;
  for (int tok : target) {
    std::uint64_t key = policy.context_key(seq);
    std::vector<double> p = policy.probs(key);
    loss -= std::log(p[tok]);
    // d(-log p)/d logit = (p - onehot)/T
    accumulate(grad, key, policy.vocab.size(), p, tok, -1.0,
               policy.temperature);
    seq.push_back(tok);
  }
  return {loss, grad};
}

RolloutGroup sample_group(const ToyPolicy& policy,
                          const std::vector<int>& prompt, int end_token,
                          const GrpoConfig& cfg, std::mt19937_64& rng) {
  RolloutGroup group;
  group.prompt = prompt;
  for (int i = 0; i < cfg.group_size; ++i) {
    std::vector<int> seq = prompt;
    std::vector<int> response;
    std::vector<double> lps;
    for (int t = 0; t < cfg.max_response_len; ++t) {
      std::uint64_t key = policy.context_key(seq);
      std::vector<double> p = policy.probs(key);
      std::discrete_distribution<int> dist(p.begin(), p.end());
      int tok = dist(rng);
      response.push_back(tok);
      lps.push_back(std::log(p[tok]));
      seq.push_back(tok);
      if (tok == end_token) break;
    }
    group.responses.push_back(std::move(response));
    group.old_log_probs.push_back(std::move(lps));
  }
  return group;
}

std::vector<double> advantages(const std::vector<double>& rewards) {
  std::size_t g = rewards.size();
  double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / g;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  double sd = std::sqrt(var / g);  // population std
  std::vector<double> adv(g, 0.0);
  if (sd < 1e-8) return adv;
  for (std::size_t i = 0; i < g; ++i) adv[i] = (rewards[i] - mean) / sd;
  return adv;
}

std::pair<double, ParamTable> grpo_objective(
    const ToyPolicy& policy, const ToyPolicy& ref,
    const std::vector<RolloutGroup>& groups, const GrpoConfig& cfg) {
  double objective = 0.0;
  ParamTable grad;
  std::size_t vsz = policy.vocab.size();
  double ngroups = static_cast<double>(groups.size());

  for (const RolloutGroup& group : groups) {
    double g = static_cast<double>(group.responses.size());
    for (std::size_t i = 0; i < group.responses.size(); ++i) {
      const std::vector<int>& resp = group.responses[i];
      double adv = group.advantages[i];
      double len = static_cast<double>(resp.size());
      double norm = 1.0 / (ngroups * g * len);

      std::vector<int> seq = group.prompt;
      for (std::size_t t = 0; t < resp.size(); ++t) {
        int tok = resp[t];
        std::uint64_t key = policy.context_key(seq);
        std::vector<double> p = policy.probs(key);
        double lp_new = std::log(p[tok]);
        double lp_old = group.old_log_probs[i][t];
        double log_ratio = lp_new - lp_old;
        if (std::abs(log_ratio) > 30.0)
          throw RatioOverflow("stale rollout: |log ratio| > 30");
        double ratio = std::exp(log_ratio);
        double clipped = std::clamp(ratio, 1.0 - cfg.clip_epsilon,
                                    1.0 + cfg.clip_epsilon);
        double unclipped_term = ratio * adv;
        double clipped_term = clipped * adv;
        double term = std::min(unclipped_term, clipped_term);
        objective += norm * term;
        if (unclipped_term <= clipped_term) {
          // d(ratio*adv)/d lp_new = ratio*adv
          accumulate(grad, key, vsz, p, tok, norm * ratio * adv,
                     policy.temperature);
        }

        if (cfg.kl_beta > 0.0) {
          double lp_ref = ref.log_prob(key, tok);
          double delta = lp_ref - lp_new;
          double k3 = std::exp(delta) - delta - 1.0;  // >= 0
          objective -= norm * cfg.kl_beta * k3;
          // d(-beta*k3)/d lp_new = beta*(exp(delta) - 1)
          accumulate(grad, key, vsz, p, tok,
                     norm * cfg.kl_beta * (std::exp(delta) - 1.0),
                     policy.temperature);
        }
        seq.push_back(tok);
      }
    }
  }
  return {objective, grad};
}

std::string render_response(const ToyPolicy& policy,
                            const std::vector<int>& tokens, int end_token) {
  std::string out;
  for (int t : tokens) {
    if (t == end_token) break;
    out += policy.vocab[t];
  }
  return out;
}

std::string TrainLog::to_csv() const {
  std::ostringstream out;
  out << "epoch,mean_reward,format_rate,mean_similarity,objective,kl\n";
  out.setf(std::ios::fixed);
  out.precision(6);
  for (const EpochStats& e : epochs)
    out << e.epoch << "," << e.mean_reward << "," << e.format_rate << ","
        << e.mean_similarity << "," << e.objective << "," << e.kl << "\n";
  return out.str();
}

ToyTaskSet make_copy_taskset(double temperature) {
  ToyTaskSet set;
  set.policy.vocab = {"<answer>", "</answer>", "<sep>", "<eos>", "[C]",
                      "[O]",      "[N]",       "[F]",   "[S]",   "[Cl]",
                      "[=C]"};
  set.policy.context_window = 3;
  set.policy.temperature = temperature;
  set.end_token = set.policy.token_id("<eos>");

  // gold strings chosen without repeated context trigrams, so the
  // windowed table can represent the copy exactly
  const char* golds[] = {"[C][O]", "[N][C][F]", "[S][C][Cl]", "[O][=C][C]"};
  for (const char* gold : golds) {
    ToyTask task;
    std::string g(gold);
    std::size_t pos = 0;
    while (pos < g.size()) {
      std::size_t close = g.find(']', pos);
      task.prompt.push_back(set.policy.token_id(g.substr(pos, close - pos + 1)));
      pos = close + 1;
    }
    task.prompt.push_back(set.policy.token_id("<sep>"));
    task.reference = g;
    set.tasks.push_back(std::move(task));
  }
  return set;
}

namespace {

std::vector<int> gold_response(const ToyPolicy& policy, const ToyTask& task,
                               int end_token) {
  std::vector<int> out;
  out.push_back(policy.token_id("<answer>"));
  // prompt minus the trailing separator is the gold token sequence
  for (std::size_t i = 0; i + 1 < task.prompt.size(); ++i)
    out.push_back(task.prompt[i]);
  out.push_back(policy.token_id("</answer>"));
  out.push_back(end_token);
  return out;
}

double score_response(const std::string& text, const ToyTask& task,
                      RewardKind kind, RewardBreakdown* breakdown) {
  RewardBreakdown rb = kind == RewardKind::Generation
                           ? r_gen(text, task.reference)
                           : r_cap(text, task.reference);
  if (breakdown) *breakdown = rb;
  return rb.total;
}

void ascend(ToyPolicy& policy, const ParamTable& grad, double lr) {
  for (const auto& [key, row] : grad) {
    std::vector<double>& target = policy.row(key);
    for (std::size_t v = 0; v < row.size(); ++v) target[v] += lr * row[v];
  }
}

}  // namespace

TrainLog train(ToyPolicy& policy, const std::vector<ToyTask>& tasks,
               int end_token, RewardKind kind, const GrpoConfig& cfg) {
  TrainLog log;
  std::mt19937_64 rng(cfg.seed);

  // brief SFT warm-up: without it every early group is reward-degenerate
  // (all zeros) and advantages vanish
  for (int step = 0; step < cfg.sft_warmup_steps; ++step) {
    for (const ToyTask& task : tasks) {
      auto [loss, grad] = sft_loss(policy, task.prompt,
                                   gold_response(policy, task, end_token));
      ascend(policy, grad, -cfg.sft_warmup_lr);  // descend on the loss
    }
  }
  ToyPolicy reference = policy;  // post-warm-up snapshot is the KL anchor

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double reward_sum = 0.0, sim_sum = 0.0, obj_sum = 0.0, kl_sum = 0.0;
    int format_hits = 0, samples = 0, steps = 0;

    for (int step = 0; step < cfg.steps_per_epoch; ++step) {
      ToyPolicy old = policy;
      std::vector<RolloutGroup> groups;
      for (const ToyTask& task : tasks) {
        RolloutGroup group = sample_group(old, task.prompt, end_token, cfg,
                                          rng);
        group.rewards.resize(group.responses.size());
        for (std::size_t i = 0; i < group.responses.size(); ++i) {
          std::string text =
              render_response(policy, group.responses[i], end_token);
          RewardBreakdown rb;
          group.rewards[i] = score_response(text, task, kind, &rb);
          reward_sum += rb.total;
          sim_sum += rb.similarity_component;
          format_hits += rb.format_component > 0.0;
          ++samples;
        }
        group.advantages = advantages(group.rewards);
        groups.push_back(std::move(group));
      }
      auto [objective, grad] = grpo_objective(policy, reference, groups, cfg);
      obj_sum += objective;
      ++steps;

      // per-token KL estimate for the log
      double kl = 0.0;
      long kl_tokens = 0;
      for (const auto& group : groups)
        for (std::size_t i = 0; i < group.responses.size(); ++i) {
          std::vector<int> seq = group.prompt;
          for (int tok : group.responses[i]) {
            std::uint64_t key = policy.context_key(seq);
            double delta =
                reference.log_prob(key, tok) - policy.log_prob(key, tok);
            kl += std::exp(delta) - delta - 1.0;
            ++kl_tokens;
            seq.push_back(tok);
          }
        }
      kl_sum += kl_tokens ? kl / kl_tokens : 0.0;

      ascend(policy, grad, cfg.learning_rate);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_reward = samples ? reward_sum / samples : 0.0;
    stats.format_rate = samples ? static_cast<double>(format_hits) / samples
                                : 0.0;
    stats.mean_similarity = samples ? sim_sum / samples : 0.0;
    stats.objective = steps ? obj_sum / steps : 0.0;
    stats.kl = steps ? kl_sum / steps : 0.0;
    log.epochs.push_back(stats);
  }
  return log;
}

}  // namespace moltext
