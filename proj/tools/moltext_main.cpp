#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "moltext/cot_pipeline.hpp"
#include "moltext/eval.hpp"
#include "moltext/grpo.hpp"
#include "moltext/rewards.hpp"

using namespace moltext;
using nlohmann::json;

namespace {

constexpr int kExitSchema = 2;
constexpr int kExitProvider = 3;

CotTask parse_task(const std::string& name) {
  if (name == "caption") return CotTask::Caption;
  if (name == "generation") return CotTask::Generation;
  throw CLI::ValidationError("--task must be caption or generation");
}

void apply_disable(const std::string& list, LanguageMask& lang,
                   StructuralMask& structural) {
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name.empty()) continue;
    if (name == "bleu2") lang.bleu2 = false;
    else if (name == "bleu4") lang.bleu4 = false;
    else if (name == "meteor") lang.meteor = false;
    else if (name == "rouge1") lang.rouge1 = false;
    else if (name == "rouge2") lang.rouge2 = false;
    else if (name == "rougeL") lang.rougeL = false;
    else if (name == "fp") structural.fp = false;
    else if (name == "selfies") structural.selfies = false;
    else if (name == "frag") structural.frag = false;
    else if (name == "fg") structural.fg = false;
    else throw CLI::ValidationError("unknown reward component: " + name);
  }
}

int cmd_eval(const std::string& pred_path, const std::string& ref_path,
             const std::string& task_name, const std::string& csv_path,
             const std::string& md_path) {
  CotTask task = parse_task(task_name);
  std::vector<EvalPair> pairs;
  try {
    pairs = read_eval_pairs(pred_path, ref_path);
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSchema;
  }
  MetricReport report = evaluate(pairs, task);
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    out << report.to_csv();
  }
  std::string markdown = report.to_markdown();
  if (!md_path.empty()) {
    std::ofstream out(md_path);
    out << markdown;
  }
  std::cout << markdown;
  return report.means_consistent() ? 0 : 1;
}

int cmd_reward(const std::string& in_path, const std::string& out_path,
               const std::string& disable) {
  LanguageMask lang;
  StructuralMask structural;
  apply_disable(disable, lang, structural);

  std::ifstream in(in_path);
  if (!in) {
    std::cerr << "error: cannot open " << in_path << "\n";
    return kExitSchema;
  }
  std::ostringstream buffered;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    std::string task;
    std::string response, reference;
    try {
      row = json::parse(line);
      response = row.at("response").get<std::string>();
      reference = row.at("reference").get<std::string>();
      task = row.at("task").get<std::string>();
      if (task != "caption" && task != "generation")
        throw SchemaError("task must be caption or generation");
    } catch (const std::exception& e) {
      std::cerr << "error: " << in_path << ":" << lineno << ": " << e.what()
                << "\n";
      return kExitSchema;
    }
    RewardBreakdown rb = task == "caption"
                             ? r_cap(response, reference, lang)
                             : r_gen(response, reference, structural);
    row["total"] = rb.total;
    row["format_component"] = rb.format_component;
    row["similarity_component"] = rb.similarity_component;
    row["sub_scores"] = rb.sub_scores;
    buffered << row.dump() << "\n";
  }
  if (out_path.empty()) {
    std::cout << buffered.str();
  } else {
    std::ofstream out(out_path);
    out << buffered.str();
  }
  return 0;
}

int cmd_grpo_demo(GrpoConfig cfg, const std::string& task_name,
                  const std::string& out_path) {
  ToyTaskSet set = make_copy_taskset(cfg.temperature);
  RewardKind kind = parse_task(task_name) == CotTask::Caption
                        ? RewardKind::Caption
                        : RewardKind::Generation;
  TrainLog log = train(set.policy, set.tasks, set.end_token, kind, cfg);
  std::string csv = log.to_csv();
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << csv;
  }
  std::cout << csv;
  const EpochStats& first = log.epochs.front();
  const EpochStats& last = log.epochs.back();
  std::cerr << "mean reward " << first.mean_reward << " -> "
            << last.mean_reward << ", format rate " << last.format_rate
            << "\n";
  return 0;
}

int cmd_datagen(const std::string& corpus_path, const std::string& task_name,
                const std::string& out_path, const std::string& provider_url,
                double drop_tag_prob, std::uint64_t seed, double tau_lang,
                double tau_struct) {
  CotTask task = parse_task(task_name);
  Thresholds thresholds;
  thresholds.tau_lang = tau_lang;
  thresholds.tau_struct = tau_struct;

  std::vector<MoleculeRecord> corpus;
  try {
    corpus = read_corpus(corpus_path);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSchema;
  }

  std::unique_ptr<CompletionProvider> provider;
  if (provider_url.empty())
    provider = std::make_unique<MockProvider>(drop_tag_prob, seed);
  else
    provider = std::make_unique<HttpProvider>(provider_url);

  try {
    PipelineSummary summary =
        run_pipeline(corpus, task, *provider, thresholds, out_path);
    std::cout << summary.to_string();
  } catch (const ProviderError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSchema;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"molecule-text training and evaluation toolkit"};
  app.require_subcommand(1);

  // eval
  std::string pred_path, ref_path, task_name = "caption";
  std::string csv_path, md_path;
  auto* eval_cmd =
      app.add_subcommand("eval", "score predictions against references");
  eval_cmd->add_option("--pred", pred_path, "predictions JSONL (id, response)")
      ->required();
  eval_cmd->add_option("--ref", ref_path, "references JSONL (id, reference)")
      ->required();
  eval_cmd->add_option("--task", task_name, "caption | generation");
  eval_cmd->add_option("--csv", csv_path, "per-record CSV output path");
  eval_cmd->add_option("--md", md_path, "markdown report output path");

  // reward
  std::string reward_in, reward_out, disable_list;
  auto* reward_cmd =
      app.add_subcommand("reward", "batch-score responses with the RL reward");
  reward_cmd
      ->add_option("--in", reward_in, "JSONL (response, reference, task)")
      ->required();
  reward_cmd->add_option("--out", reward_out, "output JSONL (default stdout)");
  reward_cmd->add_option("--disable", disable_list,
                         "comma list of reward components to zero out");

  // grpo-demo
  GrpoConfig cfg;
  std::string demo_task = "generation", demo_out;
  auto* demo_cmd =
      app.add_subcommand("grpo-demo", "train the toy policy on the copy task");
  demo_cmd->add_option("--epochs", cfg.epochs, "training epochs");
  demo_cmd->add_option("--steps-per-epoch", cfg.steps_per_epoch, "");
  demo_cmd->add_option("--group-size", cfg.group_size, "rollouts per prompt");
  demo_cmd->add_option("--temperature", cfg.temperature, "sampling temperature");
  demo_cmd->add_option("--clip-epsilon", cfg.clip_epsilon, "");
  demo_cmd->add_option("--kl-beta", cfg.kl_beta, "KL penalty weight");
  demo_cmd->add_option("--lr", cfg.learning_rate, "learning rate");
  demo_cmd->add_option("--seed", cfg.seed, "RNG seed");
  demo_cmd->add_option("--task", demo_task, "caption | generation reward");
  demo_cmd->add_option("--out", demo_out, "learning-curve CSV path");

  // datagen
  std::string corpus_path, datagen_task = "caption", datagen_out;
  std::string provider_url;
  double drop_tag_prob = 0.0, tau_lang = 0.5, tau_struct = 0.5;
  std::uint64_t mock_seed = 1;
  auto* datagen_cmd =
      app.add_subcommand("datagen", "build reasoning-trace training data");
  datagen_cmd->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  datagen_cmd->add_option("--task", datagen_task, "caption | generation");
  datagen_cmd->add_option("--out", datagen_out, "output JSONL (appends)")
      ->required();
  datagen_cmd->add_option("--provider", provider_url,
                          "completion endpoint URL (omit for local mock)");
  datagen_cmd->add_option("--mock-drop-tag-prob", drop_tag_prob,
                          "mock only: probability of dropping answer tags");
  datagen_cmd->add_option("--mock-seed", mock_seed, "mock RNG seed");
  datagen_cmd->add_option("--tau-lang", tau_lang, "caption filter threshold");
  datagen_cmd->add_option("--tau-struct", tau_struct,
                          "generation filter threshold");

  CLI11_PARSE(app, argc, argv);

  try {
    if (eval_cmd->parsed())
      return cmd_eval(pred_path, ref_path, task_name, csv_path, md_path);
    if (reward_cmd->parsed())
      return cmd_reward(reward_in, reward_out, disable_list);
    if (demo_cmd->parsed()) return cmd_grpo_demo(cfg, demo_task, demo_out);
    if (datagen_cmd->parsed())
      return cmd_datagen(corpus_path, datagen_task, datagen_out, provider_url,
                         drop_tag_prob, mock_seed, tau_lang, tau_struct);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
