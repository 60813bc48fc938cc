#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "moltext/cot_pipeline.hpp"
#include "moltext/rewards.hpp"

using namespace moltext;
using nlohmann::json;

namespace {

MoleculeRecord disulfide_record() {
  MoleculeRecord rec;
  rec.id = "mol-0001";
  rec.selfies = "[O][=C][Branch1][C][O-1][C][C][S][S][C][Ring1][Branch1]";
  rec.description =
      "The molecule is a monocarboxylic acid anion and a member of "
      "dithiolanes. It is a conjugate base of an asparagusic acid.";
  rec.split = "train";
  return rec;
}

MoleculeRecord aldehyde_record() {
  MoleculeRecord rec;
  rec.id = "mol-0002";
  rec.selfies = "[O][=C][C][=C][C][=C][S][Ring1][Branch1]";
  rec.description =
      "The molecule is an aldehyde substituted by a formyl group. It is a "
      "member of thiophenes and an aldehyde";
  rec.split = "train";
  return rec;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = std::string("/tmp/moltext_test_") + name;
    std::remove(path.c_str());
  }
  ~TempFile() { std::remove(path.c_str()); }
};

int count_lines(const std::string& path) {
  std::ifstream in(path);
  int n = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  return n;
}

}  // namespace

TEST_CASE("caption prompt carries the annotated structural facts") {
  std::string prompt = build_caption_prompt(disulfide_record());
  CHECK(prompt.find("The molecule has 1 ring(s), including 0 aromatic "
                    "ring(s).") != std::string::npos);
  CHECK(prompt.find("approximately 149.20 g/mol") != std::string::npos);
  CHECK(prompt.find(disulfide_record().selfies) != std::string::npos);
  CHECK(prompt.find("<answer> " + disulfide_record().description +
                    " </answer>") != std::string::npos);
  CHECK(prompt.find("<|") != std::string::npos);
  // byte-stable rendering
  CHECK(prompt == build_caption_prompt(disulfide_record()));
}

TEST_CASE("generation prompt numbers the description and embeds the gold "
          "selfies") {
  MoleculeRecord rec = aldehyde_record();
  std::string prompt = build_generation_prompt(rec);
  CHECK(prompt.find("approximately 112.15 g/mol") != std::string::npos);
  CHECK(prompt.find("1 ring(s), including 1 aromatic ring(s)") !=
        std::string::npos);
  CHECK(prompt.find("1. The molecule is an aldehyde") != std::string::npos);
  CHECK(prompt.find("2. It is a member of thiophenes") != std::string::npos);
  CHECK(prompt.find("<answer> " + rec.selfies + " </answer>") !=
        std::string::npos);
  CHECK(prompt == build_generation_prompt(rec));
}

TEST_CASE("prompt building rejects broken records") {
  MoleculeRecord rec = disulfide_record();
  rec.description = "";
  CHECK_THROWS_AS(build_caption_prompt(rec), PromptBuildError);
  CHECK_THROWS_AS(build_generation_prompt(rec), PromptBuildError);

  MoleculeRecord bad = disulfide_record();
  bad.selfies = "[Qq]";
  CHECK_THROWS_AS(build_generation_prompt(bad), PromptBuildError);
}

TEST_CASE("echo mock passes the filters on both tasks") {
  MockProvider mock;
  for (CotTask task : {CotTask::Caption, CotTask::Generation}) {
    MoleculeRecord rec = disulfide_record();
    CotSample sample;
    sample.id = rec.id;
    sample.task = task;
    sample.prompt = task == CotTask::Caption ? build_caption_prompt(rec)
                                             : build_generation_prompt(rec);
    sample.completion = mock.complete(sample.prompt);
    sample = filter_sample(std::move(sample), rec);
    CHECK(sample.format_ok);
    CHECK(sample.accepted);
    CHECK(sample.similarity >= 0.5);
    if (task == CotTask::Generation) CHECK(sample.decodable);
  }
}

TEST_CASE("filters reject missing tags and undecodable payloads") {
  MoleculeRecord rec = aldehyde_record();
  CotSample untagged;
  untagged.task = CotTask::Caption;
  untagged.completion = "no tags in sight";
  untagged = filter_sample(std::move(untagged), rec);
  CHECK_FALSE(untagged.format_ok);
  CHECK_FALSE(untagged.accepted);

  CotSample invalid;
  invalid.task = CotTask::Generation;
  invalid.completion = "<answer>this is not selfies</answer>";
  Thresholds lax;
  lax.tau_struct = 0.0;
  invalid = filter_sample(std::move(invalid), rec, lax);
  CHECK(invalid.format_ok);
  CHECK_FALSE(invalid.decodable);
  CHECK_FALSE(invalid.accepted);  // validity gate ignores tau

  // accepted samples re-pass their own filter (idempotence)
  MockProvider mock;
  CotSample good;
  good.task = CotTask::Generation;
  good.prompt = build_generation_prompt(rec);
  good.completion = mock.complete(good.prompt);
  good = filter_sample(std::move(good), rec);
  CHECK(good.accepted);
  CotSample again = filter_sample(good, rec);
  CHECK(again.accepted);
  CHECK(again.similarity == doctest::Approx(good.similarity));
}

TEST_CASE("pipeline with an echo mock accepts everything") {
  TempFile out("pipeline_echo.jsonl");
  std::vector<MoleculeRecord> corpus = {disulfide_record(), aldehyde_record()};
  MockProvider mock;
  PipelineSummary summary =
      run_pipeline(corpus, CotTask::Generation, mock, {}, out.path);
  CHECK(summary.total == 2);
  CHECK(summary.attempted == 2);
  CHECK(summary.accepted == 2);
  CHECK(summary.acceptance_rate() == doctest::Approx(1.0));
  CHECK(count_lines(out.path) == 2);

  // every line parses and accepted records carry a payload
  std::ifstream in(out.path);
  std::string line;
  while (std::getline(in, line)) {
    json row = json::parse(line);
    CHECK(row.at("accepted").get<bool>());
    CHECK(!row.at("answer").get<std::string>().empty());
  }
}

TEST_CASE("tag-dropping mock is rejected at the format gate") {
  TempFile out("pipeline_drop.jsonl");
  std::vector<MoleculeRecord> corpus;
  for (int i = 0; i < 60; ++i) {
    MoleculeRecord rec = disulfide_record();
    rec.id = "mol-" + std::to_string(i);
    corpus.push_back(rec);
  }
  MockProvider mock(/*drop_tag_probability=*/0.5, /*seed=*/7);
  PipelineSummary summary =
      run_pipeline(corpus, CotTask::Caption, mock, {}, out.path);
  CHECK(summary.attempted == 60);
  CHECK(summary.accepted + summary.format_failures == 60);
  // binomial(60, 0.5): 3 sigma is about 11.6
  CHECK(summary.format_failures > 15);
  CHECK(summary.format_failures < 45);
}

TEST_CASE("pipeline resumes without duplicating ids") {
  TempFile out("pipeline_resume.jsonl");
  std::vector<MoleculeRecord> first = {disulfide_record()};
  std::vector<MoleculeRecord> both = {disulfide_record(), aldehyde_record()};
  MockProvider mock;
  run_pipeline(first, CotTask::Caption, mock, {}, out.path);
  CHECK(count_lines(out.path) == 1);

  PipelineSummary resumed =
      run_pipeline(both, CotTask::Caption, mock, {}, out.path);
  CHECK(resumed.skipped_existing == 1);
  CHECK(resumed.attempted == 1);
  CHECK(count_lines(out.path) == 2);
}

TEST_CASE("empty corpus gives an empty dataset and zero counts") {
  TempFile out("pipeline_empty.jsonl");
  MockProvider mock;
  PipelineSummary summary =
      run_pipeline({}, CotTask::Caption, mock, {}, out.path);
  CHECK(summary.total == 0);
  CHECK(summary.attempted == 0);
  CHECK(summary.acceptance_rate() == 0.0);
  CHECK(count_lines(out.path) == 0);
  CHECK(summary.to_string().find("accepted: 0") != std::string::npos);
}

TEST_CASE("corpus reader validates schema") {
  TempFile good("corpus_good.jsonl");
  {
    std::ofstream f(good.path);
    f << R"({"id":"a","selfies":"[C]","description":"methane","split":"test"})"
      << "\n";
    f << "\n";  // blank lines are tolerated
    f << R"({"id":"b","selfies":"[C][O]","description":"methanol"})" << "\n";
  }
  auto records = read_corpus(good.path);
  REQUIRE(records.size() == 2);
  CHECK(records[0].id == "a");
  CHECK(records[1].split == "train");  // default

  TempFile bad("corpus_bad.jsonl");
  {
    std::ofstream f(bad.path);
    f << R"({"id":"a","selfies":"[C]"})" << "\n";  // missing description
  }
  CHECK_THROWS_AS(read_corpus(bad.path), SchemaError);

  TempFile garbled("corpus_garbled.jsonl");
  {
    std::ofstream f(garbled.path);
    f << "not json\n";
  }
  CHECK_THROWS_AS(read_corpus(garbled.path), SchemaError);
  CHECK_THROWS_AS(read_corpus("/tmp/moltext_no_such_file.jsonl"), SchemaError);
}

TEST_CASE("unreachable http provider raises a provider error") {
  HttpProvider provider("http://127.0.0.1:1/complete");
  CHECK_THROWS_AS(provider.complete("ping"), ProviderError);
}
