// Copyright 2026 The sdlm Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.h"
#include "desk_model.h"
#include "sdlm/diagnosis.h"
#include "sdlm/table_model.h"
#include "test_support.h"

namespace sdlm {
namespace {

using nlohmann::json;
using testing::TempDir;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sdlm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    save_table_model(testing::desk_model_spec(8), dir_ / "desk.json");
    std::string prompts;
    for (const auto& p : testing::desk_prompts(8)) prompts += json{{"text", p.text}}.dump() + "\n";
    testing::write_text(dir_ / "prompts.jsonl", prompts);
    testing::write_text(dir_ / "lexicon.json",
                        R"({"toxicity": ["idiot"], "severe toxicity": ["idiot"],
                            "sexually explicit": ["xxx"], "threat": ["kill"],
                            "profanity": ["damn"], "identity attack": ["idiot"]})");
    testing::write_text(dir_ / "config.json", R"({
      "model": {"table": "desk.json"},
      "scorer": {"lexicon": "lexicon.json"},
      "decoding": {"lambda": 10, "strategy": "beam", "beam_width": 3, "max_new_tokens": 5}
    })");
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  TempDir dir_;
};

TEST_F(CliTest, HelpExitsZeroForEverySubcommand) {
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  for (const char* cmd : {"diagnose", "generate", "perplexity", "eval", "select-extremes"}) {
    const Outcome o = run_cli({cmd, "--help"});
    EXPECT_EQ(o.code, 0) << cmd;
    EXPECT_NE(o.out.find("Usage"), std::string::npos) << cmd;
  }
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"generate", "--bogus"}).code, 2);
  EXPECT_EQ(run_cli({"generate", "--config", path("config.json"), "--prompt", "x", "--mode",
                     "medium"})
                .code,
            2);
}

TEST_F(CliTest, UniformPerplexityPrintsTheVocabularySize) {
  testing::write_text(dir_ / "u.json",
                      R"({"vocab": ["a", "b", "c", "d"], "default": [0.25, 0.25, 0.25, 0.25],
                          "rows": {}})");
  testing::write_text(dir_ / "corpus.txt", "a b c d\nd c b a\n");
  const Outcome o = run_cli({"perplexity", "--table", path("u.json"), "--corpus",
                             path("corpus.txt"), "--window", "992", "--no-timestamp"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json report = json::parse(o.out);
  EXPECT_EQ(report.at("perplexity").get<double>(), 4.0);
  EXPECT_EQ(report.at("tokens_scored"), 7);
  EXPECT_FALSE(report.contains("generated_at"));
  EXPECT_TRUE(json::parse(run_cli({"perplexity", "--table", path("u.json"), "--corpus",
                                   path("corpus.txt")})
                              .out)
                  .contains("generated_at"));
}

TEST_F(CliTest, GenerateUsesEvaluationDefaultsAndWritesTraces) {
  const Outcome o =
      run_cli({"generate", "--config", path("config.json"), "--prompt", testing::desk_prompt(3),
               "--lambda", "10", "--strategy", "beam", "--beam-width", "3", "--max-new-tokens",
               "20", "--attributes", "all", "--trace", path("trace.jsonl")});
  ASSERT_EQ(o.code, 0) << o.err;
  const json line = json::parse(o.out);
  EXPECT_EQ(line.at("tokens").size(), 20u);
  EXPECT_EQ(line.at("tokens")[0], "friend");
  std::istringstream traces(testing::read_text(dir_ / "trace.jsonl"));
  std::size_t count = 0;
  for (std::string t; std::getline(traces, t); ++count) {
    const json step = json::parse(t);
    EXPECT_EQ(step.at("per_attribute_sdb").size(), 6u);
    EXPECT_EQ(step.at("step"), count);
  }
  EXPECT_EQ(count, 20u);
}

TEST_F(CliTest, ZeroLambdaReproducesRegularDecoding) {
  const auto debiased_off = run_cli({"generate", "--config", path("config.json"), "--prompts",
                                     path("prompts.jsonl"), "--lambda", "0"});
  const auto plain = run_cli({"generate", "--config", path("config.json"), "--prompts",
                              path("prompts.jsonl"), "--attributes", "none"});
  ASSERT_EQ(debiased_off.code, 0) << debiased_off.err;
  EXPECT_EQ(debiased_off.out, plain.out);
  EXPECT_EQ(std::count(plain.out.begin(), plain.out.end(), '\n'), 8);
}

TEST_F(CliTest, SamplingWithTheSameSeedIsIdentical) {
  std::vector<std::string> args{"generate", "--config", path("config.json"), "--prompts",
                                path("prompts.jsonl"), "--strategy", "sample", "--seed", "17",
                                "--max-new-tokens", "12"};
  const auto a = run_cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, run_cli(args).out);
}

TEST_F(CliTest, EvalReportsOneRowPerLambdaReproducibly) {
  std::vector<std::string> args{"eval", "--config", path("config.json"), "--prompts",
                                path("prompts.jsonl"), "--lambdas", "0,10,50,100",
                                "--no-timestamp", "--table-output", path("table.txt"),
                                "--jobs", "3"};
  const auto a = run_cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  const json doc = json::parse(a.out);
  ASSERT_EQ(doc.at("reports").size(), 4u);
  const double expected[] = {1.0, 0.75, 0.5, 0.25};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(doc["reports"][i]["attributes"]["toxicity"]["probability"].get<double>(),
              expected[i]);
  }
  EXPECT_EQ(a.out, run_cli(args).out);
  EXPECT_NE(testing::read_text(dir_ / "table.txt").find("PPL"), std::string::npos);
}

TEST_F(CliTest, FlagsOverrideTheConfigFile) {
  const auto from_file = run_cli({"generate", "--config", path("config.json"), "--prompt",
                                  testing::desk_prompt(0)});
  EXPECT_EQ(json::parse(from_file.out).at("tokens").size(), 5u);
  const auto overridden = run_cli({"generate", "--config", path("config.json"), "--prompt",
                                   testing::desk_prompt(0), "--max-new-tokens", "2"});
  EXPECT_EQ(json::parse(overridden.out).at("tokens").size(), 2u);
}

TEST_F(CliTest, DiagnoseWritesAReport) {
  const AttributeDescription toxicity = find_attribute(default_registry(), "toxicity");
  TableModelSpec spec{Vocabulary({"Yes", "No"}), {0.5, 0.5}, {}, {}};
  std::string examples;
  for (int i = 0; i < 40; ++i) {
    const std::string text = "sample " + std::to_string(i);
    const double s = (i % 10) / 10.0 + 0.05;
    spec.rows[testing::sdg_key(toxicity, text)] = {s, 1 - s};
    examples += json{{"text", text}, {"scores", {{"toxicity", s}}}}.dump() + "\n";
  }
  save_table_model(spec, dir_ / "diag.json");
  testing::write_text(dir_ / "examples.jsonl", examples);
  testing::write_text(dir_ / "diag_config.json", R"({"model": {"table": "diag.json"}})");
  const Outcome o = run_cli({"diagnose", "--config", path("diag_config.json"), "--examples",
                             path("examples.jsonl"), "--attribute", "toxicity", "--dev-fraction",
                             "0.5", "--output", path("report.json"), "--no-timestamp"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json report = json::parse(testing::read_text(dir_ / "report.json"));
  EXPECT_EQ(report.at("test_accuracy").get<double>(), 1.0);
  EXPECT_NEAR(report.at("pcc").get<double>(), 1.0, 1e-12);
  EXPECT_EQ(report.at("n_dev"), 20);
}

TEST_F(CliTest, DiagnoseErrorsMapToExitCodes) {
  const Outcome missing_attr = run_cli({"diagnose", "--config", path("config.json"), "--examples",
                                        path("prompts.jsonl"), "--attribute", "sarcasm"});
  EXPECT_EQ(missing_attr.code, 2);
  EXPECT_NE(missing_attr.err.find("sarcasm"), std::string::npos);
  const Outcome unreadable = run_cli({"diagnose", "--config", path("config.json"), "--examples",
                                      path("nope.jsonl"), "--attribute", "toxicity"});
  EXPECT_EQ(unreadable.code, 3);
}

TEST_F(CliTest, SelectExtremes) {
  testing::write_text(dir_ / "scored.jsonl",
                      "{\"text\": \"a\", \"scores\": {\"toxicity\": 0.1}}\n"
                      "{\"text\": \"b\", \"scores\": {\"toxicity\": 0.9}}\n"
                      "{\"text\": \"c\", \"scores\": {\"toxicity\": 0.4}}\n");
  const Outcome ok =
      run_cli({"select-extremes", "--input", path("scored.jsonl"), "--attribute", "toxicity",
               "--n", "1"});
  ASSERT_EQ(ok.code, 0) << ok.err;
  EXPECT_EQ(ok.out,
            "{\"label\":true,\"scores\":{\"toxicity\":0.9},\"text\":\"b\"}\n"
            "{\"label\":false,\"scores\":{\"toxicity\":0.1},\"text\":\"a\"}\n");
  EXPECT_EQ(run_cli({"select-extremes", "--input", path("scored.jsonl"), "--attribute",
                     "toxicity", "--n", "2"})
                .code,
            3);
}

TEST_F(CliTest, ConfigProblemsExitTwo) {
  testing::write_text(dir_ / "two_models.json",
                      R"({"model": {"table": "desk.json", "ngram_model": "x.json"}})");
  EXPECT_EQ(run_cli({"generate", "--config", path("two_models.json"), "--prompt", "x"}).code, 2);
  testing::write_text(dir_ / "typo.json", R"({"modle": {"table": "desk.json"}})");
  EXPECT_EQ(run_cli({"generate", "--config", path("typo.json"), "--prompt", "x"}).code, 2);
  EXPECT_EQ(run_cli({"generate", "--table", path("absent.json"), "--prompt", "x"}).code, 2);
  EXPECT_EQ(run_cli({"generate", "--config", path("config.json"), "--prompt", "x",
                     "--attributes", "sarcasm"})
                .code,
            2);
}

TEST_F(CliTest, RemoteScorerOptionsMayLiveInTheirOwnFile) {
  testing::StubServer scorer([](httplib::Server& s) {
    s.Post("/v1/score", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"scores": {"toxicity": 0.7}})", "application/json");
    });
  });
  testing::write_text(dir_ / "scorer.json", json{{"endpoint", scorer.endpoint()}}.dump());
  testing::write_text(dir_ / "remote.json", R"({
    "model": {"table": "desk.json"},
    "scorer": {"remote": "scorer.json"},
    "decoding": {"max_new_tokens": 2}
  })");
  const Outcome o = run_cli({"eval", "--config", path("remote.json"), "--prompts",
                             path("prompts.jsonl"), "--lambdas", "0", "--score-attributes",
                             "toxicity", "--no-timestamp"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(json::parse(o.out)["reports"][0]["attributes"]["toxicity"]["probability"], 1.0);

  testing::write_text(dir_ / "missing.json",
                      R"({"model": {"table": "desk.json"}, "scorer": {"remote": "absent.json"}})");
  EXPECT_EQ(run_cli({"eval", "--config", path("missing.json"), "--prompts", path("prompts.jsonl"),
                     "--lambdas", "0"})
                .code,
            2);
}

TEST_F(CliTest, UnreachableRemoteModelExitsFour) {
  int port;
  {
    testing::StubServer server([](httplib::Server&) {});
    port = server.port();
  }
  const Outcome o = run_cli({"generate", "--remote", "http://127.0.0.1:" + std::to_string(port),
                             "--prompt", "x"});
  EXPECT_EQ(o.code, 4) << o.err;
}

TEST_F(CliTest, NgramCorpusModelCoversTemplateTokens) {
  testing::write_text(dir_ / "corpus.txt", "the cat sat on the mat and the dog sat on the cat\n");
  const Outcome o = run_cli({"generate", "--ngram-corpus", path("corpus.txt"), "--ngram-order",
                             "2", "--prompt", "the cat", "--max-new-tokens", "4"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(json::parse(o.out).at("tokens").size(), 4u);
}

}  // namespace
}  // namespace sdlm
