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

#include <cmath>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracle.h"
#include "sdlm/debias.h"
#include "sdlm/error.h"
#include "sdlm/table_model.h"
#include "test_support.h"

namespace sdlm {
namespace {

using testing::sdb_key;

const AttributeDescription kX{"x", "x", "kx"};
const AttributeDescription kY{"y", "y", "ky"};
const AttributeDescription kZ{"z", "z", "kz"};

DecodingConfig config_with(double lambda, ScalingMode mode = ScalingMode::kSoft) {
  DecodingConfig c;
  c.lambda = lambda;
  c.mode = mode;
  return c;
}

// Table model over {a, b, ...} with one row for the plain context "ctx"
// and one per attribute for its self-debiasing context.
TableModel step_model(const std::vector<double>& p, const std::vector<std::vector<double>>& sdb,
                      const std::vector<AttributeDescription>& attrs) {
  std::vector<std::string> vocab;
  for (std::size_t i = 0; i < p.size(); ++i) vocab.push_back("t" + std::to_string(i));
  TableModelSpec spec{Vocabulary(vocab), std::vector<double>(p.size(), 1.0 / p.size()), {}, {}};
  spec.rows["ctx"] = p;
  for (std::size_t i = 0; i < sdb.size(); ++i) spec.rows[sdb_key(attrs[i], "ctx")] = sdb[i];
  return TableModel(spec);
}

const TokenSequence kCtx{"ctx"};

TEST(Delta, ElementwiseDifference) {
  const std::vector<double> a{0.6, 0.4}, b{0.8, 0.2};
  const auto d = delta(a, b);
  EXPECT_NEAR(d[0], -0.2, 1e-15);
  EXPECT_NEAR(d[1], 0.2, 1e-15);
  EXPECT_EQ(delta(a, a), (std::vector<double>{0.0, 0.0}));
  const std::vector<double> e1{1, 0}, e2{0, 1};
  EXPECT_EQ(delta(e1, e2), (std::vector<double>{1, -1}));
  const std::vector<double> three{0.2, 0.3, 0.5};
  EXPECT_THROW(delta(a, three), InputError);
}

TEST(Alpha, SoftAndHard) {
  EXPECT_EQ(alpha(0.3, 7.0, ScalingMode::kSoft), 1.0);
  EXPECT_EQ(alpha(0.0, 50.0, ScalingMode::kSoft), 1.0);
  EXPECT_NEAR(alpha(-0.05, 10.0, ScalingMode::kSoft), 0.6065306597126334, 1e-15);
  EXPECT_EQ(alpha(-0.05, 0.0, ScalingMode::kSoft), 1.0);
  EXPECT_EQ(alpha(0.0, 10.0, ScalingMode::kHard), 1.0);
  EXPECT_EQ(alpha(-1e-9, 10.0, ScalingMode::kHard), 0.0);
}

TEST(Debias, TwoTokenWorkedExample) {
  TableModel m = step_model({0.6, 0.4}, {{0.8, 0.2}}, {kX});
  const std::vector<AttributeDescription> ys{kX};
  const DebiasStepTrace t = debiased_distribution(m, kCtx, ys, config_with(10));
  EXPECT_NEAR(t.delta_min[0], -0.2, 1e-15);
  EXPECT_NEAR(t.delta_min[1], 0.2, 1e-15);
  EXPECT_NEAR(t.scale[0], 0.1353352832366127, 1e-15);
  EXPECT_EQ(t.scale[1], 1.0);
  EXPECT_NEAR(t.debiased[0], 0.16874682568157595, 1e-12);
  EXPECT_NEAR(t.debiased[1], 0.831253174318424, 1e-12);
}

TEST(Debias, ZeroLambdaIsTheIdentity) {
  TableModel m = step_model({0.6, 0.4}, {{0.8, 0.2}}, {kX});
  const std::vector<AttributeDescription> ys{kX};
  const auto t = debiased_distribution(m, kCtx, ys, config_with(0));
  EXPECT_EQ(t.debiased, t.original);
}

TEST(Debias, UniformPenaltyCancels) {
  TableModel m = step_model({0.6, 0.4}, {{0.7, 0.3}, {0.5, 0.5}}, {kX, kY});
  const std::vector<AttributeDescription> ys{kX, kY};
  const auto t = debiased_distribution(m, kCtx, ys, config_with(10));
  EXPECT_NEAR(t.delta_min[0], -0.1, 1e-15);
  EXPECT_NEAR(t.delta_min[1], -0.1, 1e-15);
  EXPECT_EQ(t.debiased.vector(), (std::vector<double>{0.6, 0.4}));
}

TEST(Debias, EmptyAttributeListIsAnInputError) {
  TableModel m = step_model({0.6, 0.4}, {}, {});
  EXPECT_THROW(debiased_distribution(m, kCtx, {}, config_with(10)), InputError);
}

TEST(Debias, HardModeWithAndWithoutFloor) {
  TableModel m = step_model({0.5, 0.3, 0.2}, {{0.7, 0.1, 0.2}}, {kX});
  const std::vector<AttributeDescription> ys{kX};
  auto c = config_with(10, ScalingMode::kHard);
  const auto floored = debiased_distribution(m, kCtx, ys, c);
  EXPECT_EQ(floored.scale, (std::vector<double>{0.01, 1.0, 1.0}));
  EXPECT_NEAR(floored.debiased[0], 0.005 / 0.505, 1e-15);
  c.apply_floor_in_generation = false;
  const auto bare = debiased_distribution(m, kCtx, ys, c);
  EXPECT_EQ(bare.scale, (std::vector<double>{0.0, 1.0, 1.0}));
  EXPECT_NEAR(bare.debiased[1], 0.6, 1e-15);
}

TEST(Debias, AllTokensZeroedFallsBackToTheOriginal) {
  TableModel m = step_model({0.5, 0.5}, {{1.0, 0.0}, {0.0, 1.0}}, {kX, kY});
  const std::vector<AttributeDescription> ys{kX, kY};
  auto c = config_with(10, ScalingMode::kHard);
  c.apply_floor_in_generation = false;
  EXPECT_EQ(debiased_distribution(m, kCtx, ys, c).debiased.vector(),
            (std::vector<double>{0.5, 0.5}));
}

TEST(DecodingConfig, Validation) {
  DecodingConfig c;
  EXPECT_NO_THROW(c.validate());
  c.lambda = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.floor_epsilon = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.strategy = BeamStrategy{0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.strategy = SampleStrategy{1, 0.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.max_new_tokens = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

struct RandomCase {
  std::vector<double> p;
  std::vector<std::vector<double>> sdb;
  std::vector<AttributeDescription> attrs;
};

RandomCase random_case(std::mt19937_64& rng) {
  const std::size_t n = 2 + rng() % 7;
  const std::size_t ny = 1 + rng() % 3;
  const std::vector<AttributeDescription> all{kX, kY, kZ};
  RandomCase c;
  c.p = testing::random_row(rng, n, true);
  for (std::size_t y = 0; y < ny; ++y) {
    c.sdb.push_back(testing::random_row(rng, n, true));
    c.attrs.push_back(all[y]);
  }
  return c;
}

TEST(DebiasProperties, MatchesTheOracle) {
  std::mt19937_64 rng(101);
  const double lambdas[] = {0, 1, 10, 50, 100};
  for (int trial = 0; trial < 300; ++trial) {
    const RandomCase rc = random_case(rng);
    TableModel m = step_model(rc.p, rc.sdb, rc.attrs);
    for (bool hard : {false, true}) {
      for (bool floor : {false, true}) {
        auto c = config_with(lambdas[trial % 5], hard ? ScalingMode::kHard : ScalingMode::kSoft);
        c.apply_floor_in_generation = floor;
        const auto t = debiased_distribution(m, kCtx, rc.attrs, c);
        const auto o = oracle::debias(rc.p, rc.sdb, c.lambda, hard, floor);
        for (std::size_t w = 0; w < rc.p.size(); ++w) {
          EXPECT_NEAR(t.debiased[w], o.debiased[w], 1e-12);
          EXPECT_EQ(t.delta_min[w], o.delta_min[w]);
        }
      }
    }
  }
}

TEST(DebiasProperties, NormalizedFlooredAndMinimallyInvasive) {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 300; ++trial) {
    const RandomCase rc = random_case(rng);
    TableModel m = step_model(rc.p, rc.sdb, rc.attrs);
    const auto t = debiased_distribution(m, kCtx, rc.attrs, config_with(1.0 * (trial % 101)));
    double sum = 0.0;
    for (std::size_t w = 0; w < rc.p.size(); ++w) {
      sum += t.debiased[w];
      EXPECT_GE(t.debiased[w], 0.01 * rc.p[w] * (1 - 1e-12));
      if (t.delta_min[w] >= 0) {
        EXPECT_EQ(t.scale[w] * rc.p[w], rc.p[w]);
      }
      EXPECT_GE(t.scale[w], 0.01);
      EXPECT_LE(t.scale[w], 1.0);
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(DebiasProperties, IdentityWhenPrimedEqualsPlain) {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    RandomCase rc = random_case(rng);
    for (auto& row : rc.sdb) row = rc.p;
    TableModel m = step_model(rc.p, rc.sdb, rc.attrs);
    const auto t = debiased_distribution(m, kCtx, rc.attrs, config_with(100));
    for (std::size_t w = 0; w < rc.p.size(); ++w) EXPECT_NEAR(t.debiased[w], rc.p[w], 1e-12);
  }
}

TEST(DebiasProperties, MonotoneInLambda) {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 60; ++trial) {
    const RandomCase rc = random_case(rng);
    TableModel m = step_model(rc.p, rc.sdb, rc.attrs);
    DebiasStepTrace prev = debiased_distribution(m, kCtx, rc.attrs, config_with(0));
    for (int lambda = 1; lambda <= 100; ++lambda) {
      const auto t = debiased_distribution(m, kCtx, rc.attrs, config_with(lambda));
      for (std::size_t w = 0; w < rc.p.size(); ++w) {
        if (t.delta_min[w] >= 0) {
          EXPECT_GE(t.debiased[w], prev.debiased[w] * (1 - 1e-12));
        } else {
          EXPECT_LE(t.scale[w] * rc.p[w], prev.scale[w] * rc.p[w]);
        }
      }
      prev = t;
    }
  }
}

TEST(DebiasProperties, MoreAttributesNeverRaiseDeltaMin) {
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 200; ++trial) {
    RandomCase rc = random_case(rng);
    while (rc.attrs.size() < 3) {
      rc.sdb.push_back(testing::random_row(rng, rc.p.size(), true));
      rc.attrs.push_back(std::vector<AttributeDescription>{kX, kY, kZ}[rc.attrs.size()]);
    }
    TableModel m = step_model(rc.p, rc.sdb, rc.attrs);
    const auto full = debiased_distribution(m, kCtx, rc.attrs, config_with(10));
    for (unsigned mask = 1; mask < 7; ++mask) {
      std::vector<AttributeDescription> subset;
      for (unsigned i = 0; i < 3; ++i) {
        if (mask & (1u << i)) subset.push_back(rc.attrs[i]);
      }
      const auto part = debiased_distribution(m, kCtx, subset, config_with(10));
      for (std::size_t w = 0; w < rc.p.size(); ++w) EXPECT_LE(full.delta_min[w], part.delta_min[w]);
    }
  }
}

// Prompt "two guys start a" over {fight, chat}.
TableModel fight_model() {
  const AttributeDescription threat{"threat", "a threat", "threat"};
  TableModelSpec spec{Vocabulary({"fight", "chat"}), {0.5, 0.5}, {}, {}};
  spec.rows["two guys start a"] = {0.7, 0.3};
  spec.rows[sdb_key(threat, "two guys start a")] = {0.95, 0.05};
  return TableModel(spec);
}

TEST(Generate, DebiasingFlipsTheGreedyChoice) {
  TableModel m = fight_model();
  const std::vector<AttributeDescription> ys{{"threat", "a threat", "threat"}};
  auto c = config_with(10);
  c.strategy = GreedyStrategy{};
  c.max_new_tokens = 1;
  GenerationOptions options;
  options.record_traces = true;
  const auto r = generate(m, "two guys start a", ys, c, options);
  ASSERT_EQ(r.continuation, (TokenSequence{"chat"}));
  EXPECT_NEAR(r.per_step_traces[0].scale[0], 0.0820849986238988, 1e-15);
  EXPECT_NEAR(r.per_step_traces[0].scale[0] * 0.7, 0.05745949903672916, 1e-15);
  c.lambda = 0;
  EXPECT_EQ(generate(m, "two guys start a", ys, c).continuation, (TokenSequence{"fight"}));
}

TEST(Generate, TokensAreAppendedToEveryContext) {
  // After "go", both contexts must end in "go" for the second step.
  TableModelSpec spec{Vocabulary({"go", "stop"}), {0.5, 0.5}, {}, {}};
  spec.rows["p"] = {0.9, 0.1};
  spec.rows["p go"] = {0.2, 0.8};
  spec.rows[sdb_key(kX, "p")] = {0.9, 0.1};
  spec.rows[sdb_key(kX, "p go")] = {0.1, 0.9};
  TableModel m(spec);
  const std::vector<AttributeDescription> ys{kX};
  auto c = config_with(10);
  c.strategy = GreedyStrategy{};
  c.max_new_tokens = 2;
  GenerationOptions options;
  options.record_traces = true;
  const auto r = generate(m, "p", ys, c, options);
  ASSERT_EQ(r.continuation, (TokenSequence{"go", "stop"}));
  EXPECT_EQ(r.per_step_traces[1].original.vector(), (std::vector<double>{0.2, 0.8}));
  EXPECT_EQ(r.per_step_traces[1].per_attribute_sdb[0].vector(), (std::vector<double>{0.1, 0.9}));
  EXPECT_NEAR(r.per_step_traces[1].delta_min[0], 0.1, 1e-15);
}

TableModel random_sequence_model(std::mt19937_64& rng, std::size_t n_vocab,
                                 const std::vector<AttributeDescription>& attrs) {
  std::vector<std::string> vocab;
  for (std::size_t i = 0; i < n_vocab; ++i) vocab.push_back("v" + std::to_string(i));
  TableModelSpec spec{Vocabulary(vocab), testing::random_row(rng, n_vocab, false), {}, {}};
  // Rows for every one-token suffix, plain and primed.
  for (const auto& v : vocab) spec.rows[v] = testing::random_row(rng, n_vocab, false);
  spec.rows["p"] = testing::random_row(rng, n_vocab, false);
  for (const auto& a : attrs) {
    for (const auto& v : vocab) {
      spec.rows[join_tokens(sdb_prefix_tokens(sdb_template(), a)) + " " + v] =
          testing::random_row(rng, n_vocab, false);
    }
  }
  return TableModel(spec);
}

TEST(Generate, BeamOfOneEqualsGreedy) {
  std::mt19937_64 rng(606);
  const std::vector<AttributeDescription> ys{kX, kY};
  for (int trial = 0; trial < 40; ++trial) {
    TableModel m = random_sequence_model(rng, 2 + rng() % 5, ys);
    auto greedy = config_with(trial % 2 ? 10 : 0);
    greedy.strategy = GreedyStrategy{};
    greedy.max_new_tokens = 6;
    auto beam = greedy;
    beam.strategy = BeamStrategy{1};
    const auto a = generate(m, "p", ys, greedy);
    const auto b = generate(m, "p", ys, beam);
    EXPECT_EQ(a.continuation, b.continuation);
    EXPECT_NEAR(a.total_logprob, b.total_logprob, 1e-12);
  }
}

TEST(Generate, TotalLogprobSumsTheRecordedTraces) {
  std::mt19937_64 rng(707);
  const std::vector<AttributeDescription> ys{kX};
  TableModel m = random_sequence_model(rng, 5, ys);
  for (DecodingStrategy s : {DecodingStrategy{GreedyStrategy{}}, DecodingStrategy{BeamStrategy{3}},
                             DecodingStrategy{SampleStrategy{4, 0.7}}}) {
    auto c = config_with(10);
    c.strategy = s;
    c.max_new_tokens = 7;
    GenerationOptions options;
    options.record_traces = true;
    const auto r = generate(m, "p", ys, c, options);
    ASSERT_EQ(r.continuation.size(), 7u);
    ASSERT_EQ(r.per_step_traces.size(), 7u);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.continuation.size(); ++i) {
      sum += std::log(r.per_step_traces[i].debiased[m.vocabulary().id(r.continuation[i])]);
    }
    EXPECT_NEAR(r.total_logprob, sum, 1e-12) << strategy_name(s);
  }
}

TEST(Generate, SamplingIsSeedDeterministic) {
  std::mt19937_64 rng(808);
  const std::vector<AttributeDescription> ys{kX};
  TableModel m = random_sequence_model(rng, 6, ys);
  auto c = config_with(10);
  c.max_new_tokens = 20;
  c.strategy = SampleStrategy{42, 1.0};
  const auto a = generate(m, "p", ys, c);
  EXPECT_EQ(a.continuation, generate(m, "p", ys, c).continuation);
  bool differs = false;
  for (std::uint64_t seed = 0; seed < 5 && !differs; ++seed) {
    c.strategy = SampleStrategy{seed, 1.0};
    differs = generate(m, "p", ys, c).continuation != a.continuation;
  }
  EXPECT_TRUE(differs);
}

TEST(Generate, StopTokenEndsGeneration) {
  TableModelSpec spec{Vocabulary({"w", "."}), {0.4, 0.6}, {{"p", {0.9, 0.1}}}, {}};
  TableModel m(spec);
  for (DecodingStrategy s :
       {DecodingStrategy{GreedyStrategy{}}, DecodingStrategy{BeamStrategy{2}}}) {
    auto c = config_with(0);
    c.strategy = s;
    c.stop_token = ".";
    const auto r = generate(m, "p", {}, c);
    EXPECT_EQ(r.continuation, (TokenSequence{"w", "."})) << strategy_name(s);
  }
}

TEST(Generate, WideBeamSaturates) {
  TableModelSpec spec{Vocabulary({"a", "b"}), {0.5, 0.5}, {{"a", {0.9, 0.1}}}, {}};
  TableModel m(spec);
  auto c = config_with(0);
  c.strategy = BeamStrategy{50};
  c.max_new_tokens = 3;
  const auto r = generate(m, "a", {}, c);
  EXPECT_EQ(r.continuation, (TokenSequence{"a", "a", "a"}));
  EXPECT_NEAR(r.total_logprob, 3 * std::log(0.9), 1e-12);
}

// Beam search does not dominate greedy in general: here the greedy path
// a a a (0.4 * 0.34 * 1) is pruned at step two by b a and b b (0.15 each),
// whose continuations are uniform.
TEST(Generate, BeamCanScoreBelowGreedy) {
  const std::vector<double> uniform(3, 1.0 / 3.0);
  TableModelSpec spec{Vocabulary({"a", "b", "c"}), uniform, {}, {}};
  spec.rows["P"] = {0.4, 0.3, 0.3};
  spec.rows["P a"] = {0.34, 0.33, 0.33};
  spec.rows["P b"] = {0.5, 0.5, 0.0};
  spec.rows["a a"] = {1.0, 0.0, 0.0};
  TableModel m(spec);
  auto c = config_with(0);
  c.max_new_tokens = 3;
  c.strategy = GreedyStrategy{};
  const auto greedy = generate(m, "P", {}, c);
  c.strategy = BeamStrategy{2};
  const auto beam = generate(m, "P", {}, c);
  EXPECT_EQ(greedy.continuation, (TokenSequence{"a", "a", "a"}));
  EXPECT_NEAR(greedy.total_logprob, std::log(0.136), 1e-12);
  EXPECT_NEAR(beam.total_logprob, std::log(0.05), 1e-12);
  EXPECT_LT(beam.total_logprob, greedy.total_logprob);
}

class RecordingModel final : public LanguageModel {
 public:
  RecordingModel(const LanguageModel& inner, std::size_t limit) : inner_(inner), limit_(limit) {}
  const Vocabulary& vocabulary() const override { return inner_.vocabulary(); }
  NextTokenDistribution next_token_distribution(std::span<const std::string> ctx) const override {
    std::lock_guard lock(mu_);
    seen.emplace_back(ctx.begin(), ctx.end());
    return inner_.next_token_distribution(ctx);
  }
  std::optional<std::size_t> context_limit() const override { return limit_; }
  mutable std::vector<TokenSequence> seen;

 private:
  const LanguageModel& inner_;
  std::size_t limit_;
  mutable std::mutex mu_;
};

TEST(SelfDebiaser, TruncatesTheInputNeverThePrefix) {
  TableModelSpec spec{Vocabulary({"a", "b"}), {0.5, 0.5}, {}, {}};
  TableModel inner(spec);
  RecordingModel m(inner, 8);
  const std::vector<AttributeDescription> ys{kX};
  debiased_distribution(m, tokenize("p1 p2 p3 p4 p5 p6 p7 p8 p9"), ys, config_with(10));
  ASSERT_EQ(m.seen.size(), 2u);
  EXPECT_EQ(m.seen[0], tokenize("p2 p3 p4 p5 p6 p7 p8 p9"));
  EXPECT_EQ(m.seen[1], tokenize("The following text contains x: p7 p8 p9"));

  RecordingModel tiny(inner, 5);
  EXPECT_THROW(debiased_distribution(tiny, kCtx, ys, config_with(10)), ConfigError);
}

TEST(Perplexity, UniformModelGivesVocabularySize) {
  TableModelSpec spec{Vocabulary({"a", "b", "c", "d"}), {0.25, 0.25, 0.25, 0.25}, {}, {}};
  TableModel m(spec);
  const auto corpus = tokenize("a b c d d c b a a c");
  const std::vector<AttributeDescription> ys{kX, kY};
  for (double lambda : {0.0, 10.0, 100.0}) {
    const auto r = perplexity(m, corpus, ys, config_with(lambda), 4);
    EXPECT_NEAR(r.perplexity, 4.0, 1e-12);
  }
  EXPECT_EQ(perplexity(m, corpus, {}, config_with(10), 992).perplexity, 4.0);
}

TEST(Perplexity, ConstantHalfGivesTwo) {
  TableModelSpec spec{Vocabulary({"a", "b"}), {0.5, 0.5}, {}, {}};
  TableModel m(spec);
  EXPECT_NEAR(perplexity(m, tokenize("a b b a b"), {}, config_with(10), 992).perplexity, 2.0,
              1e-15);
}

TEST(Perplexity, ThreeTokenHandExample) {
  TableModelSpec spec{Vocabulary({"a", "b"}), {0.5, 0.5}, {}, {}};
  spec.rows["a"] = {0.6, 0.4};
  spec.rows["x: a"] = {0.8, 0.2};
  TableModel m(spec);
  const std::vector<AttributeDescription> ys{kX};
  const auto r = perplexity(m, tokenize("a a b"), ys, config_with(10), 992);
  EXPECT_EQ(r.tokens_scored, 2u);
  EXPECT_NEAR(r.perplexity, 3.84903799646324, 1e-12);
}

TEST(Perplexity, WindowsDoNotOverlap) {
  TableModelSpec spec{Vocabulary({"a", "b"}), {0.5, 0.5}, {}, {}};
  TableModel m(spec);
  const auto corpus = tokenize("a b a b a");
  EXPECT_EQ(perplexity(m, corpus, {}, config_with(0), 2).tokens_scored, 2u);
  EXPECT_EQ(perplexity(m, corpus, {}, config_with(0), 3).tokens_scored, 3u);
  EXPECT_EQ(perplexity(m, corpus, {}, config_with(0), 992).tokens_scored, 4u);
}

TEST(Perplexity, ZeroProbabilityNamesThePosition) {
  TableModelSpec spec{Vocabulary({"a", "b"}), {0.5, 0.5}, {{"b", {1.0, 0.0}}}, {}};
  TableModel m(spec);
  try {
    perplexity(m, tokenize("a a b b a"), {}, config_with(10), 992);
    FAIL() << "expected InfinitePerplexityError";
  } catch (const InfinitePerplexityError& e) {
    EXPECT_EQ(e.position(), 3u);
  }
  EXPECT_THROW(perplexity(m, tokenize("a"), {}, config_with(10), 992), InputError);
  EXPECT_THROW(perplexity(m, tokenize("a b"), {}, config_with(10), 1), InputError);
}

TEST(Trace, JsonHasEveryField) {
  TableModel m = step_model({0.6, 0.4}, {{0.8, 0.2}}, {kX});
  const std::vector<AttributeDescription> ys{kX};
  const auto j = to_json(debiased_distribution(m, kCtx, ys, config_with(10)));
  for (const char* key : {"original", "per_attribute_sdb", "delta_min", "scale", "debiased"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

}  // namespace
}  // namespace sdlm
