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

#include "sdlm/debias.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "random_util.h"
#include "sdlm/error.h"

namespace sdlm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

void DecodingConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  if (!(floor_epsilon >= 0.0 && floor_epsilon <= 1.0)) {
    throw ConfigError("floor_epsilon must lie in [0, 1]");
  }
  if (max_new_tokens == 0) throw ConfigError("max_new_tokens must be positive");
  std::visit(overloaded{
                 [](const GreedyStrategy&) {},
                 [](const BeamStrategy& beam) {
                   if (beam.width == 0) throw ConfigError("beam width must be at least 1");
                 },
                 [](const SampleStrategy& sample) {
                   if (!(sample.temperature > 0.0) || !std::isfinite(sample.temperature)) {
                     throw ConfigError("temperature must be positive");
                   }
                 },
             },
             strategy);
}

std::string to_string(ScalingMode mode) { return mode == ScalingMode::kSoft ? "soft" : "hard"; }

ScalingMode parse_scaling_mode(std::string_view text) {
  if (text == "soft") return ScalingMode::kSoft;
  if (text == "hard") return ScalingMode::kHard;
  throw ConfigError("unknown mode \"" + std::string(text) + "\" (expected soft or hard)");
}

std::string strategy_name(const DecodingStrategy& strategy) {
  return std::visit(
      overloaded{
          [](const GreedyStrategy&) { return std::string("greedy"); },
          [](const BeamStrategy& b) { return "beam(" + std::to_string(b.width) + ")"; },
          [](const SampleStrategy&) { return std::string("sample"); },
      },
      strategy);
}

nlohmann::json to_json(const DebiasStepTrace& trace) {
  nlohmann::json sdb = nlohmann::json::array();
  for (const auto& d : trace.per_attribute_sdb) sdb.push_back(d.vector());
  return {{"original", trace.original.vector()},
          {"per_attribute_sdb", std::move(sdb)},
          {"delta_min", trace.delta_min},
          {"scale", trace.scale},
          {"debiased", trace.debiased.vector()}};
}

std::vector<double> delta(std::span<const double> p_orig, std::span<const double> p_sdb) {
  if (p_orig.size() != p_sdb.size()) {
    throw InputError("cannot subtract distributions of sizes " + std::to_string(p_orig.size()) +
                     " and " + std::to_string(p_sdb.size()));
  }
  std::vector<double> out(p_orig.size());
  std::transform(p_orig.begin(), p_orig.end(), p_sdb.begin(), out.begin(), std::minus<>());
  return out;
}

double alpha(double x, double lambda, ScalingMode mode) {
  if (x >= 0.0) return 1.0;
  return mode == ScalingMode::kSoft ? std::exp(lambda * x) : 0.0;
}

DebiasStepTrace combine_distributions(const NextTokenDistribution& original,
                                      std::vector<NextTokenDistribution> sdb,
                                      const DecodingConfig& config, bool apply_floor) {
  const std::size_t n = original.size();
  std::vector<double> delta_min(n, sdb.empty() ? 0.0 : std::numeric_limits<double>::infinity());
  for (const auto& primed : sdb) {
    std::vector<double> d = delta(original.probs(), primed.probs());
    for (std::size_t w = 0; w < n; ++w) delta_min[w] = std::min(delta_min[w], d[w]);
  }

  std::vector<double> scale(n);
  for (std::size_t w = 0; w < n; ++w) {
    scale[w] = alpha(delta_min[w], config.lambda, config.mode);
    if (apply_floor) scale[w] = std::max(config.floor_epsilon, scale[w]);
  }

  // Dividing by the largest factor first leaves the result unchanged
  // under normalization but keeps a uniform penalty from perturbing the
  // original probabilities by rounding.
  const double top = *std::max_element(scale.begin(), scale.end());
  std::vector<double> weights(n, 0.0);
  double mass = 0.0;
  if (top > 0.0) {
    for (std::size_t w = 0; w < n; ++w) {
      weights[w] = (scale[w] / top) * original[w];
      mass += weights[w];
    }
  }
  // Every token was zeroed (hard mode without a floor): keep the original.
  NextTokenDistribution debiased =
      mass > 0.0 ? NextTokenDistribution::normalized(std::move(weights)) : original;

  return {original, std::move(sdb), std::move(delta_min), std::move(scale), std::move(debiased)};
}

SelfDebiaser::SelfDebiaser(const LanguageModel& model,
                           std::span<const AttributeDescription> attributes,
                           DecodingConfig config, const TemplateSpec& sdb)
    : model_(&model), config_(std::move(config)) {
  config_.validate();
  prefixes_.reserve(attributes.size());
  for (const auto& attribute : attributes) {
    prefixes_.push_back(sdb_prefix_tokens(sdb, attribute));
    if (auto limit = model.context_limit(); limit && prefixes_.back().size() >= *limit) {
      throw ConfigError("self-debiasing prefix for \"" + attribute.name +
                        "\" does not fit the model context of " + std::to_string(*limit) +
                        " tokens");
    }
  }
}

SelfDebiaser::Contexts SelfDebiaser::start(std::span<const std::string> x) const {
  Contexts contexts{TokenSequence(x.begin(), x.end()), {}};
  contexts.sdb.reserve(prefixes_.size());
  for (const auto& prefix : prefixes_) {
    TokenSequence context = prefix;
    context.insert(context.end(), x.begin(), x.end());
    contexts.sdb.push_back(std::move(context));
  }
  return contexts;
}

void SelfDebiaser::append(Contexts& contexts, const std::string& token) const {
  contexts.x.push_back(token);
  for (auto& context : contexts.sdb) context.push_back(token);
}

NextTokenDistribution SelfDebiaser::score(const TokenSequence& context,
                                          std::size_t prefix_size) const {
  auto limit = model_->context_limit();
  if (!limit || context.size() <= *limit) return model_->next_token_distribution(context);
  // Drop tokens from the left of x, never from the prefix.
  const std::size_t keep = *limit - prefix_size;
  TokenSequence truncated(context.begin(), context.begin() + prefix_size);
  truncated.insert(truncated.end(), context.end() - keep, context.end());
  return model_->next_token_distribution(truncated);
}

DebiasStepTrace SelfDebiaser::step(const Contexts& contexts, bool apply_floor) const {
  NextTokenDistribution original = score(contexts.x, 0);
  std::vector<NextTokenDistribution> primed;
  primed.reserve(contexts.sdb.size());
  for (std::size_t i = 0; i < contexts.sdb.size(); ++i) {
    primed.push_back(score(contexts.sdb[i], prefixes_[i].size()));
    if (primed.back().size() != original.size()) {
      throw ValidationError("model returned distributions of different sizes");
    }
  }
  return combine_distributions(original, std::move(primed), config_, apply_floor);
}

DebiasStepTrace debiased_distribution(const LanguageModel& model,
                                      std::span<const std::string> x,
                                      std::span<const AttributeDescription> attributes,
                                      const DecodingConfig& config, const TemplateSpec& sdb) {
  if (attributes.empty()) throw InputError("self-debiasing needs at least one attribute");
  SelfDebiaser debiaser(model, attributes, config, sdb);
  return debiaser.step(x);
}

namespace {

double log_prob(double p) {
  return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

bool is_stop(const DecodingConfig& config, const std::string& token) {
  return config.stop_token && token == *config.stop_token;
}

GenerationResult generate_stepwise(const SelfDebiaser& debiaser, GenerationResult result,
                                   const TokenSequence& prompt_tokens, bool record_traces,
                                   const std::optional<SampleStrategy>& sample) {
  const DecodingConfig& config = debiaser.config();
  const Vocabulary& vocab = debiaser.model().vocabulary();
  std::mt19937_64 rng(sample ? sample->seed : 0);
  auto contexts = debiaser.start(prompt_tokens);

  for (std::size_t t = 0; t < config.max_new_tokens; ++t) {
    DebiasStepTrace trace = debiaser.step(contexts, config.apply_floor_in_generation);
    TokenId chosen = trace.debiased.argmax();
    if (sample) {
      std::vector<double> weights(trace.debiased.size());
      for (std::size_t w = 0; w < weights.size(); ++w) {
        const double p = trace.debiased[w];
        weights[w] = p > 0.0 ? std::pow(p, 1.0 / sample->temperature) : 0.0;
      }
      double total = 0.0;
      for (double w : weights) total += w;
      double target = internal::uniform01(rng) * total;
      chosen = weights.size() - 1;
      while (chosen > 0 && weights[chosen] == 0.0) --chosen;
      for (std::size_t w = 0; w < weights.size(); ++w) {
        if (weights[w] == 0.0) continue;
        if (target < weights[w]) {
          chosen = w;
          break;
        }
        target -= weights[w];
      }
    }
    const std::string& token = vocab.token(chosen);
    result.total_logprob += log_prob(trace.debiased[chosen]);
    result.continuation.push_back(token);
    if (record_traces) result.per_step_traces.push_back(std::move(trace));
    if (is_stop(config, token)) break;
    debiaser.append(contexts, token);
  }
  return result;
}

struct Hypothesis {
  SelfDebiaser::Contexts contexts;
  TokenSequence continuation;
  std::vector<DebiasStepTrace> traces;
  double score = 0.0;
  bool finished = false;
};

GenerationResult generate_beam(const SelfDebiaser& debiaser, GenerationResult result,
                               const TokenSequence& prompt_tokens, std::size_t width,
                               bool record_traces) {
  const DecodingConfig& config = debiaser.config();
  const Vocabulary& vocab = debiaser.model().vocabulary();

  std::vector<Hypothesis> beams;
  beams.push_back({debiaser.start(prompt_tokens), {}, {}, 0.0, false});

  struct Candidate {
    double score;
    std::size_t beam;
    double prob;
    TokenId token;
    bool carry;  // finished hypothesis carried over unchanged
  };

  for (std::size_t t = 0; t < config.max_new_tokens; ++t) {
    if (std::all_of(beams.begin(), beams.end(), [](const auto& h) { return h.finished; })) break;

    std::vector<Candidate> candidates;
    std::vector<std::optional<DebiasStepTrace>> traces(beams.size());
    for (std::size_t b = 0; b < beams.size(); ++b) {
      if (beams[b].finished) {
        candidates.push_back({beams[b].score, b, 1.0, 0, true});
        continue;
      }
      traces[b] = debiaser.step(beams[b].contexts, config.apply_floor_in_generation);
      const NextTokenDistribution& p = traces[b]->debiased;
      for (TokenId w = 0; w < p.size(); ++w) {
        if (p[w] > 0.0) candidates.push_back({beams[b].score + std::log(p[w]), b, p[w], w, false});
      }
    }

    const std::size_t keep = std::min(width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.score != b.score) return a.score > b.score;
                        if (a.beam != b.beam) return a.beam < b.beam;
                        if (a.prob != b.prob) return a.prob > b.prob;
                        return a.token < b.token;
                      });

    std::vector<Hypothesis> next;
    next.reserve(keep);
    for (std::size_t c = 0; c < keep; ++c) {
      const Candidate& cand = candidates[c];
      Hypothesis h = beams[cand.beam];
      if (!cand.carry) {
        const std::string& token = vocab.token(cand.token);
        h.score = cand.score;
        h.continuation.push_back(token);
        if (record_traces) h.traces.push_back(*traces[cand.beam]);
        h.finished = is_stop(config, token);
        if (!h.finished) debiaser.append(h.contexts, token);
      }
      next.push_back(std::move(h));
    }
    beams = std::move(next);
  }

  Hypothesis& best = beams.front();
  result.continuation = std::move(best.continuation);
  result.per_step_traces = std::move(best.traces);
  result.total_logprob = best.score;
  return result;
}

}  // namespace

GenerationResult generate(const LanguageModel& model, std::string_view prompt,
                          std::span<const AttributeDescription> attributes,
                          const DecodingConfig& config, const GenerationOptions& options) {
  SelfDebiaser debiaser(model, attributes, config, options.sdb);
  GenerationResult result;
  result.prompt = std::string(prompt);
  const TokenSequence prompt_tokens = tokenize(prompt);

  return std::visit(
      overloaded{
          [&](const GreedyStrategy&) {
            return generate_stepwise(debiaser, std::move(result), prompt_tokens,
                                     options.record_traces, std::nullopt);
          },
          [&](const SampleStrategy& s) {
            return generate_stepwise(debiaser, std::move(result), prompt_tokens,
                                     options.record_traces, s);
          },
          [&](const BeamStrategy& b) {
            return generate_beam(debiaser, std::move(result), prompt_tokens, b.width,
                                 options.record_traces);
          },
      },
      config.strategy);
}

PerplexityResult perplexity(const LanguageModel& model, std::span<const std::string> corpus,
                            std::span<const AttributeDescription> attributes,
                            const DecodingConfig& config, std::size_t window,
                            const TemplateSpec& sdb) {
  if (corpus.size() < 2) throw InputError("perplexity needs a corpus of at least 2 tokens");
  if (window < 2) throw InputError("perplexity window must be at least 2");
  SelfDebiaser debiaser(model, attributes, config, sdb);
  const Vocabulary& vocab = model.vocabulary();

  PerplexityResult result;
  for (std::size_t begin = 0; begin < corpus.size(); begin += window) {
    const std::size_t end = std::min(corpus.size(), begin + window);
    auto contexts = debiaser.start(corpus.subspan(begin, 1));
    for (std::size_t pos = begin + 1; pos < end; ++pos) {
      const TokenId target = vocab.id(corpus[pos]);
      DebiasStepTrace trace = debiaser.step(contexts, /*apply_floor=*/true);
      const double p = trace.debiased[target];
      if (!(p > 0.0)) {
        throw InfinitePerplexityError("token \"" + corpus[pos] + "\" at position " +
                                          std::to_string(pos) + " has zero probability",
                                      pos);
      }
      result.total_logprob += std::log(p);
      ++result.tokens_scored;
      debiaser.append(contexts, corpus[pos]);
    }
  }
  if (result.tokens_scored == 0) throw InputError("no tokens to score");
  result.perplexity =
      std::exp(-result.total_logprob / static_cast<double>(result.tokens_scored));
  return result;
}

}  // namespace sdlm
