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

// Self-debiasing decoder.
//
// For a context x and attributes Y, the model is queried once on x and
// once per attribute on the self-debiasing context sdb(x, y). Tokens the
// attribute-primed context makes more likely are damped:
//
//   delta(w)     = min_y [ p(w | x) - p(w | sdb(x, y)) ]
//   alpha(d)     = 1 if d >= 0, else exp(lambda * d)   (soft)
//                = 1 if d >= 0, else 0                 (hard)
//   scale(w)     = max(floor_epsilon, alpha(delta(w)))  when flooring
//   p_debiased   ∝ scale(w) * p(w | x)
//
// Tokens with delta >= 0 keep their mass before renormalization.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdlm/language_model.h"
#include "sdlm/templates.h"

namespace sdlm {

enum class ScalingMode { kSoft, kHard };

struct GreedyStrategy {};
struct BeamStrategy {
  std::size_t width = 3;
};
struct SampleStrategy {
  std::uint64_t seed = 0;
  double temperature = 1.0;
};
using DecodingStrategy = std::variant<GreedyStrategy, BeamStrategy, SampleStrategy>;

struct DecodingConfig {
  // Decay constant; 0 disables debiasing in soft mode.
  double lambda = 10.0;
  double floor_epsilon = 0.01;
  ScalingMode mode = ScalingMode::kSoft;
  DecodingStrategy strategy = BeamStrategy{3};
  std::size_t max_new_tokens = 20;
  bool apply_floor_in_generation = true;
  // Generation stops after emitting this token, when set.
  std::optional<std::string> stop_token;

  // Throws ConfigError.
  void validate() const;
};

std::string to_string(ScalingMode mode);
ScalingMode parse_scaling_mode(std::string_view text);
std::string strategy_name(const DecodingStrategy& strategy);

struct DebiasStepTrace {
  NextTokenDistribution original;
  std::vector<NextTokenDistribution> per_attribute_sdb;
  std::vector<double> delta_min;
  std::vector<double> scale;
  NextTokenDistribution debiased;
};

nlohmann::json to_json(const DebiasStepTrace& trace);

// Elementwise p_orig - p_sdb. InputError on length mismatch.
std::vector<double> delta(std::span<const double> p_orig, std::span<const double> p_sdb);

// Scaling function; the floor is not applied here.
double alpha(double x, double lambda, ScalingMode mode);

// Pure combination step over already-computed distributions. With an
// empty `sdb` list the original distribution is returned unchanged and
// delta_min is all zeros.
DebiasStepTrace combine_distributions(const NextTokenDistribution& original,
                                      std::vector<NextTokenDistribution> sdb,
                                      const DecodingConfig& config, bool apply_floor);

// Builds the |Y| + 1 contexts for a model and scores them.
//
// Self-debiasing contexts are the template prefix followed by x. When the
// model declares a context limit, tokens are dropped from the left of x
// only; the prefix is never truncated (ConfigError if it alone does not
// fit).
class SelfDebiaser {
 public:
  SelfDebiaser(const LanguageModel& model, std::span<const AttributeDescription> attributes,
               DecodingConfig config, const TemplateSpec& sdb = sdb_template());

  // The plain context and one self-debiasing context per attribute, grown
  // together as tokens are appended.
  struct Contexts {
    TokenSequence x;
    std::vector<TokenSequence> sdb;
  };

  Contexts start(std::span<const std::string> x) const;
  void append(Contexts& contexts, const std::string& token) const;

  DebiasStepTrace step(const Contexts& contexts, bool apply_floor) const;
  DebiasStepTrace step(std::span<const std::string> x) const {
    return step(start(x), config_.apply_floor_in_generation);
  }

  const LanguageModel& model() const { return *model_; }
  const DecodingConfig& config() const { return config_; }
  std::size_t attribute_count() const { return prefixes_.size(); }

 private:
  NextTokenDistribution score(const TokenSequence& context, std::size_t prefix_size) const;

  const LanguageModel* model_;
  DecodingConfig config_;
  std::vector<TokenSequence> prefixes_;
};

// One debiasing step for context x. InputError when `attributes` is empty.
DebiasStepTrace debiased_distribution(const LanguageModel& model,
                                      std::span<const std::string> x,
                                      std::span<const AttributeDescription> attributes,
                                      const DecodingConfig& config,
                                      const TemplateSpec& sdb = sdb_template());

struct GenerationResult {
  std::string prompt;
  TokenSequence continuation;
  // Filled when requested; one per emitted token.
  std::vector<DebiasStepTrace> per_step_traces;
  // Sum of log p_debiased over emitted tokens.
  double total_logprob = 0.0;
};

struct GenerationOptions {
  bool record_traces = false;
  TemplateSpec sdb = sdb_template();
};

// Emits up to max_new_tokens tokens. Each emitted token is appended to x
// and to every self-debiasing context. Greedy breaks ties toward the lower
// vocabulary index; beam search ranks by summed log probability without
// length normalization; sampling applies the temperature to the debiased
// distribution. Empty `attributes` means plain decoding.
GenerationResult generate(const LanguageModel& model, std::string_view prompt,
                          std::span<const AttributeDescription> attributes,
                          const DecodingConfig& config, const GenerationOptions& options = {});

struct PerplexityResult {
  double perplexity = 0.0;
  std::size_t tokens_scored = 0;
  double total_logprob = 0.0;
};

// Splits the corpus into consecutive non-overlapping windows of at most
// `window` tokens and scores every token after the first of each window
// under the floored debiased distribution given its in-window prefix.
// With no attributes (or lambda == 0 in soft mode) this is the model's
// ordinary perplexity. InfinitePerplexityError names the first token that
// gets zero probability.
PerplexityResult perplexity(const LanguageModel& model, std::span<const std::string> corpus,
                            std::span<const AttributeDescription> attributes,
                            const DecodingConfig& config, std::size_t window,
                            const TemplateSpec& sdb = sdb_template());

}  // namespace sdlm
