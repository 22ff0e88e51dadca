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

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sdlm/language_model.h"

namespace sdlm {

// Counts for one history: per-token counts plus their total.
struct HistoryCounts {
  std::map<TokenId, double> next;
  double total = 0.0;
};

// Sparse counts for every history length 0..order-1. The key is the
// space-joined history; the empty string is the unigram history.
struct NGramModelSpec {
  Vocabulary vocabulary;
  std::size_t order = 1;
  double smoothing_k = 1.0;
  std::map<std::string, HistoryCounts> counts;
};

// Add-k smoothed n-gram model:
//   P(w | h) = (c(h, w) + k) / (c(h) + k |V|)
// where h is the longest suffix of the last order-1 context tokens that
// was seen in training. The empty history is always seen.
class NGramModel final : public LanguageModel {
 public:
  explicit NGramModel(NGramModelSpec spec);

  const Vocabulary& vocabulary() const override { return spec_.vocabulary; }
  // Throws VocabularyError if a context token is outside the vocabulary.
  NextTokenDistribution next_token_distribution(
      std::span<const std::string> context) const override;

  const NGramModelSpec& spec() const { return spec_; }

 private:
  NGramModelSpec spec_;
};

// Vocabulary is the corpus tokens in first-appearance order followed by
// any `extra_vocabulary` tokens not already present (these get only the
// smoothing mass). Throws InputError on an empty corpus, a corpus shorter
// than `order`, order == 0, or smoothing_k <= 0.
NGramModel train_ngram(std::span<const std::string> corpus, std::size_t order,
                       double smoothing_k,
                       std::span<const std::string> extra_vocabulary = {});

// {"order": n, "smoothing_k": k, "vocab": [...],
//  "counts": {"history": {"token": count, ...}, ...}}
std::string dump_ngram_model(const NGramModelSpec& spec);
NGramModel parse_ngram_model(const std::string& json_text);
NGramModel load_ngram_model(const std::filesystem::path& path);
void save_ngram_model(const NGramModelSpec& spec, const std::filesystem::path& path);

}  // namespace sdlm
