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

#include "sdlm/ngram_model.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "io_util.h"
#include "sdlm/error.h"

namespace sdlm {

namespace {

using nlohmann::json;

void check_params(std::size_t order, double smoothing_k) {
  if (order == 0) throw InputError("n-gram order must be at least 1");
  if (!(smoothing_k > 0.0) || !std::isfinite(smoothing_k)) {
    throw InputError("smoothing_k must be positive");
  }
}

}  // namespace

NGramModel::NGramModel(NGramModelSpec spec) : spec_(std::move(spec)) {
  check_params(spec_.order, spec_.smoothing_k);
  for (auto& [history, counts] : spec_.counts) {
    if (tokenize(history).size() >= spec_.order) {
      throw ValidationError("history \"" + history + "\" is too long for order " +
                            std::to_string(spec_.order));
    }
    double total = 0.0;
    for (const auto& [id, c] : counts.next) {
      if (id >= spec_.vocabulary.size()) throw ValidationError("count for unknown token id");
      if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("negative n-gram count");
      total += c;
    }
    counts.total = total;
  }
}

NextTokenDistribution NGramModel::next_token_distribution(
    std::span<const std::string> context) const {
  for (const auto& token : context) spec_.vocabulary.id(token);

  const std::size_t vocab_size = spec_.vocabulary.size();
  const double k = spec_.smoothing_k;
  std::size_t len = std::min(spec_.order - 1, context.size());
  for (;; --len) {
    auto it = spec_.counts.find(join_tokens(context.last(len)));
    if (it != spec_.counts.end() && it->second.total > 0.0) {
      const HistoryCounts& h = it->second;
      const double denom = h.total + k * static_cast<double>(vocab_size);
      std::vector<double> probs(vocab_size, k / denom);
      for (const auto& [id, c] : h.next) probs[id] = (c + k) / denom;
      return NextTokenDistribution(std::move(probs));
    }
    if (len == 0) break;
  }
  // Only reachable for a model with no unigram counts at all.
  return NextTokenDistribution::uniform(vocab_size);
}

NGramModel train_ngram(std::span<const std::string> corpus, std::size_t order,
                       double smoothing_k, std::span<const std::string> extra_vocabulary) {
  if (corpus.empty()) throw InputError("cannot train an n-gram model on an empty corpus");
  check_params(order, smoothing_k);
  if (corpus.size() < order) {
    throw InputError("corpus has " + std::to_string(corpus.size()) +
                     " tokens, fewer than the order " + std::to_string(order));
  }

  std::vector<std::string> tokens;
  std::unordered_set<std::string> seen;
  for (const auto& t : corpus) {
    if (seen.insert(t).second) tokens.push_back(t);
  }
  for (const auto& t : extra_vocabulary) {
    if (seen.insert(t).second) tokens.push_back(t);
  }

  NGramModelSpec spec{Vocabulary(std::move(tokens)), order, smoothing_k, {}};
  std::vector<TokenId> ids;
  ids.reserve(corpus.size());
  for (const auto& t : corpus) ids.push_back(spec.vocabulary.id(t));

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t len = 0; len < order && len <= i; ++len) {
      auto& h = spec.counts[join_tokens(corpus.subspan(i - len, len))];
      h.next[ids[i]] += 1.0;
      h.total += 1.0;
    }
  }
  return NGramModel(std::move(spec));
}

std::string dump_ngram_model(const NGramModelSpec& spec) {
  json doc;
  doc["order"] = spec.order;
  doc["smoothing_k"] = spec.smoothing_k;
  doc["vocab"] = spec.vocabulary.tokens();
  doc["counts"] = json::object();
  for (const auto& [history, counts] : spec.counts) {
    json row = json::object();
    for (const auto& [id, c] : counts.next) row[spec.vocabulary.token(id)] = c;
    doc["counts"][history] = std::move(row);
  }
  return doc.dump(2) + "\n";
}

NGramModel parse_ngram_model(const std::string& json_text) {
  json doc = internal::parse_json(json_text, "n-gram model");
  try {
    std::vector<std::string> tokens = doc.at("vocab").get<std::vector<std::string>>();
    NGramModelSpec spec{Vocabulary(std::move(tokens)), doc.at("order").get<std::size_t>(),
                        doc.at("smoothing_k").get<double>(), {}};
    for (const auto& [history, row] : doc.at("counts").items()) {
      auto& h = spec.counts[history];
      for (const auto& [token, c] : row.items())
        h.next[spec.vocabulary.id(token)] = c.get<double>();
    }
    return NGramModel(std::move(spec));
  } catch (const json::exception& e) {
    throw FormatError(std::string("n-gram model: ") + e.what());
  }
}

NGramModel load_ngram_model(const std::filesystem::path& path) {
  return parse_ngram_model(internal::read_file(path));
}

void save_ngram_model(const NGramModelSpec& spec, const std::filesystem::path& path) {
  internal::write_file(path, dump_ngram_model(spec));
}

}  // namespace sdlm
