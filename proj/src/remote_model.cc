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

#include "sdlm/remote_model.h"

#include <cmath>

#include <nlohmann/json.hpp>

#include "http_pool.h"
#include "sdlm/error.h"

namespace sdlm {

namespace {

using nlohmann::json;

json parse_reply(const HttpResponse& response, const std::string& what) {
  if (response.status == 0) {
    throw RemoteError(what + ": transport failure: " + response.error);
  }
  if (!response.ok()) {
    throw RemoteError(what + ": HTTP " + std::to_string(response.status), response.body,
                      response.status);
  }
  try {
    return json::parse(response.body);
  } catch (const json::parse_error& e) {
    throw RemoteError(what + ": malformed reply: " + e.what(), response.body, response.status);
  }
}

}  // namespace

NextTokenDistribution decode_logprob_reply(const std::string& body, std::size_t vocab_size) {
  json reply;
  try {
    reply = json::parse(body);
  } catch (const json::parse_error& e) {
    throw RemoteValidationError(std::string("next_token_logprobs: malformed reply: ") + e.what(),
                                body);
  }
  if (!reply.is_object() || !reply.contains("vocab_size") || !reply.contains("logprobs") ||
      !reply["vocab_size"].is_number_unsigned() || !reply["logprobs"].is_array()) {
    throw RemoteValidationError("next_token_logprobs: reply lacks vocab_size/logprobs", body);
  }
  const auto declared = reply["vocab_size"].get<std::size_t>();
  const auto& logprobs = reply["logprobs"];
  if (declared != vocab_size || logprobs.size() != vocab_size) {
    throw RemoteValidationError("next_token_logprobs: server sent " +
                                    std::to_string(logprobs.size()) + " entries (vocab_size " +
                                    std::to_string(declared) + "), session vocabulary has " +
                                    std::to_string(vocab_size),
                                body);
  }
  std::vector<double> probs;
  probs.reserve(vocab_size);
  double sum = 0.0;
  for (const auto& lp : logprobs) {
    // JSON has no -inf; null stands for a zero-probability token.
    if (lp.is_null()) {
      probs.push_back(0.0);
      continue;
    }
    if (!lp.is_number())
      throw RemoteValidationError("next_token_logprobs: non-numeric logprob", body);
    double p = std::exp(lp.get<double>());
    if (!std::isfinite(p) || p > 1.0 + kRemoteSumTolerance) {
      throw RemoteValidationError("next_token_logprobs: logprob out of range", body);
    }
    probs.push_back(p);
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRemoteSumTolerance) {
    throw RemoteValidationError(
        "next_token_logprobs: probabilities sum to " + std::to_string(sum), body);
  }
  for (double& p : probs) p = std::min(1.0, p / sum);
  return NextTokenDistribution(std::move(probs));
}

RemoteModel::RemoteModel(RemoteModelOptions options)
    : options_(std::move(options)),
      pool_(std::make_unique<HttpPool>(options_.endpoint, options_.timeout,
                                       options_.max_connections)) {
  HttpResponse response = pool_->get("/v1/vocab");
  json reply = parse_reply(response, "vocab");
  if (!reply.is_object() || !reply.contains("tokens") || !reply["tokens"].is_array()) {
    throw RemoteError("vocab: reply lacks \"tokens\"", response.body, response.status);
  }
  try {
    vocabulary_ = std::make_unique<Vocabulary>(reply["tokens"].get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw RemoteError(std::string("vocab: ") + e.what(), response.body, response.status);
  } catch (const ValidationError& e) {
    throw RemoteValidationError(std::string("vocab: ") + e.what(), response.body,
                                response.status);
  }
}

RemoteModel::~RemoteModel() = default;

NextTokenDistribution RemoteModel::next_token_distribution(
    std::span<const std::string> context) const {
  json request;
  request["context"] = std::vector<std::string>(context.begin(), context.end());
  HttpResponse response = pool_->post_json("/v1/next_token_logprobs", request.dump());
  if (response.status == 0) {
    throw RemoteError("next_token_logprobs: transport failure: " + response.error);
  }
  if (!response.ok()) {
    throw RemoteError("next_token_logprobs: HTTP " + std::to_string(response.status),
                      response.body, response.status);
  }
  return decode_logprob_reply(response.body, vocabulary_->size());
}

}  // namespace sdlm
