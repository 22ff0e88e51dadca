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

#include "sdlm/scorer.h"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "http_pool.h"
#include "io_util.h"
#include "sdlm/error.h"

namespace sdlm {

namespace {

using nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool word_char(unsigned char c) { return std::isalnum(c) || c == '\'' || c == '-' || c >= 0x80; }

std::string url_encode(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

std::optional<double> parse_retry_after(const std::string& header) {
  if (header.empty()) return std::nullopt;
  char* end = nullptr;
  const double seconds = std::strtod(header.c_str(), &end);
  if (end == header.c_str() || !std::isfinite(seconds) || seconds < 0.0) return std::nullopt;
  return seconds;
}

}  // namespace

LexiconScorer::LexiconScorer(std::map<std::string, std::set<std::string>> wordlists) {
  for (auto& [attribute, words] : wordlists) {
    if (words.empty()) {
      throw ValidationError("lexicon for \"" + attribute + "\" has no words");
    }
    std::set<std::string> lowered;
    for (const auto& w : words) lowered.insert(lower(w));
    wordlists_.emplace(attribute, std::move(lowered));
  }
}

std::vector<std::string> LexiconScorer::words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !word_char(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && word_char(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(lower(text.substr(start, i - start)));
  }
  return out;
}

AttributeScores LexiconScorer::score(std::string_view text,
                                     std::span<const std::string> attributes) const {
  const auto tokens = words(text);
  AttributeScores out;
  for (const auto& attribute : attributes) {
    auto it = wordlists_.find(attribute);
    if (it == wordlists_.end()) {
      throw ConfigError("lexicon scorer has no word list for \"" + attribute + "\"");
    }
    int matches = 0;
    for (const auto& t : tokens) matches += it->second.count(t) ? 1 : 0;
    out[attribute] = 1.0 - std::ldexp(1.0, -matches);
  }
  return out;
}

LexiconScorer parse_lexicon(const json& doc) {
  if (!doc.is_object()) throw ConfigError("lexicon must be an object of word lists");
  std::map<std::string, std::set<std::string>> lists;
  for (const auto& [attribute, words] : doc.items()) {
    if (!words.is_array()) throw ConfigError("lexicon entry \"" + attribute + "\" is not a list");
    auto& set = lists[attribute];
    for (const auto& w : words) {
      if (!w.is_string()) throw ConfigError("lexicon entry \"" + attribute + "\" has a non-string");
      set.insert(w.get<std::string>());
    }
  }
  try {
    return LexiconScorer(std::move(lists));
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

LexiconScorer load_lexicon(const std::filesystem::path& path) {
  std::string text;
  try {
    text = internal::read_file(path);
    return parse_lexicon(internal::parse_json(text, path.string()));
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

RemoteScorerOptions parse_remote_scorer_options(const json& doc) {
  if (!doc.is_object()) throw ConfigError("remote scorer options must be an object");
  RemoteScorerOptions o;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "endpoint") o.endpoint = value.get<std::string>();
      else if (key == "path") o.path = value.get<std::string>();
      else if (key == "text_pointer") o.text_pointer = value.get<std::string>();
      else if (key == "attributes_pointer") o.attributes_pointer = value.get<std::string>();
      else if (key == "attributes_as_object") o.attributes_as_object = value.get<bool>();
      else if (key == "score_pointer") o.score_pointer = value.get<std::string>();
      else if (key == "attribute_names")
        o.attribute_names = value.get<std::map<std::string, std::string>>();
      else if (key == "api_key_env") o.api_key_env = value.get<std::string>();
      else if (key == "api_key_param") o.api_key_param = value.get<std::string>();
      else if (key == "max_attempts") o.max_attempts = value.get<std::size_t>();
      else if (key == "initial_backoff_ms")
        o.initial_backoff = std::chrono::milliseconds(value.get<long>());
      else if (key == "max_in_flight") o.max_in_flight = value.get<std::size_t>();
      else if (key == "timeout_ms") o.timeout = std::chrono::milliseconds(value.get<long>());
      else throw ConfigError("unknown remote scorer option \"" + key + "\"");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("remote scorer options: ") + e.what());
  }
  if (o.endpoint.empty()) throw ConfigError("remote scorer needs an endpoint");
  if (o.max_attempts == 0) throw ConfigError("max_attempts must be positive");
  return o;
}

RemoteScorer::RemoteScorer(RemoteScorerOptions options, Sleeper sleeper)
    : options_(std::move(options)), sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (!options_.api_key_env.empty()) {
    const char* key = std::getenv(options_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError("environment variable " + options_.api_key_env + " is not set");
    }
    api_key_ = key;
  }
  pool_ = std::make_unique<HttpPool>(options_.endpoint, options_.timeout, options_.max_in_flight);
}

RemoteScorer::~RemoteScorer() = default;

AttributeScores RemoteScorer::score(std::string_view text,
                                    std::span<const std::string> attributes) const {
  auto remote_name = [&](const std::string& local) {
    auto it = options_.attribute_names.find(local);
    return it == options_.attribute_names.end() ? local : it->second;
  };

  json request = json::object();
  try {
    request[json::json_pointer(options_.text_pointer)] = std::string(text);
    json requested = options_.attributes_as_object ? json::object() : json::array();
    for (const auto& a : attributes) {
      if (options_.attributes_as_object) {
        requested[remote_name(a)] = json::object();
      } else {
        requested.push_back(remote_name(a));
      }
    }
    request[json::json_pointer(options_.attributes_pointer)] = std::move(requested);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("remote scorer request mapping: ") + e.what());
  }

  std::string path = options_.path;
  HttpHeaders headers;
  if (!api_key_.empty()) {
    if (!options_.api_key_param.empty()) {
      path += (path.find('?') == std::string::npos ? "?" : "&") + options_.api_key_param + "=" +
              url_encode(api_key_);
    } else {
      headers.emplace("Authorization", "Bearer " + api_key_);
    }
  }

  const std::string body = request.dump();
  HttpResponse response;
  for (std::size_t attempt = 0;; ++attempt) {
    response = pool_->post_json(path, body, headers);
    const bool retryable = response.status == 0 || response.status == 429 || response.status >= 500;
    if (response.ok() || !retryable) break;
    const auto retry_after = parse_retry_after(response.header("Retry-After"));
    if (attempt + 1 >= options_.max_attempts) {
      const std::string why = response.status == 0 ? "transport failure: " + response.error
                                                   : "HTTP " + std::to_string(response.status);
      throw RemoteError("scorer: giving up after " + std::to_string(attempt + 1) +
                            " attempts: " + why,
                        response.body, response.status, retry_after);
    }
    auto wait = options_.initial_backoff * (std::int64_t{1} << std::min<std::size_t>(attempt, 20));
    if (retry_after) {
      wait = std::chrono::milliseconds(static_cast<std::int64_t>(*retry_after * 1000.0));
    }
    sleeper_(wait);
  }
  if (!response.ok()) {
    throw RemoteError("scorer: HTTP " + std::to_string(response.status), response.body,
                      response.status, parse_retry_after(response.header("Retry-After")));
  }

  json reply;
  try {
    reply = json::parse(response.body);
  } catch (const json::parse_error& e) {
    throw RemoteError(std::string("scorer: malformed reply: ") + e.what(), response.body,
                      response.status);
  }
  AttributeScores out;
  for (const auto& a : attributes) {
    std::string pointer = options_.score_pointer;
    const std::string placeholder = "{attribute}";
    if (auto pos = pointer.find(placeholder); pos != std::string::npos) {
      pointer.replace(pos, placeholder.size(), remote_name(a));
    }
    const json* value = nullptr;
    try {
      json::json_pointer ptr(pointer);
      if (reply.contains(ptr)) value = &reply.at(ptr);
    } catch (const json::exception&) {
      value = nullptr;
    }
    if (value == nullptr || !value->is_number()) {
      throw RemoteValidationError("scorer: reply has no score for \"" + a + "\"", response.body,
                                  response.status);
    }
    const double s = value->get<double>();
    if (!(s >= 0.0 && s <= 1.0)) {
      throw RemoteValidationError("scorer: score for \"" + a + "\" is outside [0, 1]",
                                  response.body, response.status);
    }
    out[a] = s;
  }
  return out;
}

}  // namespace sdlm
