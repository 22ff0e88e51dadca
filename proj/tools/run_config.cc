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

#include "run_config.h"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "sdlm/error.h"
#include "sdlm/ngram_model.h"
#include "sdlm/remote_model.h"
#include "sdlm/table_model.h"

namespace sdlm::cli {

namespace {

using nlohmann::json;

std::filesystem::path resolve(const RunConfig& config, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : config.base_dir / path;
}

void apply_decoding(RunConfig& config, const json& d) {
  for (const auto& [key, value] : d.items()) {
    if (key == "lambda") config.decoding.lambda = value.get<double>();
    else if (key == "floor_epsilon") config.decoding.floor_epsilon = value.get<double>();
    else if (key == "mode") config.decoding.mode = parse_scaling_mode(value.get<std::string>());
    else if (key == "strategy") config.strategy = value.get<std::string>();
    else if (key == "beam_width") config.beam_width = value.get<std::size_t>();
    else if (key == "temperature") config.temperature = value.get<double>();
    else if (key == "max_new_tokens") config.decoding.max_new_tokens = value.get<std::size_t>();
    else if (key == "apply_floor") config.decoding.apply_floor_in_generation = value.get<bool>();
    else if (key == "stop_token") config.decoding.stop_token = value.get<std::string>();
    else throw ConfigError("unknown decoding option \"" + key + "\"");
  }
}

void apply_model(RunConfig& config, const json& m) {
  if (!m.is_object() || m.size() != 1) {
    throw ConfigError("\"model\" must hold exactly one of table, ngram, ngram_model, remote");
  }
  const auto& [kind, value] = *m.items().begin();
  if (kind == "table") {
    config.table = resolve(config, value.get<std::string>());
  } else if (kind == "ngram_model") {
    config.ngram_model = resolve(config, value.get<std::string>());
  } else if (kind == "ngram") {
    NGramParams p;
    p.corpus = resolve(config, value.at("corpus").get<std::string>());
    p.order = value.value("order", p.order);
    p.smoothing_k = value.value("smoothing_k", p.smoothing_k);
    config.ngram = p;
  } else if (kind == "remote") {
    RemoteModelParams p;
    if (value.is_string()) {
      p.endpoint = value.get<std::string>();
    } else {
      p.endpoint = value.at("endpoint").get<std::string>();
      if (value.contains("context_limit"))
        p.context_limit = value["context_limit"].get<std::size_t>();
    }
    config.remote = p;
  } else {
    throw ConfigError("unknown model kind \"" + kind + "\"");
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  if (!doc.is_object()) throw ConfigError(path.string() + ": config must be a JSON object");
  config.base_dir = path.parent_path().empty() ? "." : path.parent_path();

  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "model") apply_model(config, value);
      else if (key == "registry") config.registry = resolve(config, value.get<std::string>());
      else if (key == "sdg_template")
        config.sdg_template = resolve(config, value.get<std::string>());
      else if (key == "sdb_template")
        config.sdb_template = resolve(config, value.get<std::string>());
      else if (key == "answer_words") {
        auto words = value.get<std::vector<std::string>>();
        if (words.size() != 2) throw ConfigError("answer_words needs exactly two entries");
        config.answers = {words[0], words[1]};
      } else if (key == "attributes") {
        config.attributes = value.is_string()
                                ? std::vector<std::string>{value.get<std::string>()}
                                : value.get<std::vector<std::string>>();
      } else if (key == "keywords") config.keywords = value.get<bool>();
      else if (key == "decoding") apply_decoding(config, value);
      else if (key == "scorer") config.scorer = value;
      else if (key == "seed") config.seed = value.get<std::uint64_t>();
      else if (key == "jobs") config.jobs = value.get<std::size_t>();
      else throw ConfigError("unknown config key \"" + key + "\"");
    }
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void finalize_decoding(RunConfig& config) {
  if (config.strategy == "greedy") {
    config.decoding.strategy = GreedyStrategy{};
  } else if (config.strategy == "beam") {
    config.decoding.strategy = BeamStrategy{config.beam_width};
  } else if (config.strategy == "sample") {
    config.decoding.strategy = SampleStrategy{config.seed, config.temperature};
  } else {
    throw ConfigError("unknown strategy \"" + config.strategy + "\"");
  }
  config.decoding.validate();
}

std::vector<AttributeDescription> load_registry(const RunConfig& config) {
  if (config.keywords) return keyword_registry();
  if (config.registry) return sdlm::load_registry(*config.registry);
  return default_registry();
}

std::vector<AttributeDescription> selected_attributes(const RunConfig& config) {
  auto registry = load_registry(config);
  if (config.attributes.size() == 1 && config.attributes.front() == "all") return registry;
  std::vector<AttributeDescription> out;
  for (const auto& name : config.attributes) {
    if (name == "none") continue;
    out.push_back(find_attribute(registry, name));
  }
  return out;
}

TemplateSpec sdg_template(const RunConfig& config) {
  TemplateSpec spec = config.sdg_template
                          ? load_template(*config.sdg_template, AttributeField::kDescription)
                          : sdlm::sdg_template();
  spec.answers = config.answers;
  spec.validate();
  return spec;
}

TemplateSpec sdb_template(const RunConfig& config) {
  const auto field = config.keywords ? AttributeField::kKeyword : AttributeField::kDescription;
  if (config.sdb_template) return load_template(*config.sdb_template, field);
  return config.keywords ? sdb_keyword_template() : sdlm::sdb_template();
}

std::unique_ptr<LanguageModel> make_model(const RunConfig& config) {
  const int kinds = config.table.has_value() + config.ngram.has_value() +
                    config.ngram_model.has_value() + config.remote.has_value();
  if (kinds != 1) {
    throw ConfigError(kinds == 0 ? "no model configured" : "more than one model configured");
  }
  if (config.table) {
    if (!std::filesystem::exists(*config.table)) {
      throw ConfigError("table model " + config.table->string() + " does not exist");
    }
    return std::make_unique<TableModel>(load_table_model(*config.table));
  }
  if (config.ngram_model) {
    if (!std::filesystem::exists(*config.ngram_model)) {
      throw ConfigError("n-gram model " + config.ngram_model->string() + " does not exist");
    }
    return std::make_unique<NGramModel>(load_ngram_model(*config.ngram_model));
  }
  if (config.ngram) {
    std::ifstream in(config.ngram->corpus);
    if (!in) throw ConfigError("cannot read corpus " + config.ngram->corpus.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    TokenSequence corpus = tokenize(buffer.str());

    // Template words must be in the vocabulary for the model to score
    // self-diagnosis and self-debiasing contexts.
    TokenSequence extra;
    const TemplateSpec sdb = sdb_template(config);
    for (const auto& a : load_registry(config)) {
      if (sdb.field == AttributeField::kKeyword && a.keyword.empty()) continue;
      for (auto& t : sdb_prefix_tokens(sdb, a)) extra.push_back(std::move(t));
      const TemplateSpec sdg = sdg_template(config);
      for (auto& t : tokenize(render(sdg, "", a))) extra.push_back(std::move(t));
    }
    extra.push_back(config.answers.yes);
    extra.push_back(config.answers.no);
    return std::make_unique<NGramModel>(
        train_ngram(corpus, config.ngram->order, config.ngram->smoothing_k, extra));
  }
  RemoteModelOptions options;
  options.endpoint = config.remote->endpoint;
  options.context_limit = config.remote->context_limit;
  options.max_connections = std::max<std::size_t>(config.jobs, 1) * 8;
  return std::make_unique<RemoteModel>(options);
}

std::unique_ptr<AttributeScorer> make_scorer(const RunConfig& config) {
  if (!config.scorer) throw ConfigError("no scorer configured");
  const json& s = *config.scorer;
  if (!s.is_object() || s.size() != 1) {
    throw ConfigError("\"scorer\" must hold exactly one of lexicon, remote");
  }
  const auto& [kind, value] = *s.items().begin();
  if (kind == "lexicon") {
    if (value.is_string()) {
      return std::make_unique<LexiconScorer>(
          load_lexicon(resolve(config, value.get<std::string>())));
    }
    return std::make_unique<LexiconScorer>(parse_lexicon(value));
  }
  if (kind == "remote") {
    RemoteScorerOptions options = parse_remote_scorer_options(
        value.is_string() ? read_json_file(resolve(config, value.get<std::string>())) : value);
    if (options.api_key_env.empty() && std::getenv(kScorerKeyEnv) != nullptr) {
      options.api_key_env = kScorerKeyEnv;
    }
    return std::make_unique<RemoteScorer>(options);
  }
  throw ConfigError("unknown scorer kind \"" + kind + "\"");
}

}  // namespace sdlm::cli
