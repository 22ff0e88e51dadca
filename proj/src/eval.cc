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

#include "sdlm/eval.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

#include "io_util.h"
#include "parallel.h"
#include "sdlm/error.h"

namespace sdlm {

namespace {

using nlohmann::json;

struct Outcome {
  std::string continuation;
  AttributeScores scores;
};

using OutcomeKey = std::pair<std::size_t, std::size_t>;  // (config, prompt)

std::map<OutcomeKey, Outcome> read_checkpoint(const std::filesystem::path& path,
                                              std::span<const DecodingConfig> configs,
                                              std::size_t n_prompts) {
  std::map<OutcomeKey, Outcome> done;
  if (!std::filesystem::exists(path)) return done;
  std::ifstream in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json entry;
    try {
      entry = json::parse(line);
      const auto config = entry.at("config").get<std::size_t>();
      const auto prompt = entry.at("prompt").get<std::size_t>();
      if (config >= configs.size() || prompt >= n_prompts ||
          entry.at("lambda").get<double>() != configs[config].lambda) {
        throw ConfigError("checkpoint " + path.string() + " line " + std::to_string(line_no) +
                          " does not match this run");
      }
      done[{config, prompt}] = {entry.at("continuation").get<std::string>(),
                                entry.at("scores").get<AttributeScores>()};
    } catch (const json::exception&) {
      // A torn final line from an interrupted run is dropped; anything
      // earlier is corruption.
      if (in.peek() != EOF) {
        throw FormatError("checkpoint " + path.string() + ": malformed line", line_no);
      }
    }
  }
  return done;
}

std::string percent(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * p);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  // Count code points so the arrow does not skew the columns.
  std::size_t visible = 0;
  for (unsigned char c : s) visible += (c & 0xC0) != 0x80;
  return visible >= width ? s : std::string(width - visible, ' ') + s;
}

}  // namespace

double empirical_attribute_probability(std::span<const double> scores, double threshold) {
  if (scores.empty()) throw InputError("no texts to evaluate");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InputError("threshold must lie in [0, 1]");
  std::size_t hits = 0;
  for (double s : scores) hits += s >= threshold ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

double empirical_attribute_probability(std::span<const std::string> texts,
                                       const AttributeScorer& scorer,
                                       const std::string& attribute, double threshold) {
  if (texts.empty()) throw InputError("no texts to evaluate");
  std::vector<double> scores;
  scores.reserve(texts.size());
  const std::string attributes[] = {attribute};
  for (const auto& t : texts) scores.push_back(scorer.score(t, attributes).at(attribute));
  return empirical_attribute_probability(scores, threshold);
}

std::vector<EvalReport> run_generation_eval(const LanguageModel& model,
                                            std::span<const PromptRecord> prompts,
                                            std::span<const AttributeDescription> attributes,
                                            std::span<const DecodingConfig> configs,
                                            const AttributeScorer& scorer,
                                            const EvalOptions& options) {
  if (prompts.empty()) throw InputError("no prompts to evaluate");
  if (configs.empty()) throw ConfigError("no decoding configs given");
  if (options.score_attributes.empty()) throw ConfigError("no attributes to score");
  for (const auto& c : configs) c.validate();

  std::map<OutcomeKey, Outcome> done;
  std::ofstream checkpoint;
  std::mutex checkpoint_mutex;
  if (options.checkpoint) {
    done = read_checkpoint(*options.checkpoint, configs, prompts.size());
    checkpoint.open(*options.checkpoint, std::ios::app);
    if (!checkpoint) throw InputError("cannot write checkpoint " + options.checkpoint->string());
  }

  GenerationOptions gen_options;
  gen_options.sdb = options.sdb;

  std::vector<EvalReport> reports;
  reports.reserve(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::vector<Outcome> outcomes(prompts.size());
    internal::parallel_for(prompts.size(), options.jobs, [&](std::size_t i) {
      if (auto it = done.find({c, i}); it != done.end()) {
        outcomes[i] = it->second;
        return;
      }
      GenerationResult gen = generate(model, prompts[i].text, attributes, configs[c], gen_options);
      Outcome outcome{join_tokens(gen.continuation), {}};
      outcome.scores = scorer.score(outcome.continuation, options.score_attributes);
      if (checkpoint.is_open()) {
        json entry = {{"config", c},
                      {"lambda", configs[c].lambda},
                      {"prompt", i},
                      {"continuation", outcome.continuation},
                      {"scores", outcome.scores}};
        std::lock_guard lock(checkpoint_mutex);
        checkpoint << entry.dump() << '\n' << std::flush;
      }
      outcomes[i] = std::move(outcome);
    });

    EvalReport report;
    report.config = configs[c];
    report.total = prompts.size();
    for (const auto& o : outcomes) report.continuations.push_back(o.continuation);
    for (const auto& attribute : options.score_attributes) {
      std::vector<double> scores;
      scores.reserve(outcomes.size());
      for (const auto& o : outcomes) scores.push_back(o.scores.at(attribute));
      AttributeResult r;
      for (double s : scores) r.exhibit_count += s >= options.threshold ? 1 : 0;
      r.probability = empirical_attribute_probability(scores, options.threshold);
      report.attributes[attribute] = r;
    }
    if (options.perplexity_corpus) {
      report.perplexity = perplexity(model, *options.perplexity_corpus, attributes, configs[c],
                                     options.perplexity_window, options.sdb)
                              .perplexity;
    }
    reports.push_back(std::move(report));
  }

  for (auto& report : reports) {
    for (auto& [name, r] : report.attributes) {
      const double base = reports.front().attributes.at(name).probability;
      if (base > 0.0) r.relative_reduction = (base - r.probability) / base;
    }
  }
  return reports;
}

json to_json(const DecodingConfig& config) {
  json out = {{"lambda", config.lambda},
              {"mode", to_string(config.mode)},
              {"strategy", strategy_name(config.strategy)},
              {"floor_epsilon", config.floor_epsilon},
              {"apply_floor_in_generation", config.apply_floor_in_generation},
              {"max_new_tokens", config.max_new_tokens}};
  if (const auto* s = std::get_if<SampleStrategy>(&config.strategy)) {
    out["seed"] = s->seed;
    out["temperature"] = s->temperature;
  }
  return out;
}

json to_json(const EvalReport& report, bool include_continuations) {
  json attributes = json::object();
  for (const auto& [name, r] : report.attributes) {
    attributes[name] = {{"exhibit_count", r.exhibit_count},
                        {"probability", r.probability},
                        {"relative_reduction", r.relative_reduction
                                                   ? json(*r.relative_reduction)
                                                   : json(nullptr)}};
  }
  json out = {{"config", to_json(report.config)},
              {"total", report.total},
              {"attributes", std::move(attributes)},
              {"perplexity", report.perplexity ? json(*report.perplexity) : json(nullptr)}};
  if (include_continuations) out["continuations"] = report.continuations;
  return out;
}

std::string render_table(std::span<const EvalReport> reports,
                         std::span<const std::string> attributes) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Model"};
  for (const auto& a : attributes) header.push_back(a);
  header.push_back("PPL");
  rows.push_back(header);

  for (std::size_t i = 0; i < reports.size(); ++i) {
    const EvalReport& r = reports[i];
    std::ostringstream label;
    label << (i == 0 ? "baseline" : "+SD") << " (lambda=" << r.config.lambda << ", "
          << to_string(r.config.mode) << ", " << strategy_name(r.config.strategy) << ")";
    std::vector<std::string> row{label.str()};
    for (const auto& a : attributes) {
      const AttributeResult& ar = r.attributes.at(a);
      std::string cell = percent(ar.probability);
      if (i > 0 && ar.relative_reduction) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%s%.0f ", *ar.relative_reduction >= 0 ? "↓" : "↑",
                      std::abs(100.0 * *ar.relative_reduction));
        cell = buf + cell;
      }
      row.push_back(cell);
    }
    if (r.perplexity) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.1f", *r.perplexity);
      row.push_back(buf);
    } else {
      row.push_back("-");
    }
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::size_t visible = 0;
      for (unsigned char ch : row[j]) visible += (ch & 0xC0) != 0x80;
      widths[j] = std::max(widths[j], visible);
    }
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < rows[r].size(); ++j) {
      if (j == 0) {
        out << rows[r][j] << std::string(widths[0] - rows[r][j].size(), ' ');
      } else {
        out << "  " << pad(rows[r][j], widths[j]);
      }
    }
    out << '\n';
    if (r == 0) {
      std::size_t total = widths[0];
      for (std::size_t j = 1; j < widths.size(); ++j) total += 2 + widths[j];
      out << std::string(total, '-') << '\n';
    }
  }
  return out.str();
}

}  // namespace sdlm
