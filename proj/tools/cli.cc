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

#include "cli.h"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "run_config.h"
#include "sdlm/debias.h"
#include "sdlm/diagnosis.h"
#include "sdlm/error.h"
#include "sdlm/eval.h"
#include "sdlm/prompts.h"

namespace sdlm::cli {

namespace {

using nlohmann::json;

// Flag values; unset optionals leave the config file value in place.
struct Flags {
  std::string config;
  std::string table, ngram_corpus, ngram_model, remote;
  std::optional<std::size_t> ngram_order;
  std::optional<double> ngram_k;
  std::string registry, sdg_template, sdb_template, attributes;
  bool keywords = false;

  std::optional<double> lambda, floor_epsilon, temperature;
  std::string mode, strategy;
  std::optional<std::size_t> beam_width, max_new_tokens, jobs;
  std::optional<std::uint64_t> seed;
  bool no_floor = false;

  bool no_timestamp = false;
  bool skip_malformed = false;
  std::string output;
};

void add_model_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--table", f.table, "Table model file");
  cmd->add_option("--ngram-corpus", f.ngram_corpus, "Train an n-gram model on this text file");
  cmd->add_option("--ngram-order", f.ngram_order, "N-gram order");
  cmd->add_option("--ngram-k", f.ngram_k, "Add-k smoothing constant");
  cmd->add_option("--ngram-model", f.ngram_model, "Saved n-gram model file");
  cmd->add_option("--remote", f.remote, "Remote model endpoint, http://host:port");
  cmd->add_option("--registry", f.registry, "Attribute registry file");
  cmd->add_option("--jobs", f.jobs, "Worker threads");
  cmd->add_flag("--no-timestamp", f.no_timestamp, "Omit generated_at from reports");
  cmd->add_option("-o,--output", f.output, "Write the result here instead of stdout");
}

void add_decoding_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--attributes", f.attributes,
                  "Comma-separated attribute names, 'all' or 'none'");
  cmd->add_flag("--keywords", f.keywords, "Use the keyword attribute list and prefix template");
  cmd->add_option("--sdb-template", f.sdb_template, "Self-debiasing template file");
  cmd->add_option("--lambda", f.lambda, "Decay constant");
  cmd->add_option("--floor", f.floor_epsilon, "Scale floor (default 0.01)");
  cmd->add_flag("--no-floor", f.no_floor, "Disable the scale floor during generation");
  cmd->add_option("--mode", f.mode, "soft or hard")->check(CLI::IsMember({"soft", "hard"}));
  cmd->add_option("--strategy", f.strategy, "greedy, beam or sample")
      ->check(CLI::IsMember({"greedy", "beam", "sample"}));
  cmd->add_option("--beam-width", f.beam_width, "Beam width");
  cmd->add_option("--temperature", f.temperature, "Sampling temperature");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--max-new-tokens", f.max_new_tokens, "Tokens to generate");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto b = item.find_first_not_of(' ');
    auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

RunConfig build_config(const Flags& f) {
  RunConfig c;
  if (!f.config.empty()) apply_config_file(c, f.config);

  const bool model_flag = !f.table.empty() || !f.ngram_corpus.empty() || !f.ngram_model.empty() ||
                          !f.remote.empty();
  if (model_flag) {
    c.table.reset();
    c.ngram.reset();
    c.ngram_model.reset();
    c.remote.reset();
  }
  if (!f.table.empty()) c.table = f.table;
  if (!f.ngram_model.empty()) c.ngram_model = f.ngram_model;
  if (!f.remote.empty()) c.remote = RemoteModelParams{f.remote, std::nullopt};
  if (!f.ngram_corpus.empty()) c.ngram = NGramParams{f.ngram_corpus};
  if (c.ngram && f.ngram_order) c.ngram->order = *f.ngram_order;
  if (c.ngram && f.ngram_k) c.ngram->smoothing_k = *f.ngram_k;

  if (!f.registry.empty()) c.registry = f.registry;
  if (!f.sdg_template.empty()) c.sdg_template = f.sdg_template;
  if (!f.sdb_template.empty()) c.sdb_template = f.sdb_template;
  if (!f.attributes.empty()) c.attributes = split_list(f.attributes);
  if (f.keywords) c.keywords = true;

  if (f.lambda) c.decoding.lambda = *f.lambda;
  if (f.floor_epsilon) c.decoding.floor_epsilon = *f.floor_epsilon;
  if (f.no_floor) c.decoding.apply_floor_in_generation = false;
  if (!f.mode.empty()) c.decoding.mode = parse_scaling_mode(f.mode);
  if (!f.strategy.empty()) c.strategy = f.strategy;
  if (f.beam_width) c.beam_width = *f.beam_width;
  if (f.temperature) c.temperature = *f.temperature;
  if (f.seed) c.seed = *f.seed;
  if (f.max_new_tokens) c.decoding.max_new_tokens = *f.max_new_tokens;
  if (f.jobs) c.jobs = *f.jobs;
  if (c.jobs == 0) throw ConfigError("--jobs must be positive");
  finalize_decoding(c);
  return c;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit(const Flags& f, std::ostream& out, const std::string& text) {
  if (f.output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(f.output, std::ios::binary | std::ios::trunc);
  if (!file) throw InputError("cannot write " + f.output);
  file << text;
}

void stamp(const Flags& f, json& doc) {
  if (!f.no_timestamp) doc["generated_at"] = timestamp();
}

std::vector<PromptRecord> read_records(const std::string& path, const Flags& f,
                                       std::ostream& err) {
  std::vector<std::string> warnings;
  auto records = load_prompts(path, {f.skip_malformed}, &warnings);
  for (const auto& w : warnings) err << "warning: skipped " << w << '\n';
  return records;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"sdlm: self-diagnosis and self-debiasing for language models"};
  app.require_subcommand(1);

  // diagnose
  Flags diag;
  std::string diag_examples, diag_attribute;
  double dev_fraction = 0.05;
  auto* diagnose_cmd = app.add_subcommand("diagnose", "Self-diagnosis study on labeled examples");
  add_model_flags(diagnose_cmd, diag);
  diagnose_cmd->add_option("--examples", diag_examples, "JSON-lines labeled examples")->required();
  diagnose_cmd->add_option("--attribute", diag_attribute, "Attribute name")->required();
  diagnose_cmd->add_option("--dev-fraction", dev_fraction, "Share of examples used to tune tau");
  diagnose_cmd->add_option("--seed", diag.seed, "Shuffle seed");
  diagnose_cmd->add_option("--sdg-template", diag.sdg_template, "Self-diagnosis template file");
  diagnose_cmd->add_flag("--skip-malformed", diag.skip_malformed, "Skip bad example lines");

  // generate
  Flags gen;
  std::string gen_prompt, gen_prompts, gen_trace;
  auto* generate_cmd = app.add_subcommand("generate", "Generate debiased continuations");
  add_model_flags(generate_cmd, gen);
  add_decoding_flags(generate_cmd, gen);
  generate_cmd->add_option("--prompt", gen_prompt, "Prompt text");
  generate_cmd->add_option("--prompts", gen_prompts, "JSON-lines prompts file");
  generate_cmd->add_option("--trace", gen_trace, "Write per-step traces (JSON lines) here");
  generate_cmd->add_flag("--skip-malformed", gen.skip_malformed, "Skip bad prompt lines");

  // perplexity
  Flags ppl;
  std::string ppl_corpus;
  std::size_t ppl_window = 992;
  auto* perplexity_cmd = app.add_subcommand("perplexity", "Windowed debiased perplexity");
  add_model_flags(perplexity_cmd, ppl);
  add_decoding_flags(perplexity_cmd, ppl);
  perplexity_cmd->add_option("--corpus", ppl_corpus, "Whitespace-tokenized text file")
      ->required();
  perplexity_cmd->add_option("--window", ppl_window, "Window length in tokens");

  // eval
  Flags ev;
  std::string ev_prompts, ev_lambdas = "0,10,50,100", ev_score, ev_ppl_corpus, ev_checkpoint,
      ev_table, ev_lexicon;
  std::size_t ev_window = 992;
  auto* eval_cmd = app.add_subcommand("eval", "Attribute probabilities across lambda values");
  add_model_flags(eval_cmd, ev);
  add_decoding_flags(eval_cmd, ev);
  eval_cmd->add_option("--prompts", ev_prompts, "JSON-lines prompts file")->required();
  eval_cmd->add_option("--lambdas", ev_lambdas, "Comma-separated decay constants");
  eval_cmd->add_option("--score-attributes", ev_score,
                       "Attributes to score (default: the six registry attributes)");
  eval_cmd->add_option("--ppl-corpus", ev_ppl_corpus, "Corpus for perplexity");
  eval_cmd->add_option("--window", ev_window, "Perplexity window");
  eval_cmd->add_option("--lexicon", ev_lexicon, "Word-list scorer file (overrides the config)");
  eval_cmd->add_option("--checkpoint", ev_checkpoint, "Resumable progress file");
  eval_cmd->add_option("--table-output", ev_table, "Also write a plain-text table here");
  eval_cmd->add_flag("--skip-malformed", ev.skip_malformed, "Skip bad prompt lines");

  // select-extremes
  Flags sel;
  std::string sel_input, sel_attribute;
  std::size_t sel_n = 0;
  auto* select_cmd =
      app.add_subcommand("select-extremes", "Most and least likely records for an attribute");
  select_cmd->add_option("--input", sel_input, "JSON-lines records")->required();
  select_cmd->add_option("--attribute", sel_attribute, "Attribute name")->required();
  select_cmd->add_option("--n", sel_n, "Records per side")->required();
  select_cmd->add_option("-o,--output", sel.output, "Write JSON lines here instead of stdout");
  select_cmd->add_flag("--skip-malformed", sel.skip_malformed, "Skip bad lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*diagnose_cmd) {
      RunConfig config = build_config(diag);
      const auto registry = load_registry(config);
      const AttributeDescription& attribute = find_attribute(registry, diag_attribute);
      StudyOptions options;
      options.dev_fraction = dev_fraction;
      options.seed = config.seed;
      options.sdg = sdg_template(config);
      options.jobs = config.jobs;
      const auto records = read_records(diag_examples, diag, err);
      const auto examples = labeled_examples(records, attribute.name);
      auto model = make_model(config);
      json report = to_json(run_diagnosis_study(*model, examples, attribute, options));
      stamp(diag, report);
      emit(diag, out, report.dump(2) + "\n");
    } else if (*generate_cmd) {
      if (gen_prompt.empty() == gen_prompts.empty()) {
        throw ConfigError("give exactly one of --prompt or --prompts");
      }
      RunConfig config = build_config(gen);
      const auto attributes = selected_attributes(config);
      GenerationOptions options;
      options.sdb = sdb_template(config);
      options.record_traces = !gen_trace.empty();
      std::vector<std::string> prompts;
      if (!gen_prompt.empty()) {
        prompts.push_back(gen_prompt);
      } else {
        for (auto& r : read_records(gen_prompts, gen, err)) prompts.push_back(std::move(r.text));
      }
      auto model = make_model(config);
      std::ostringstream lines, traces;
      for (std::size_t i = 0; i < prompts.size(); ++i) {
        GenerationResult result =
            generate(*model, prompts[i], attributes, config.decoding, options);
        json line = {{"prompt", result.prompt},
                     {"continuation", join_tokens(result.continuation)},
                     {"tokens", result.continuation},
                     {"total_logprob", result.total_logprob}};
        lines << line.dump() << '\n';
        for (std::size_t s = 0; s < result.per_step_traces.size(); ++s) {
          json t = to_json(result.per_step_traces[s]);
          t["prompt_index"] = i;
          t["step"] = s;
          t["token"] = result.continuation[s];
          traces << t.dump() << '\n';
        }
      }
      if (!gen_trace.empty()) {
        std::ofstream file(gen_trace, std::ios::binary | std::ios::trunc);
        if (!file) throw InputError("cannot write " + gen_trace);
        file << traces.str();
      }
      emit(gen, out, lines.str());
    } else if (*perplexity_cmd) {
      RunConfig config = build_config(ppl);
      const auto attributes = selected_attributes(config);
      std::ifstream in(ppl_corpus);
      if (!in) throw InputError("cannot read " + ppl_corpus);
      std::stringstream buffer;
      buffer << in.rdbuf();
      const TokenSequence corpus = tokenize(buffer.str());
      auto model = make_model(config);
      PerplexityResult result =
          perplexity(*model, corpus, attributes, config.decoding, ppl_window, sdb_template(config));
      json report = {{"perplexity", result.perplexity},
                     {"tokens_scored", result.tokens_scored},
                     {"window", ppl_window},
                     {"attributes", attributes.size()},
                     {"config", to_json(config.decoding)}};
      stamp(ppl, report);
      emit(ppl, out, report.dump(2) + "\n");
    } else if (*eval_cmd) {
      RunConfig config = build_config(ev);
      if (!ev_lexicon.empty()) {
        config.scorer = json{{"lexicon", std::filesystem::absolute(ev_lexicon).string()}};
      }
      const auto attributes = selected_attributes(config);
      std::vector<DecodingConfig> configs;
      for (const auto& l : split_list(ev_lambdas)) {
        DecodingConfig d = config.decoding;
        try {
          d.lambda = std::stod(l);
        } catch (const std::exception&) {
          throw ConfigError("bad lambda \"" + l + "\"");
        }
        d.validate();
        configs.push_back(d);
      }
      EvalOptions options;
      if (ev_score.empty()) {
        for (const auto& a : default_registry()) options.score_attributes.push_back(a.name);
      } else {
        options.score_attributes = split_list(ev_score);
      }
      options.jobs = config.jobs;
      options.perplexity_window = ev_window;
      options.sdb = sdb_template(config);
      if (!ev_checkpoint.empty()) options.checkpoint = ev_checkpoint;
      if (!ev_ppl_corpus.empty()) {
        std::ifstream in(ev_ppl_corpus);
        if (!in) throw InputError("cannot read " + ev_ppl_corpus);
        std::stringstream buffer;
        buffer << in.rdbuf();
        options.perplexity_corpus = tokenize(buffer.str());
      }
      const auto prompts = read_records(ev_prompts, ev, err);
      auto scorer = make_scorer(config);
      auto model = make_model(config);
      const auto reports =
          run_generation_eval(*model, prompts, attributes, configs, *scorer, options);
      json doc = {{"prompts", prompts.size()}, {"reports", json::array()}};
      for (const auto& r : reports) doc["reports"].push_back(to_json(r));
      stamp(ev, doc);
      emit(ev, out, doc.dump(2) + "\n");
      if (!ev_table.empty()) {
        std::ofstream file(ev_table, std::ios::binary | std::ios::trunc);
        if (!file) throw InputError("cannot write " + ev_table);
        file << render_table(reports, options.score_attributes);
      }
    } else if (*select_cmd) {
      const auto records = read_records(sel_input, sel, err);
      std::ostringstream lines;
      for (const auto& e : select_extremes(records, sel_attribute, sel_n)) {
        // Prompt-record layout, so the output feeds `diagnose --examples`.
        json line = {{"text", e.text},
                     {"scores", {{sel_attribute, e.silver_score}}},
                     {"label", e.silver_label}};
        lines << line.dump() << '\n';
      }
      emit(sel, out, lines.str());
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const RemoteError& e) {
    err << "remote error: " << e.what() << '\n';
    return kExitRemote;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace sdlm::cli
