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

#include "sdlm/diagnosis.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "parallel.h"
#include "random_util.h"
#include "sdlm/error.h"

namespace sdlm {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a == 0) throw InputError("no scores given");
  if (a != b) {
    throw InputError("got " + std::to_string(a) + " scores but " + std::to_string(b) + " labels");
  }
}

TokenId answer_id(const Vocabulary& vocab, const std::string& word) {
  auto id = vocab.find(word);
  if (tokenize(word).size() != 1 || !id) {
    throw ConfigError("answer word \"" + word + "\" is not a single vocabulary token");
  }
  return *id;
}

}  // namespace

DiagnosisScore diagnose(const LanguageModel& model, std::string_view text,
                        const AttributeDescription& attribute, const TemplateSpec& sdg) {
  if (text.empty()) throw InputError("self-diagnosis input text is empty");
  const TokenId yes = answer_id(model.vocabulary(), sdg.answers.yes);
  const TokenId no = answer_id(model.vocabulary(), sdg.answers.no);

  TokenSequence context = tokenize(render(sdg, text, attribute));
  NextTokenDistribution p = model.next_token_distribution(context);
  DiagnosisScore score{0.0, p[yes], p[no]};
  const double mass = score.p_yes + score.p_no;
  if (!(mass > 0.0)) {
    throw DegenerateModelError("model assigns zero probability to both \"" + sdg.answers.yes +
                               "\" and \"" + sdg.answers.no + "\"");
  }
  score.value = std::clamp(score.p_yes / mass, 0.0, 1.0);
  return score;
}

double classification_accuracy(std::span<const double> scores, const std::vector<bool>& labels,
                               double tau) {
  check_lengths(scores.size(), labels.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if ((scores[i] >= tau) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

CalibrationResult calibrate_threshold(std::span<const double> scores,
                                      const std::vector<bool>& labels) {
  check_lengths(scores.size(), labels.size());
  CalibrationResult best{0.0, -1.0};
  for (int step = 0; step <= kCalibrationGridSteps; ++step) {
    const double tau = static_cast<double>(step) / kCalibrationGridSteps;
    const double accuracy = classification_accuracy(scores, labels, tau);
    if (accuracy > best.dev_accuracy) best = {tau, accuracy};
  }
  return best;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InputError("correlation inputs differ in length (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) throw InputError("correlation needs at least two points");

  const double n = static_cast<double>(a.size());
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;

  double cov = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (!(var_a > 0.0) || !(var_b > 0.0)) {
    throw UndefinedCorrelationError("correlation is undefined for a constant input");
  }
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

StudyReport run_diagnosis_study(const LanguageModel& model,
                                std::span<const LabeledExample> examples,
                                const AttributeDescription& attribute,
                                const StudyOptions& options) {
  if (examples.empty()) throw InputError("diagnosis study needs at least one example");
  if (!(options.dev_fraction > 0.0 && options.dev_fraction < 1.0)) {
    throw InputError("dev_fraction must lie in (0, 1)");
  }
  const std::size_t n = examples.size();
  const auto n_dev =
      static_cast<std::size_t>(std::llround(options.dev_fraction * static_cast<double>(n)));
  if (n_dev == 0 || n_dev >= n) {
    throw InputError("cannot split " + std::to_string(n) + " examples with dev_fraction " +
                     std::to_string(options.dev_fraction));
  }

  StudyReport report;
  report.attribute = attribute.name;
  report.scores.resize(n);
  internal::parallel_for(n, options.jobs, [&](std::size_t i) {
    report.scores[i] = diagnose(model, examples[i].text, attribute, options.sdg).value;
  });

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(options.seed);
  internal::shuffle(order, rng);

  std::vector<double> dev_scores, test_scores;
  std::vector<bool> dev_labels, test_labels;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = order[j];
    auto& s = j < n_dev ? dev_scores : test_scores;
    auto& l = j < n_dev ? dev_labels : test_labels;
    s.push_back(report.scores[i]);
    l.push_back(examples[i].silver_label);
  }

  CalibrationResult calibration = calibrate_threshold(dev_scores, dev_labels);
  report.n_dev = n_dev;
  report.n_test = n - n_dev;
  report.tau = calibration.tau;
  report.dev_accuracy = calibration.dev_accuracy;
  report.test_accuracy = classification_accuracy(test_scores, test_labels, calibration.tau);

  std::vector<double> silver(n);
  for (std::size_t i = 0; i < n; ++i) silver[i] = examples[i].silver_score;
  try {
    report.pcc = pearson_correlation(report.scores, silver);
  } catch (const UndefinedCorrelationError&) {
    report.pcc.reset();
  }
  return report;
}

nlohmann::json to_json(const StudyReport& report) {
  nlohmann::json out;
  out["attribute"] = report.attribute;
  out["n_dev"] = report.n_dev;
  out["n_test"] = report.n_test;
  out["tau"] = report.tau;
  out["dev_accuracy"] = report.dev_accuracy;
  out["test_accuracy"] = report.test_accuracy;
  out["pcc"] = report.pcc ? nlohmann::json(*report.pcc) : nlohmann::json(nullptr);
  return out;
}

}  // namespace sdlm
