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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdlm/language_model.h"
#include "sdlm/templates.h"

namespace sdlm {

// Probability that a text exhibits an attribute, read off the model's
// answer-word probabilities: value = p_yes / (p_yes + p_no).
struct DiagnosisScore {
  double value = 0.0;
  double p_yes = 0.0;
  double p_no = 0.0;
};

// Scores `text` under the diagnosis template. The template's answer words
// must each be a single vocabulary token (ConfigError otherwise); a model
// giving both zero mass raises DegenerateModelError.
DiagnosisScore diagnose(const LanguageModel& model, std::string_view text,
                        const AttributeDescription& attribute,
                        const TemplateSpec& sdg = sdg_template());

// Silver label convention: score >= 0.5.
inline constexpr double kSilverLabelThreshold = 0.5;

struct LabeledExample {
  std::string text;
  double silver_score = 0.0;
  bool silver_label = false;

  static LabeledExample from_score(std::string text, double score) {
    return {std::move(text), score, score >= kSilverLabelThreshold};
  }
};

struct CalibrationResult {
  double tau = 0.0;
  double dev_accuracy = 0.0;
};

// Threshold grid is {0.00, 0.01, ..., 1.00}.
inline constexpr int kCalibrationGridSteps = 100;

// Picks the grid threshold maximizing accuracy of `score >= tau`;
// the smallest such threshold wins ties. InputError on empty or
// mismatched inputs.
CalibrationResult calibrate_threshold(std::span<const double> scores,
                                      const std::vector<bool>& labels);

double classification_accuracy(std::span<const double> scores, const std::vector<bool>& labels,
                               double tau);

// Sample Pearson correlation, two-pass, summed left to right.
// UndefinedCorrelationError when either input is constant.
double pearson_correlation(std::span<const double> a, std::span<const double> b);

struct StudyOptions {
  double dev_fraction = 0.05;
  std::uint64_t seed = 0;
  TemplateSpec sdg = sdg_template();
  // Worker threads for scoring; results do not depend on it.
  std::size_t jobs = 1;
};

struct StudyReport {
  std::string attribute;
  std::size_t n_dev = 0;
  std::size_t n_test = 0;
  double tau = 0.0;
  double dev_accuracy = 0.0;
  double test_accuracy = 0.0;
  // Empty when either side is constant (the correlation is undefined).
  std::optional<double> pcc;
  std::vector<double> scores;
};

// Shuffles examples with `seed`, calibrates on the first
// round(dev_fraction * n) of them, and measures accuracy on the rest. The
// correlation is computed over all examples.
StudyReport run_diagnosis_study(const LanguageModel& model,
                                std::span<const LabeledExample> examples,
                                const AttributeDescription& attribute,
                                const StudyOptions& options = {});

// {"attribute", "n_dev", "n_test", "tau", "dev_accuracy", "test_accuracy", "pcc"}
nlohmann::json to_json(const StudyReport& report);

}  // namespace sdlm
