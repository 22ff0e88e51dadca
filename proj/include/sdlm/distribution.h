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
#include <span>
#include <vector>

#include "sdlm/vocabulary.h"

namespace sdlm {

// Tolerance on |sum - 1| accepted by the validating constructor.
inline constexpr double kDistributionSumTolerance = 1e-9;

// Probability vector aligned with a Vocabulary. Construction validates:
// entries finite and in [0, 1], sum within kDistributionSumTolerance of 1.
class NextTokenDistribution {
 public:
  explicit NextTokenDistribution(std::vector<double> probs);

  // Divides by the sum first. Throws ValidationError if the sum is not
  // positive or an entry is negative.
  static NextTokenDistribution normalized(std::vector<double> weights);

  static NextTokenDistribution uniform(std::size_t size);

  std::size_t size() const { return probs_.size(); }
  double operator[](TokenId id) const { return probs_[id]; }
  double at(TokenId id) const { return probs_.at(id); }
  std::span<const double> probs() const { return probs_; }
  const std::vector<double>& vector() const { return probs_; }

  // Lowest index wins ties.
  TokenId argmax() const;

  bool operator==(const NextTokenDistribution& other) const = default;

 private:
  std::vector<double> probs_;
};

}  // namespace sdlm
