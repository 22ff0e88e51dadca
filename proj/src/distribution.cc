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

#include "sdlm/distribution.h"

#include <cmath>
#include <string>

#include "sdlm/error.h"

namespace sdlm {

namespace {

double checked_sum(const std::vector<double>& probs) {
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    double p = probs[i];
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw ValidationError("probability at index " + std::to_string(i) +
                            " is outside [0, 1]: " + std::to_string(p));
    }
    sum += p;
  }
  return sum;
}

}  // namespace

NextTokenDistribution::NextTokenDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw ValidationError("empty distribution");
  double sum = checked_sum(probs_);
  if (std::abs(sum - 1.0) > kDistributionSumTolerance) {
    throw ValidationError("distribution sums to " + std::to_string(sum) + ", not 1");
  }
}

NextTokenDistribution NextTokenDistribution::normalized(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ValidationError("negative or non-finite weight");
    sum += w;
  }
  if (!(sum > 0.0)) throw ValidationError("weights sum to zero");
  for (double& w : weights) w /= sum;
  return NextTokenDistribution(std::move(weights));
}

NextTokenDistribution NextTokenDistribution::uniform(std::size_t size) {
  return NextTokenDistribution(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

TokenId NextTokenDistribution::argmax() const {
  TokenId best = 0;
  for (TokenId i = 1; i < probs_.size(); ++i) {
    if (probs_[i] > probs_[best]) best = i;
  }
  return best;
}

}  // namespace sdlm
