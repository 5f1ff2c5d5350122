// Copyright 2026 The HPAC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HPAC_TRAIN_H_
#define HPAC_TRAIN_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hpac/image.h"
#include "hpac/model.h"

namespace hpac {

struct TrainConfig {
  int steps = 2000;
  int batch = 8;
  int crop = 32;  // multiple of P
  double peak_lr = 1e-3;
  int warmup = 500;  // capped at steps / 4
  uint64_t seed = 1;
};

// Linear warmup to the peak, then cosine decay to zero at `steps`.
double LearningRate(int step, const TrainConfig& cfg);

struct TrainReport {
  std::vector<double> loss;  // bits per sample per step
  double seconds = 0.0;
};

using TrainLogFn = std::function<void(int step, double loss, double lr)>;

// Trains from a seeded initialization on random crops of `corpus`. Throws
// NumericError if the loss diverges.
ModelWeights<float> Train(const ModelConfig& config,
                          std::span<const ImageBuffer> corpus,
                          const TrainConfig& cfg, TrainReport* report = nullptr,
                          const TrainLogFn& log = nullptr);

// Parallel-forward bits per subpixel over the images.
double EvaluateBpsp(const ModelWeights<float>& weights,
                    std::span<const ImageBuffer> images);

}  // namespace hpac

#endif  // HPAC_TRAIN_H_
