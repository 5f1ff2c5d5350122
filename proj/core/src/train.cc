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

#include "hpac/train.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "hpac/adam.h"

namespace hpac {

double LearningRate(int step, const TrainConfig& cfg) {
  // Short runs still reach the cosine tail.
  const int warmup = std::min(cfg.warmup, cfg.steps / 4);
  if (step < warmup) {
    return cfg.peak_lr * (step + 1) / static_cast<double>(warmup);
  }
  const int span = std::max(1, cfg.steps - warmup);
  const double t = std::min(1.0, (step - warmup) / static_cast<double>(span));
  return cfg.peak_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

ModelWeights<float> Train(const ModelConfig& config,
                          std::span<const ImageBuffer> corpus,
                          const TrainConfig& cfg, TrainReport* report,
                          const TrainLogFn& log) {
  config.Validate();
  if (corpus.empty()) throw std::invalid_argument("empty training corpus");
  if (cfg.crop < config.patch || cfg.crop % config.patch != 0) {
    throw std::invalid_argument("crop size must be a multiple of the patch");
  }
  if (cfg.batch < 1 || cfg.steps < 0) throw std::invalid_argument("train config");
  for (const auto& im : corpus) {
    if (im.width < cfg.crop || im.height < cfg.crop ||
        im.channels != config.channels_in) {
      throw std::invalid_argument("corpus image smaller than the crop or "
                                  "with the wrong channel count");
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  ModelWeights<float> w = InitWeights<float>(config, cfg.seed);
  std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + 7);
  AdamState<float> adam;
  std::vector<Tensor*> params;
  w.ForEach([&params](const std::string&, Tensor& t) { params.push_back(&t); });
  const PatchLayout layout = MakeLayout(cfg.batch, cfg.crop, cfg.crop,
                                        config.channels_in, config.patch);
  double first_loss = -1.0;
  std::vector<ImageBuffer> batch(cfg.batch);
  for (int step = 0; step < cfg.steps; ++step) {
    for (int b = 0; b < cfg.batch; ++b) {
      const ImageBuffer& src = corpus[std::uniform_int_distribution<size_t>(
          0, corpus.size() - 1)(rng)];
      const int y0 = std::uniform_int_distribution<int>(0, src.height - cfg.crop)(rng);
      const int x0 = std::uniform_int_distribution<int>(0, src.width - cfg.crop)(rng);
      ImageBuffer& dst = batch[b];
      dst.width = dst.height = cfg.crop;
      dst.channels = src.channels;
      dst.bit_depth = src.bit_depth;
      dst.samples.resize(static_cast<size_t>(cfg.crop) * cfg.crop * src.channels);
      for (int y = 0; y < cfg.crop; ++y) {
        const uint16_t* row = &src.samples[src.index(y0 + y, x0, 0)];
        std::copy(row, row + cfg.crop * src.channels, &dst.samples[dst.index(y, 0, 0)]);
      }
    }
    // Crops share the first image's depth; corpora are single-depth.
    const PixelRange range = config.pixel_range(batch[0].bit_depth);
    const Tensor x = ImagesToPatches<float>(batch, layout, range);
    ForwardTrace<float> trace;
    const Tensor head = HpacForward(w, x, layout, &trace);
    Tensor grad_head(head.shape());
    const double n = static_cast<double>(cfg.batch) * cfg.crop * cfg.crop *
                     config.channels_in;
    const NllResult nll =
        MixtureNll(head, batch, layout, range, config.mixtures, &grad_head, 1.0 / n);
    const double loss = nll.bits / n;
    if (first_loss < 0) first_loss = loss;
    if (!std::isfinite(loss) || loss > 4.0 * first_loss + 32.0) {
      throw NumericError("training diverged at step " + std::to_string(step) +
                         " (loss " + std::to_string(loss) + ")");
    }
    ModelWeights<float> grads = w.ZerosLike();
    HpacBackward(w, trace, grad_head, &grads);
    std::vector<const Tensor*> gptr;
    grads.ForEach([&gptr](const std::string&, const Tensor& t) { gptr.push_back(&t); });
    const double lr = LearningRate(step, cfg);
    AdamStep(params, gptr, &adam, lr);
    if (report) report->loss.push_back(loss);
    if (log) log(step, loss, lr);
  }
  if (report) {
    report->seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count();
  }
  return w;
}

double EvaluateBpsp(const ModelWeights<float>& weights,
                    std::span<const ImageBuffer> images) {
  double bits = 0.0, samples = 0.0;
  for (const ImageBuffer& im : images) {
    const PatchLayout layout = MakeLayout(1, im.height, im.width, im.channels,
                                          weights.config.patch);
    const PixelRange range = weights.config.pixel_range(im.bit_depth);
    const std::span<const ImageBuffer> one(&im, 1);
    const Tensor x = ImagesToPatches<float>(one, layout, range);
    const Tensor head = HpacForward(weights, x, layout, nullptr);
    const NllResult r = MixtureNll(head, one, layout, range,
                                   weights.config.mixtures);
    bits += r.bits;
    samples += r.samples;
  }
  return samples > 0 ? bits / samples : 0.0;
}

}  // namespace hpac
