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

#include "hpac/sarpft.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>

#include "hpac/adam.h"

namespace hpac {

RateMap ComputeRateMap(const ModelWeights<float>& weights,
                       const ImageBuffer& image) {
  const ModelConfig& cfg = weights.config;
  const PatchLayout layout = MakeLayout(1, image.height, image.width,
                                        image.channels, cfg.patch);
  const PixelRange range = cfg.pixel_range(image.bit_depth);
  const std::span<const ImageBuffer> one(&image, 1);
  const Tensor x = ImagesToPatches<float>(one, layout, range);
  const Tensor head = HpacForward(weights, x, layout, nullptr);
  const NllResult nll = MixtureNll(head, one, layout, range, cfg.mixtures);
  RateMap m;
  m.grid_h = layout.grid_h();
  m.grid_w = layout.grid_w();
  m.bits = nll.patch_bits;
  return m;
}

IntegralImage::IntegralImage(const RateMap& m)
    : h_(m.grid_h), w_(m.grid_w), s_((m.grid_h + 1) * (m.grid_w + 1), 0.0) {
  for (int r = 0; r < h_; ++r) {
    for (int c = 0; c < w_; ++c) {
      s_[(r + 1) * (w_ + 1) + c + 1] =
          m.at(r, c) + at(r, c + 1) + at(r + 1, c) - at(r, c);
    }
  }
}

void Schedule::Validate() const {
  if (!(b >= 0 && b <= 1)) throw std::invalid_argument("schedule b outside [0, 1]");
  if (!(d >= 0 && d < 1)) throw std::invalid_argument("schedule d outside [0, 1)");
  if (!(e > 0)) throw std::invalid_argument("schedule e must be > 0");
  if (steps < 0) throw std::invalid_argument("schedule steps must be >= 0");
}

double ScheduleAlpha(double t, const Schedule& s) {
  s.Validate();
  if (s.steps == 0) return 1.0;
  const double tp = std::clamp(t / (s.steps * (1.0 - s.d)), 0.0, 1.0);
  const double smooth = tp * tp * (3.0 - 2.0 * tp);
  return s.b + (1.0 - s.b) * std::pow(smooth, s.e);
}

std::pair<int, int> TargetShape(double alpha, int grid_h, int grid_w) {
  if (grid_h < 1 || grid_w < 1) throw std::invalid_argument("empty grid");
  alpha = std::clamp(alpha, 0.0, 1.0);
  const double area = alpha * grid_h * grid_w;
  const int h = std::clamp(
      static_cast<int>(std::lround(std::sqrt(area * grid_h / grid_w))), 1,
      grid_h);
  const int w = std::clamp(static_cast<int>(std::lround(area / h)), 1, grid_w);
  return {h, w};
}

RegionPos FindRegion(const IntegralImage& integral, int h, int w) {
  h = std::clamp(h, 1, integral.grid_h());
  w = std::clamp(w, 1, integral.grid_w());
  RegionPos best;
  double best_sum = -1.0;
  for (int i = 0; i + h <= integral.grid_h(); ++i) {
    for (int j = 0; j + w <= integral.grid_w(); ++j) {
      const double s = integral.RectSum(i, j, i + h, j + w);
      if (s > best_sum) {
        best_sum = s;
        best = {i, j};
      }
    }
  }
  return best;
}

ImageBuffer CropPatches(const ImageBuffer& image, int patch, int i, int j,
                        int h, int w) {
  const int y0 = i * patch, x0 = j * patch;
  const int y1 = std::min(image.height, (i + h) * patch);
  const int x1 = std::min(image.width, (j + w) * patch);
  if (y0 >= y1 || x0 >= x1 || i < 0 || j < 0) {
    throw std::invalid_argument("crop region outside the image");
  }
  ImageBuffer out;
  out.width = x1 - x0;
  out.height = y1 - y0;
  out.channels = image.channels;
  out.bit_depth = image.bit_depth;
  out.samples.resize(static_cast<size_t>(out.width) * out.height *
                     out.channels);
  for (int y = 0; y < out.height; ++y) {
    const uint16_t* src = &image.samples[image.index(y0 + y, x0, 0)];
    std::copy(src, src + out.width * out.channels,
              &out.samples[out.index(y, 0, 0)]);
  }
  return out;
}

AdapterSet SarpFineTune(const ModelWeights<float>& base,
                        const ImageBuffer& image, const FineTuneOptions& opts,
                        FineTuneStats* stats) {
  return SarpFineTune(base, image, opts,
                      AdapterSet::Create(base.config, opts.adapter, opts.seed),
                      stats);
}

AdapterSet SarpFineTune(const ModelWeights<float>& base,
                        const ImageBuffer& image, const FineTuneOptions& opts,
                        AdapterSet phi, FineTuneStats* stats) {
  const auto t0 = std::chrono::steady_clock::now();
  opts.schedule.Validate();
  const ModelConfig& cfg = base.config;
  const int p = cfg.patch;
  const PixelRange range = cfg.pixel_range(image.bit_depth);
  const double n_total = static_cast<double>(image.width) * image.height *
                         image.channels;
  const int gh = (image.height + p - 1) / p;
  const int gw = (image.width + p - 1) / p;
  const int steps = opts.schedule.steps;
  if (steps == 0) return phi;

  std::unique_ptr<IntegralImage> integral;
  if (opts.strategy == RegionStrategy::kRateGuided) {
    integral = std::make_unique<IntegralImage>(ComputeRateMap(base, image));
  }
  std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ull);
  const double w = phi.config().step;
  const double s = phi.config().prior_scale;
  AdamState<float> adam;
  std::vector<Tensor*> params = phi.Factors();
  std::vector<Tensor> grads;
  for (Tensor* t : params) grads.emplace_back(t->shape());

  // Step t of T (0-based): the first step uses alpha = b and the last d*T
  // steps cover the whole image.
  for (int t = 0; t < steps; ++t) {
    int i = 0, j = 0, h = gh, wd = gw;
    if (opts.strategy != RegionStrategy::kFullImage) {
      const double alpha = ScheduleAlpha(t, opts.schedule);
      std::tie(h, wd) = TargetShape(alpha, gh, gw);
      if (opts.strategy == RegionStrategy::kRateGuided) {
        const RegionPos r = FindRegion(*integral, h, wd);
        i = r.i;
        j = r.j;
      } else {
        i = std::uniform_int_distribution<int>(0, gh - h)(rng);
        j = std::uniform_int_distribution<int>(0, gw - wd)(rng);
      }
    }
    const ImageBuffer crop = CropPatches(image, p, i, j, h, wd);
    for (Tensor& g : grads) g.Fill(0.0f);

    // Likelihood term with straight-through quantized adapters.
    const AdapterSet quant = QuantizeAdapters(phi);
    const ModelWeights<float> merged = MergeAdapters(base, quant);
    const PatchLayout layout =
        MakeLayout(1, crop.height, crop.width, crop.channels, p);
    const std::span<const ImageBuffer> one(&crop, 1);
    const Tensor x = ImagesToPatches<float>(one, layout, range);
    ForwardTrace<float> trace;
    const Tensor head = HpacForward(merged, x, layout, &trace);
    Tensor grad_head(head.shape());
    const NllResult nll = MixtureNll(head, one, layout, range, cfg.mixtures,
                                     &grad_head, 1.0 / n_total);
    ModelWeights<float> wgrad = merged.ZerosLike();
    HpacBackward(merged, trace, grad_head, &wgrad, {.sites_only = true});
    size_t gi = 0;
    for (const SiteAdapter& sa : quant.sites()) {
      const Tensor& gw_site = SiteWeight(wgrad, sa.block, sa.site);
      if (sa.depthwise()) {
        DeltaDepthwiseBackward(gw_site, sa.a, sa.c, sa.d, &grads[gi],
                               &grads[gi + 1], &grads[gi + 2]);
        gi += 3;
      } else {
        DeltaLinearBackward(gw_site, sa.a, sa.b, &grads[gi], &grads[gi + 1]);
        gi += 2;
      }
    }
    // Rate term on noisy values.
    double param_bits = 0.0;
    for (size_t k = 0; k < params.size(); ++k) {
      const Tensor noisy = NoiseSample(*params[k], w, &rng);
      param_bits += SurrogateParamBits(noisy.span(), w, s, grads[k].span(),
                                       1.0 / n_total);
    }
    const double loss = (nll.bits + param_bits) / n_total;
    if (!std::isfinite(loss)) {
      throw NumericError("fine-tuning loss became non-finite at step " +
                         std::to_string(t) + " (image bits " +
                         std::to_string(nll.bits) + ", parameter bits " +
                         std::to_string(param_bits) + ")");
    }
    std::vector<const Tensor*> gptr;
    for (const Tensor& g : grads) gptr.push_back(&g);
    AdamStep(params, gptr, &adam, opts.lr);
    if (stats) {
      stats->loss.push_back(loss);
      stats->regions.push_back({i, j});
      stats->shapes.emplace_back(h, wd);
    }
  }
  if (stats) {
    stats->seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
  }
  return phi;
}

}  // namespace hpac
