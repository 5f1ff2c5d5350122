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

#ifndef HPAC_SARPFT_H_
#define HPAC_SARPFT_H_

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "hpac/adapt.h"
#include "hpac/image.h"
#include "hpac/model.h"

namespace hpac {

// Per-patch bits over real pixels, grid_h x grid_w, row-major.
struct RateMap {
  int grid_h = 0;
  int grid_w = 0;
  std::vector<double> bits;

  double at(int i, int j) const { return bits[i * grid_w + j]; }
};

// One parallel forward of `weights` over the image.
RateMap ComputeRateMap(const ModelWeights<float>& weights,
                       const ImageBuffer& image);

// (h + 1) x (w + 1) prefix sums.
class IntegralImage {
 public:
  explicit IntegralImage(const RateMap& m);
  int grid_h() const { return h_; }
  int grid_w() const { return w_; }
  // Sum over rows [r1, r2) and columns [c1, c2).
  double RectSum(int r1, int c1, int r2, int c2) const {
    return at(r2, c2) - at(r1, c2) - at(r2, c1) + at(r1, c1);
  }

 private:
  double at(int r, int c) const { return s_[r * (w_ + 1) + c]; }
  int h_;
  int w_;
  std::vector<double> s_;
};

struct Schedule {
  double b = 0.2;  // initial area ratio
  double d = 0.1;  // final full-image fraction
  double e = 1.0;  // growth exponent
  int steps = 50;
  void Validate() const;
};

// alpha_t = b + (1 - b) * smoothstep(t / (T (1 - d)))^e.
double ScheduleAlpha(double t, const Schedule& s);

// Region size in patches for area ratio alpha, following the grid aspect.
std::pair<int, int> TargetShape(double alpha, int grid_h, int grid_w);

struct RegionPos {
  int i = 0;
  int j = 0;
  bool operator==(const RegionPos&) const = default;
};

// Top-left corner of the h x w placement with the largest sum; ties go to
// the smallest (i, j). Sizes are clamped to the grid.
RegionPos FindRegion(const IntegralImage& integral, int h, int w);

// Patch-aligned crop [i, i + h) x [j, j + w) (patch units), clipped to the
// real image.
ImageBuffer CropPatches(const ImageBuffer& image, int patch, int i, int j,
                        int h, int w);

enum class RegionStrategy {
  kRateGuided,
  kRandom,
  kFullImage,
};

struct FineTuneOptions {
  Schedule schedule;
  double lr = 1e-2;
  AdapterConfig adapter;
  RegionStrategy strategy = RegionStrategy::kRateGuided;
  uint64_t seed = 0x5eed;
};

struct FineTuneStats {
  std::vector<double> loss;  // bits per sample, per step
  std::vector<RegionPos> regions;
  std::vector<std::pair<int, int>> shapes;
  double seconds = 0.0;
};

// Optimizes adapters on one image by minimizing (image bits + parameter
// bits) / N with Adam; the base weights stay frozen. Returns unquantized
// adapters. Throws NumericError if the loss stops being finite.
AdapterSet SarpFineTune(const ModelWeights<float>& base,
                        const ImageBuffer& image, const FineTuneOptions& opts,
                        FineTuneStats* stats = nullptr);

// Same, starting from given adapters.
AdapterSet SarpFineTune(const ModelWeights<float>& base,
                        const ImageBuffer& image, const FineTuneOptions& opts,
                        AdapterSet init, FineTuneStats* stats);

}  // namespace hpac

#endif  // HPAC_SARPFT_H_
