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

#ifndef HPAC_CSI_H_
#define HPAC_CSI_H_

#include <cstdint>
#include <span>
#include <vector>

#include "hpac/model.h"
#include "hpac/scan.h"
#include "hpac/tensor.h"

namespace hpac {

// Dense kernel weights restricted to the active taps of a mask:
// weight [Co, Ci, N_A], taps in row-major order.
struct ActiveWeights {
  int64_t out_channels = 0;
  int64_t in_channels = 0;
  std::vector<TapOffset> taps;
  Tensor weight;

  int num_active() const { return static_cast<int>(taps.size()); }
};

// weight [Co, Ci, k, k] (or [C, 1, k, k] for depthwise).
ActiveWeights ExtractActive(const Tensor& weight, const MaskKernel& mask);

struct CachePosition {
  int64_t patch = 0;
  int r = 0;
  int c = 0;
};

// Reads `cache` [patches, P, P, Ci] at the active taps around each position
// (zero outside the patch) and multiplies with the active weights:
// Y[n, o] = bias[o] + sum_{c, a} X'[n, c, a] * W'[o, c, a].
Tensor GatherMultiply(const Tensor& cache,
                      std::span<const CachePosition> positions,
                      const ActiveWeights& active, const Tensor* bias);

struct CsiOptions {
#ifdef NDEBUG
  bool check_reads = false;
#else
  bool check_reads = true;
#endif
};

// Group-sequential evaluation of the model for one image. Step(s) returns
// the head outputs at every group-s position of every patch; the caller
// then commits the samples of those positions. Encoder and decoder both run
// this path, so their probabilities agree bit for bit.
class CsiEngine {
 public:
  CsiEngine(const ModelWeights<float>& weights, int height, int width,
            int bit_depth, CsiOptions opts = {});

  const PatchLayout& layout() const { return layout_; }
  const GroupSchedule& schedule() const { return schedule_; }
  int num_steps() const { return schedule_.num_steps(); }
  int next_step() const { return next_step_; }

  // Positions of step s: patch-major, then group member order.
  std::vector<CachePosition> StepPositions(int s) const;
  // Image coordinates of a position; false for padding.
  bool ToImage(const CachePosition& pos, int* y, int* x) const;

  // Head outputs [N_eff, Cin * 3K] for step s, which must equal
  // next_step(). Throws std::logic_error when called out of order.
  const Tensor& Step(int s);
  // Samples for the last Step's positions, N_eff * Cin in position order.
  // Values at padded positions are ignored.
  void Commit(std::span<const uint16_t> samples);

 private:
  void CheckRead(const std::vector<uint8_t>& valid, int64_t patch, int r,
                 int c, const char* what) const;
  Tensor DepthwiseAt(const Tensor& cache, const std::vector<uint8_t>* valid,
                     std::span<const CachePosition> pos,
                     const ActiveWeights& aw, const Tensor& bias) const;

  const ModelWeights<float>& w_;
  CsiOptions opts_;
  PatchLayout layout_;
  GroupSchedule schedule_;
  PixelRange range_;
  ActiveWeights embed_;
  std::vector<ActiveWeights> lcm_dw_;
  Tensor input_;                  // normalized samples, patch layout
  std::vector<uint8_t> input_ok_;  // committed
  std::vector<Tensor> lcm_cache_;  // W_A LN(x) per block
  std::vector<uint8_t> lcm_ok_;    // shared by all blocks
  std::vector<CachePosition> cur_pos_;
  Tensor out_;
  int next_step_ = 0;
  bool pending_commit_ = false;
};

}  // namespace hpac

#endif  // HPAC_CSI_H_
