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

#ifndef HPAC_MODEL_H_
#define HPAC_MODEL_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "hpac/image.h"
#include "hpac/kernels.h"
#include "hpac/prob.h"
#include "hpac/scan.h"
#include "hpac/tensor.h"

namespace hpac {

struct ModelConfig {
  int depth = 3;
  int channels = 128;
  int mlp_ratio = 4;
  int embed_kernel = 3;
  int block_kernel = 7;
  int spm_kernel = 3;
  int mixtures = 5;
  int patch = 32;
  int delta = 2;
  int bit_depth = 8;
  double v_min = -1.0;
  double v_max = 1.0;
  int channels_in = 1;

  static ModelConfig Default(int channels_in = 1);
  static ModelConfig Fast(int channels_in = 1);
  // Desk-scale training size.
  static ModelConfig Tiny(int channels_in = 1);

  ScanSpec scan() const { return {patch, delta}; }
  PixelRange pixel_range(int b) const { return {b, v_min, v_max}; }
  int head_outputs() const { return channels_in * 3 * mixtures; }
  void Validate() const;
  bool operator==(const ModelConfig&) const = default;
};

template <typename T>
struct BlockWeights {
  // LCM: masked gating inside the patch.
  BasicTensor<T> lcm_ln_g, lcm_ln_b;
  BasicTensor<T> lcm_wa, lcm_ba;  // [C, C], [C]
  BasicTensor<T> lcm_wv, lcm_bv;
  BasicTensor<T> lcm_dw, lcm_dwb;  // [C, 1, k, k], [C]
  BasicTensor<T> lcm_gamma;
  // MLP.
  BasicTensor<T> mlp_ln_g, mlp_ln_b;
  BasicTensor<T> mlp_up, mlp_bup;      // [rC, C]
  BasicTensor<T> mlp_down, mlp_bdown;  // [C, rC]
  BasicTensor<T> mlp_gamma;
  // SPM: gating across the patch grid.
  BasicTensor<T> spm_ln_g, spm_ln_b;
  BasicTensor<T> spm_wa, spm_ba;
  BasicTensor<T> spm_wv, spm_bv;
  BasicTensor<T> spm_dw, spm_dwb;  // [C, 1, ks, ks]
  BasicTensor<T> spm_gamma;
};

template <typename T>
struct ModelWeights {
  ModelConfig config;
  BasicTensor<T> embed_w, embed_b;  // [C, Cin, k0, k0], [C]
  std::vector<BlockWeights<T>> blocks;
  BasicTensor<T> head_w, head_b;  // [Cin * 3K, C]

  // Visits every parameter tensor in a fixed order with a stable name.
  template <typename F>
  void ForEach(F&& f);
  template <typename F>
  void ForEach(F&& f) const;

  int64_t NumParams() const;
  // Same shapes, all zeros.
  ModelWeights ZerosLike() const;
  template <typename U>
  ModelWeights<U> Cast() const;
};

// Zero-shape weights for `config`, then filled from a seeded generator.
template <typename T>
ModelWeights<T> InitWeights(const ModelConfig& config, uint64_t seed);
template <typename T>
ModelWeights<T> AllocateWeights(const ModelConfig& config);

// Geometry of `batch` equally sized images cut into P x P patches. Feature
// maps use the patch layout [batch * grid_h * grid_w, P, P, C] with patches
// in raster order per image.
struct PatchLayout {
  int batch = 1;
  int height = 0;  // real pixels
  int width = 0;
  int patch = 1;
  int channels = 1;

  int grid_h() const { return (height + patch - 1) / patch; }
  int grid_w() const { return (width + patch - 1) / patch; }
  int64_t num_patches() const {
    return static_cast<int64_t>(batch) * grid_h() * grid_w();
  }
  int64_t num_rows() const { return num_patches() * patch * patch; }
  // Row of image pixel (b, y, x) in the flattened patch layout.
  int64_t Row(int b, int y, int x) const {
    const int64_t p = (static_cast<int64_t>(b) * grid_h() + y / patch) *
                          grid_w() + x / patch;
    return (p * patch + y % patch) * patch + x % patch;
  }
  Shape FeatureShape(int64_t c) const {
    return {num_patches(), patch, patch, c};
  }
};

PatchLayout MakeLayout(int batch, int height, int width, int channels,
                       int patch);

// Normalized samples in patch layout; padding is 0 (mid-range).
template <typename T>
BasicTensor<T> ImagesToPatches(std::span<const ImageBuffer> images,
                               const PatchLayout& layout,
                               const PixelRange& range);

// [B * Gh * Gw, P, P, C] <-> [B * P * P, Gh, Gw, C].
template <typename T>
BasicTensor<T> PatchesToGrid(const BasicTensor<T>& x, const PatchLayout& l);
template <typename T>
BasicTensor<T> GridToPatches(const BasicTensor<T>& x, const PatchLayout& l);

// Adapter sites, in payload order within a block.
enum class SiteId : uint8_t {
  kLcmWa = 0,
  kLcmWv,
  kLcmDw,
  kMlpUp,
  kSpmWa,
  kSpmWv,
  kSpmDw,
};
inline constexpr int kNumSites = 7;
const char* SiteName(SiteId site);
bool IsDepthwiseSite(SiteId site);

// Optional extra branch added to a site's output during the forward pass,
// e.g. an unmerged low-rank update. `in` is the site's input (patch layout
// for linear and LCM depthwise sites, grid layout for the SPM depthwise
// site); the branch adds its contribution to `out`.
template <typename T>
class SideBranch {
 public:
  virtual ~SideBranch() = default;
  virtual void Apply(int block, SiteId site, const BasicTensor<T>& in,
                     BasicTensor<T>* out) const = 0;
};

// Activations kept for the backward pass.
template <typename T>
struct BlockTrace {
  LayerNormSaved<T> lcm_ln;
  BasicTensor<T> lcm_h, lcm_a, lcm_d, lcm_v, lcm_y;
  LayerNormSaved<T> mlp_ln;
  BasicTensor<T> mlp_h, mlp_u, mlp_g, mlp_z;
  LayerNormSaved<T> spm_ln;
  BasicTensor<T> spm_h, spm_ag, spm_d, spm_v, spm_y;
};

template <typename T>
struct ForwardTrace {
  PatchLayout layout;
  BasicTensor<T> input;
  BasicTensor<T> embed_out;
  std::vector<BlockTrace<T>> blocks;
  BasicTensor<T> final_x;
};

// Raw head outputs [patches, P, P, Cin * 3K] for normalized input in patch
// layout. Layout per image channel ch at base ch * 3K: K logits, K means,
// K raw scales.
template <typename T>
BasicTensor<T> HpacForward(const ModelWeights<T>& w, const BasicTensor<T>& x,
                           const PatchLayout& layout,
                           std::type_identity_t<ForwardTrace<T>>* trace,
                           const std::type_identity_t<SideBranch<T>>* branch = nullptr);

struct BackwardOptions {
  // Only the adapter-site weight gradients (and what they need) are
  // produced; the rest of `grads` is left untouched.
  bool sites_only = false;
};

// Accumulates d loss / d weights into `grads` given d loss / d head output.
template <typename T>
void HpacBackward(const ModelWeights<T>& w, const ForwardTrace<T>& trace,
                  const BasicTensor<T>& grad_head, ModelWeights<T>* grads,
                  const BackwardOptions& opts = {});

// Head row -> mixture parameters for image channel ch.
template <typename T>
MixtureParams HeadToMixture(const T* row, int ch, int k);

struct NllResult {
  double bits = 0.0;               // over real samples
  std::vector<double> patch_bits;  // per patch, in layout order
  int64_t samples = 0;
};

// Negative log2-likelihood of the images under the head outputs. If
// grad_head is given, d(bits * grad_scale) / d head is added into it.
template <typename T>
NllResult MixtureNll(const BasicTensor<T>& head,
                     std::span<const ImageBuffer> images,
                     const PatchLayout& layout, const PixelRange& range,
                     int mixtures, BasicTensor<T>* grad_head = nullptr,
                     double grad_scale = 1.0);

// Weight tensor at an adapter site, by block.
template <typename T>
BasicTensor<T>& SiteWeight(ModelWeights<T>& w, int block, SiteId site);
template <typename T>
const BasicTensor<T>& SiteWeight(const ModelWeights<T>& w, int block,
                                 SiteId site);

// ---------------------------------------------------------------------------

template <typename T>
template <typename F>
void ModelWeights<T>::ForEach(F&& f) {
  f(std::string("embed_w"), embed_w);
  f(std::string("embed_b"), embed_b);
  for (size_t i = 0; i < blocks.size(); ++i) {
    auto& b = blocks[i];
    const std::string p = "block" + std::to_string(i) + ".";
    f(p + "lcm_ln_g", b.lcm_ln_g);
    f(p + "lcm_ln_b", b.lcm_ln_b);
    f(p + "lcm_wa", b.lcm_wa);
    f(p + "lcm_ba", b.lcm_ba);
    f(p + "lcm_wv", b.lcm_wv);
    f(p + "lcm_bv", b.lcm_bv);
    f(p + "lcm_dw", b.lcm_dw);
    f(p + "lcm_dwb", b.lcm_dwb);
    f(p + "lcm_gamma", b.lcm_gamma);
    f(p + "mlp_ln_g", b.mlp_ln_g);
    f(p + "mlp_ln_b", b.mlp_ln_b);
    f(p + "mlp_up", b.mlp_up);
    f(p + "mlp_bup", b.mlp_bup);
    f(p + "mlp_down", b.mlp_down);
    f(p + "mlp_bdown", b.mlp_bdown);
    f(p + "mlp_gamma", b.mlp_gamma);
    f(p + "spm_ln_g", b.spm_ln_g);
    f(p + "spm_ln_b", b.spm_ln_b);
    f(p + "spm_wa", b.spm_wa);
    f(p + "spm_ba", b.spm_ba);
    f(p + "spm_wv", b.spm_wv);
    f(p + "spm_bv", b.spm_bv);
    f(p + "spm_dw", b.spm_dw);
    f(p + "spm_dwb", b.spm_dwb);
    f(p + "spm_gamma", b.spm_gamma);
  }
  f(std::string("head_w"), head_w);
  f(std::string("head_b"), head_b);
}

template <typename T>
template <typename F>
void ModelWeights<T>::ForEach(F&& f) const {
  const_cast<ModelWeights<T>*>(this)->ForEach(
      [&f](const std::string& name, BasicTensor<T>& t) {
        f(name, static_cast<const BasicTensor<T>&>(t));
      });
}

template <typename T>
int64_t ModelWeights<T>::NumParams() const {
  int64_t n = 0;
  ForEach([&n](const std::string&, const BasicTensor<T>& t) { n += t.size(); });
  return n;
}

template <typename T>
ModelWeights<T> ModelWeights<T>::ZerosLike() const {
  ModelWeights<T> z = *this;
  z.ForEach([](const std::string&, BasicTensor<T>& t) { t.Fill(T(0)); });
  return z;
}

template <typename T>
template <typename U>
ModelWeights<U> ModelWeights<T>::Cast() const {
  ModelWeights<U> out = AllocateWeights<U>(config);
  std::vector<const BasicTensor<T>*> src;
  ForEach([&src](const std::string&, const BasicTensor<T>& t) {
    src.push_back(&t);
  });
  size_t i = 0;
  out.ForEach([&](const std::string&, BasicTensor<U>& t) {
    t = src[i++]->template Cast<U>();
  });
  return out;
}

}  // namespace hpac

#endif  // HPAC_MODEL_H_
