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

#include "hpac/model.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace hpac {
namespace {

template <typename T>
BasicTensor<T> Mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  CheckSameShape(a, b, "Mul");
  BasicTensor<T> out(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

template <typename T>
void AddInPlace(BasicTensor<T>* a, const BasicTensor<T>& b) {
  CheckSameShape(*a, b, "Add");
  for (int64_t i = 0; i < a->size(); ++i) (*a)[i] += b[i];
}

template <typename T>
void FillUniform(BasicTensor<T>* t, double bound, std::mt19937_64* rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t->vec()) v = static_cast<T>(dist(*rng));
}

template <typename T>
BasicTensor<T> Zeros(const Shape& s) {
  return BasicTensor<T>(s);
}

}  // namespace

ModelConfig ModelConfig::Default(int channels_in) {
  ModelConfig c;
  c.channels_in = channels_in;
  return c;
}

ModelConfig ModelConfig::Fast(int channels_in) {
  ModelConfig c;
  c.depth = 2;
  c.channels = 96;
  c.mixtures = 3;
  c.patch = 16;
  c.delta = 1;
  c.channels_in = channels_in;
  return c;
}

ModelConfig ModelConfig::Tiny(int channels_in) {
  ModelConfig c = Fast(channels_in);
  c.channels = 32;
  return c;
}

void ModelConfig::Validate() const {
  auto fail = [](const std::string& m) {
    throw std::invalid_argument("invalid model config: " + m);
  };
  if (depth < 1 || depth > 64) fail("depth");
  if (channels < 1 || channels > 4096) fail("channels");
  if (mlp_ratio < 1 || mlp_ratio > 16) fail("mlp_ratio");
  for (int k : {embed_kernel, block_kernel, spm_kernel}) {
    if (k < 1 || k % 2 == 0 || k > 31) fail("kernel sizes must be odd");
  }
  if (mixtures < 1 || mixtures > kMaxMixtures) fail("mixtures");
  if (patch < 1 || patch > 255) fail("patch");
  if (delta < 0 || delta > 255) fail("delta");
  if (bit_depth < 1 || bit_depth > 16) fail("bit_depth");
  if (!(v_max > v_min)) fail("value range");
  if (channels_in != 1 && channels_in != 3) fail("channels_in");
}

const char* SiteName(SiteId site) {
  switch (site) {
    case SiteId::kLcmWa: return "lcm_wa";
    case SiteId::kLcmWv: return "lcm_wv";
    case SiteId::kLcmDw: return "lcm_dw";
    case SiteId::kMlpUp: return "mlp_up";
    case SiteId::kSpmWa: return "spm_wa";
    case SiteId::kSpmWv: return "spm_wv";
    case SiteId::kSpmDw: return "spm_dw";
  }
  return "?";
}

bool IsDepthwiseSite(SiteId site) {
  return site == SiteId::kLcmDw || site == SiteId::kSpmDw;
}

template <typename T>
BasicTensor<T>& SiteWeight(ModelWeights<T>& w, int block, SiteId site) {
  auto& b = w.blocks.at(block);
  switch (site) {
    case SiteId::kLcmWa: return b.lcm_wa;
    case SiteId::kLcmWv: return b.lcm_wv;
    case SiteId::kLcmDw: return b.lcm_dw;
    case SiteId::kMlpUp: return b.mlp_up;
    case SiteId::kSpmWa: return b.spm_wa;
    case SiteId::kSpmWv: return b.spm_wv;
    case SiteId::kSpmDw: return b.spm_dw;
  }
  throw std::invalid_argument("unknown site");
}

template <typename T>
const BasicTensor<T>& SiteWeight(const ModelWeights<T>& w, int block,
                                 SiteId site) {
  return SiteWeight(const_cast<ModelWeights<T>&>(w), block, site);
}

template <typename T>
ModelWeights<T> AllocateWeights(const ModelConfig& config) {
  config.Validate();
  const int64_t c = config.channels;
  const int64_t ci = config.channels_in;
  const int64_t k0 = config.embed_kernel;
  const int64_t k = config.block_kernel;
  const int64_t ks = config.spm_kernel;
  const int64_t hid = c * config.mlp_ratio;
  ModelWeights<T> w;
  w.config = config;
  w.embed_w = Zeros<T>({c, ci, k0, k0});
  w.embed_b = Zeros<T>({c});
  w.blocks.resize(config.depth);
  for (auto& b : w.blocks) {
    b.lcm_ln_g = BasicTensor<T>({c}, T(1));
    b.lcm_ln_b = Zeros<T>({c});
    b.lcm_wa = Zeros<T>({c, c});
    b.lcm_ba = Zeros<T>({c});
    b.lcm_wv = Zeros<T>({c, c});
    b.lcm_bv = Zeros<T>({c});
    b.lcm_dw = Zeros<T>({c, 1, k, k});
    b.lcm_dwb = Zeros<T>({c});
    b.lcm_gamma = Zeros<T>({c});
    b.mlp_ln_g = BasicTensor<T>({c}, T(1));
    b.mlp_ln_b = Zeros<T>({c});
    b.mlp_up = Zeros<T>({hid, c});
    b.mlp_bup = Zeros<T>({hid});
    b.mlp_down = Zeros<T>({c, hid});
    b.mlp_bdown = Zeros<T>({c});
    b.mlp_gamma = Zeros<T>({c});
    b.spm_ln_g = BasicTensor<T>({c}, T(1));
    b.spm_ln_b = Zeros<T>({c});
    b.spm_wa = Zeros<T>({c, c});
    b.spm_ba = Zeros<T>({c});
    b.spm_wv = Zeros<T>({c, c});
    b.spm_bv = Zeros<T>({c});
    b.spm_dw = Zeros<T>({c, 1, ks, ks});
    b.spm_dwb = Zeros<T>({c});
    b.spm_gamma = Zeros<T>({c});
  }
  w.head_w = Zeros<T>({config.head_outputs(), c});
  w.head_b = Zeros<T>({config.head_outputs()});
  return w;
}

template <typename T>
ModelWeights<T> InitWeights(const ModelConfig& config, uint64_t seed) {
  ModelWeights<T> w = AllocateWeights<T>(config);
  std::mt19937_64 rng(seed);
  const double c = config.channels;
  const MaskKernel strict =
      BuildMask(MaskKind::kStrict, config.embed_kernel, config.delta);
  const MaskKernel perm =
      BuildMask(MaskKind::kPermissive, config.block_kernel, config.delta);
  const double embed_fan =
      config.channels_in * std::max(1, strict.popcount());
  FillUniform(&w.embed_w, 1.0 / std::sqrt(embed_fan), &rng);
  for (auto& b : w.blocks) {
    FillUniform(&b.lcm_wa, 1.0 / std::sqrt(c), &rng);
    FillUniform(&b.lcm_wv, 1.0 / std::sqrt(c), &rng);
    FillUniform(&b.lcm_dw, 1.0 / std::sqrt(perm.popcount()), &rng);
    b.lcm_gamma.Fill(T(1e-2));
    FillUniform(&b.mlp_up, 1.0 / std::sqrt(c), &rng);
    FillUniform(&b.mlp_down, 1.0 / std::sqrt(c * config.mlp_ratio), &rng);
    b.mlp_gamma.Fill(T(1e-2));
    FillUniform(&b.spm_wa, 1.0 / std::sqrt(c), &rng);
    FillUniform(&b.spm_wv, 1.0 / std::sqrt(c), &rng);
    FillUniform(&b.spm_dw,
                1.0 / (config.spm_kernel), &rng);
    b.spm_gamma.Fill(T(1e-2));
  }
  FillUniform(&w.head_w, 0.1 / std::sqrt(c), &rng);
  const int k = config.mixtures;
  // Spread initial means over the range; scales start near 0.1.
  const double raw_scale = std::log(std::expm1(0.1 - kMinScale));
  for (int ch = 0; ch < config.channels_in; ++ch) {
    const int base = ch * 3 * k;
    for (int i = 0; i < k; ++i) {
      w.head_b[base + k + i] =
          static_cast<T>(k == 1 ? 0.0 : -0.8 + 1.6 * i / (k - 1));
      w.head_b[base + 2 * k + i] = static_cast<T>(raw_scale);
    }
  }
  return w;
}

PatchLayout MakeLayout(int batch, int height, int width, int channels,
                       int patch) {
  if (batch < 1 || height < 1 || width < 1 || patch < 1) {
    throw std::invalid_argument("empty patch layout");
  }
  return PatchLayout{batch, height, width, patch, channels};
}

template <typename T>
BasicTensor<T> ImagesToPatches(std::span<const ImageBuffer> images,
                               const PatchLayout& layout,
                               const PixelRange& range) {
  if (static_cast<int>(images.size()) != layout.batch) {
    throw std::invalid_argument("batch size does not match layout");
  }
  BasicTensor<T> out(layout.FeatureShape(layout.channels));
  for (int b = 0; b < layout.batch; ++b) {
    const ImageBuffer& im = images[b];
    if (im.width != layout.width || im.height != layout.height ||
        im.channels != layout.channels) {
      throw std::invalid_argument("image geometry does not match layout");
    }
    for (int y = 0; y < im.height; ++y) {
      for (int x = 0; x < im.width; ++x) {
        T* dst = out.data() + layout.Row(b, y, x) * layout.channels;
        for (int ch = 0; ch < im.channels; ++ch) {
          const int v = im.at(y, x, ch);
          if (v > range.max_value()) {
            throw std::invalid_argument("sample exceeds bit depth");
          }
          dst[ch] = static_cast<T>(range.Normalize(v));
        }
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> PatchesToGrid(const BasicTensor<T>& x, const PatchLayout& l) {
  const int64_t gh = l.grid_h(), gw = l.grid_w(), p = l.patch;
  const int64_t c = x.dim(-1);
  BasicTensor<T> out({static_cast<int64_t>(l.batch) * p * p, gh, gw, c});
  for (int64_t b = 0; b < l.batch; ++b) {
    for (int64_t i = 0; i < gh; ++i) {
      for (int64_t j = 0; j < gw; ++j) {
        const int64_t patch_idx = (b * gh + i) * gw + j;
        for (int64_t r = 0; r < p; ++r) {
          for (int64_t q = 0; q < p; ++q) {
            const T* src = x.data() + ((patch_idx * p + r) * p + q) * c;
            T* dst = out.data() + (((b * p + r) * p + q) * gh * gw + i * gw + j) * c;
            std::copy(src, src + c, dst);
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> GridToPatches(const BasicTensor<T>& x, const PatchLayout& l) {
  const int64_t gh = l.grid_h(), gw = l.grid_w(), p = l.patch;
  const int64_t c = x.dim(-1);
  BasicTensor<T> out(l.FeatureShape(c));
  for (int64_t b = 0; b < l.batch; ++b) {
    for (int64_t i = 0; i < gh; ++i) {
      for (int64_t j = 0; j < gw; ++j) {
        const int64_t patch_idx = (b * gh + i) * gw + j;
        for (int64_t r = 0; r < p; ++r) {
          for (int64_t q = 0; q < p; ++q) {
            const T* src = x.data() + (((b * p + r) * p + q) * gh * gw + i * gw + j) * c;
            T* dst = out.data() + ((patch_idx * p + r) * p + q) * c;
            std::copy(src, src + c, dst);
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> HpacForward(const ModelWeights<T>& w, const BasicTensor<T>& x,
                           const PatchLayout& layout,
                           std::type_identity_t<ForwardTrace<T>>* trace,
                           const std::type_identity_t<SideBranch<T>>* branch) {
  const ModelConfig& cfg = w.config;
  if (x.shape() != layout.FeatureShape(cfg.channels_in) ||
      layout.patch != cfg.patch) {
    throw std::invalid_argument("model input " + ShapeString(x.shape()) +
                                " does not match layout/config");
  }
  const MaskKernel strict =
      BuildMask(MaskKind::kStrict, cfg.embed_kernel, cfg.delta);
  const MaskKernel perm =
      BuildMask(MaskKind::kPermissive, cfg.block_kernel, cfg.delta);
  auto side = [&](int blk, SiteId site, const BasicTensor<T>& in,
                  BasicTensor<T>* out) {
    if (branch) branch->Apply(blk, site, in, out);
  };
  if (trace) {
    trace->layout = layout;
    trace->input = x;
    trace->blocks.assign(cfg.depth, {});
  }
  BasicTensor<T> cur = Conv2dMasked(x, w.embed_w, strict, &w.embed_b);
  if (trace) trace->embed_out = cur;
  for (int i = 0; i < cfg.depth; ++i) {
    const BlockWeights<T>& b = w.blocks[i];
    BlockTrace<T> local;
    BlockTrace<T>& t = trace ? trace->blocks[i] : local;
    {
      t.lcm_h = LayerNorm(cur, b.lcm_ln_g, b.lcm_ln_b, &t.lcm_ln);
      t.lcm_a = Linear(t.lcm_h, b.lcm_wa, &b.lcm_ba);
      side(i, SiteId::kLcmWa, t.lcm_h, &t.lcm_a);
      t.lcm_v = Linear(t.lcm_h, b.lcm_wv, &b.lcm_bv);
      side(i, SiteId::kLcmWv, t.lcm_h, &t.lcm_v);
      t.lcm_d = DepthwiseConv2d(t.lcm_a, b.lcm_dw, &perm, &b.lcm_dwb);
      side(i, SiteId::kLcmDw, t.lcm_a, &t.lcm_d);
      t.lcm_y = Mul(Swish(t.lcm_d), t.lcm_v);
      AddInPlace(&cur, LayerScale(t.lcm_y, b.lcm_gamma));
    }
    {
      t.mlp_h = LayerNorm(cur, b.mlp_ln_g, b.mlp_ln_b, &t.mlp_ln);
      t.mlp_u = Linear(t.mlp_h, b.mlp_up, &b.mlp_bup);
      side(i, SiteId::kMlpUp, t.mlp_h, &t.mlp_u);
      t.mlp_g = Gelu(t.mlp_u);
      t.mlp_z = Linear(t.mlp_g, b.mlp_down, &b.mlp_bdown);
      AddInPlace(&cur, LayerScale(t.mlp_z, b.mlp_gamma));
    }
    {
      t.spm_h = LayerNorm(cur, b.spm_ln_g, b.spm_ln_b, &t.spm_ln);
      BasicTensor<T> a = Linear(t.spm_h, b.spm_wa, &b.spm_ba);
      side(i, SiteId::kSpmWa, t.spm_h, &a);
      t.spm_v = Linear(t.spm_h, b.spm_wv, &b.spm_bv);
      side(i, SiteId::kSpmWv, t.spm_h, &t.spm_v);
      t.spm_ag = PatchesToGrid(a, layout);
      BasicTensor<T> dg = DepthwiseConv2d(t.spm_ag, b.spm_dw, nullptr, &b.spm_dwb);
      side(i, SiteId::kSpmDw, t.spm_ag, &dg);
      t.spm_d = GridToPatches(dg, layout);
      t.spm_y = Mul(Swish(t.spm_d), t.spm_v);
      AddInPlace(&cur, LayerScale(t.spm_y, b.spm_gamma));
    }
  }
  if (trace) trace->final_x = cur;
  BasicTensor<T> head = Linear(cur, w.head_w, &w.head_b);
  CheckFinite(head, "HpacForward");
  return head;
}

template <typename T>
void HpacBackward(const ModelWeights<T>& w, const ForwardTrace<T>& trace,
                  const BasicTensor<T>& grad_head, ModelWeights<T>* grads,
                  const BackwardOptions& opts) {
  if (trace.blocks.size() != w.blocks.size() || trace.final_x.empty()) {
    throw std::logic_error("HpacBackward without a saved forward trace");
  }
  const ModelConfig& cfg = w.config;
  const bool all = !opts.sites_only;
  auto maybe = [all](BasicTensor<T>& t) { return all ? &t : nullptr; };
  const MaskKernel strict =
      BuildMask(MaskKind::kStrict, cfg.embed_kernel, cfg.delta);
  const MaskKernel perm =
      BuildMask(MaskKind::kPermissive, cfg.block_kernel, cfg.delta);
  const PatchLayout& layout = trace.layout;

  BasicTensor<T> gx(trace.final_x.shape());
  LinearBackward(grad_head, trace.final_x, w.head_w, &gx, maybe(grads->head_w),
                 maybe(grads->head_b));
  for (int i = cfg.depth - 1; i >= 0; --i) {
    const BlockWeights<T>& b = w.blocks[i];
    BlockWeights<T>& g = grads->blocks[i];
    const BlockTrace<T>& t = trace.blocks[i];
    {
      BasicTensor<T> gy(t.spm_y.shape());
      LayerScaleBackward(gx, t.spm_y, b.spm_gamma, &gy, maybe(g.spm_gamma));
      BasicTensor<T> gv = Mul(gy, Swish(t.spm_d));
      BasicTensor<T> gd = SwishBackward(Mul(gy, t.spm_v), t.spm_d);
      BasicTensor<T> gdg = PatchesToGrid(gd, layout);
      BasicTensor<T> gag(t.spm_ag.shape());
      DepthwiseConv2dBackward(gdg, t.spm_ag, b.spm_dw, nullptr, &gag,
                              &g.spm_dw, maybe(g.spm_dwb));
      BasicTensor<T> ga = GridToPatches(gag, layout);
      BasicTensor<T> gh(t.spm_h.shape());
      LinearBackward(ga, t.spm_h, b.spm_wa, &gh, &g.spm_wa, maybe(g.spm_ba));
      LinearBackward(gv, t.spm_h, b.spm_wv, &gh, &g.spm_wv, maybe(g.spm_bv));
      LayerNormBackward(gh, t.spm_ln, b.spm_ln_g, &gx, maybe(g.spm_ln_g),
                        maybe(g.spm_ln_b));
    }
    {
      BasicTensor<T> gz(t.mlp_z.shape());
      LayerScaleBackward(gx, t.mlp_z, b.mlp_gamma, &gz, maybe(g.mlp_gamma));
      BasicTensor<T> gg(t.mlp_g.shape());
      LinearBackward(gz, t.mlp_g, b.mlp_down, &gg, maybe(g.mlp_down),
                     maybe(g.mlp_bdown));
      BasicTensor<T> gu = GeluBackward(gg, t.mlp_u);
      BasicTensor<T> gh(t.mlp_h.shape());
      LinearBackward(gu, t.mlp_h, b.mlp_up, &gh, &g.mlp_up, maybe(g.mlp_bup));
      LayerNormBackward(gh, t.mlp_ln, b.mlp_ln_g, &gx, maybe(g.mlp_ln_g),
                        maybe(g.mlp_ln_b));
    }
    {
      BasicTensor<T> gy(t.lcm_y.shape());
      LayerScaleBackward(gx, t.lcm_y, b.lcm_gamma, &gy, maybe(g.lcm_gamma));
      BasicTensor<T> gv = Mul(gy, Swish(t.lcm_d));
      BasicTensor<T> gd = SwishBackward(Mul(gy, t.lcm_v), t.lcm_d);
      BasicTensor<T> ga(t.lcm_a.shape());
      DepthwiseConv2dBackward(gd, t.lcm_a, b.lcm_dw, &perm, &ga, &g.lcm_dw,
                              maybe(g.lcm_dwb));
      BasicTensor<T> gh(t.lcm_h.shape());
      LinearBackward(ga, t.lcm_h, b.lcm_wa, &gh, &g.lcm_wa, maybe(g.lcm_ba));
      LinearBackward(gv, t.lcm_h, b.lcm_wv, &gh, &g.lcm_wv, maybe(g.lcm_bv));
      LayerNormBackward(gh, t.lcm_ln, b.lcm_ln_g, &gx, maybe(g.lcm_ln_g),
                        maybe(g.lcm_ln_b));
    }
  }
  if (all) {
    Conv2dMaskedBackward(gx, trace.input, w.embed_w, strict,
                         static_cast<BasicTensor<T>*>(nullptr),
                         &grads->embed_w, &grads->embed_b);
  }
}

template <typename T>
MixtureParams HeadToMixture(const T* row, int ch, int k) {
  MixtureParams p;
  p.k = k;
  const int base = ch * 3 * k;
  for (int i = 0; i < k; ++i) {
    p.logit[i] = row[base + i];
    p.mean[i] = row[base + k + i];
    p.scale[i] = SoftplusScalar(row[base + 2 * k + i]) + kMinScale;
  }
  return p;
}

template <typename T>
NllResult MixtureNll(const BasicTensor<T>& head,
                     std::span<const ImageBuffer> images,
                     const PatchLayout& layout, const PixelRange& range,
                     int mixtures, BasicTensor<T>* grad_head,
                     double grad_scale) {
  const int64_t ho = static_cast<int64_t>(layout.channels) * 3 * mixtures;
  if (head.shape() != layout.FeatureShape(ho)) {
    throw std::invalid_argument("head output does not match layout");
  }
  if (grad_head) CheckSameShape(*grad_head, head, "MixtureNll grad");
  NllResult res;
  res.patch_bits.assign(layout.num_patches(), 0.0);
  const double inv_ln2 = 1.0 / std::numbers::ln2;
  const int64_t pp = static_cast<int64_t>(layout.patch) * layout.patch;
  MixtureGrad mg;
  for (int b = 0; b < layout.batch; ++b) {
    const ImageBuffer& im = images[b];
    for (int y = 0; y < im.height; ++y) {
      for (int x = 0; x < im.width; ++x) {
        const int64_t row = layout.Row(b, y, x);
        const T* hr = head.data() + row * ho;
        for (int ch = 0; ch < im.channels; ++ch) {
          const MixtureParams p = HeadToMixture(hr, ch, mixtures);
          const double lp =
              LogBinProb(p, im.at(y, x, ch), range, grad_head ? &mg : nullptr);
          const double bits = -lp * inv_ln2;
          res.bits += bits;
          res.patch_bits[row / pp] += bits;
          ++res.samples;
          if (grad_head) {
            T* gr = grad_head->data() + row * ho + ch * 3 * mixtures;
            const double f = -inv_ln2 * grad_scale;
            for (int k = 0; k < mixtures; ++k) {
              const double raw = hr[ch * 3 * mixtures + 2 * mixtures + k];
              gr[k] += static_cast<T>(f * mg.logit[k]);
              gr[mixtures + k] += static_cast<T>(f * mg.mean[k]);
              gr[2 * mixtures + k] +=
                  static_cast<T>(f * mg.scale[k] * Sigmoid(raw));
            }
          }
        }
      }
    }
  }
  if (!std::isfinite(res.bits)) throw NumericError("non-finite likelihood");
  return res;
}

#define HPAC_INSTANTIATE_MODEL(T)                                              \
  template ModelWeights<T> AllocateWeights<T>(const ModelConfig&);             \
  template ModelWeights<T> InitWeights<T>(const ModelConfig&, uint64_t);       \
  template BasicTensor<T> ImagesToPatches<T>(std::span<const ImageBuffer>,     \
                                             const PatchLayout&,               \
                                             const PixelRange&);               \
  template BasicTensor<T> PatchesToGrid(const BasicTensor<T>&,                 \
                                        const PatchLayout&);                   \
  template BasicTensor<T> GridToPatches(const BasicTensor<T>&,                 \
                                        const PatchLayout&);                   \
  template BasicTensor<T> HpacForward(const ModelWeights<T>&,                  \
                                      const BasicTensor<T>&,                   \
                                      const PatchLayout&, ForwardTrace<T>*,    \
                                      const SideBranch<T>*);                   \
  template void HpacBackward(const ModelWeights<T>&, const ForwardTrace<T>&,   \
                             const BasicTensor<T>&, ModelWeights<T>*,          \
                             const BackwardOptions&);                          \
  template MixtureParams HeadToMixture(const T*, int, int);                    \
  template NllResult MixtureNll(const BasicTensor<T>&,                         \
                                std::span<const ImageBuffer>,                  \
                                const PatchLayout&, const PixelRange&, int,    \
                                BasicTensor<T>*, double);                      \
  template BasicTensor<T>& SiteWeight(ModelWeights<T>&, int, SiteId);          \
  template const BasicTensor<T>& SiteWeight(const ModelWeights<T>&, int,       \
                                            SiteId);

HPAC_INSTANTIATE_MODEL(float)
HPAC_INSTANTIATE_MODEL(double)

#undef HPAC_INSTANTIATE_MODEL

}  // namespace hpac
