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

#include "hpac/csi.h"

#include <Eigen/Core>
#include <stdexcept>
#include <string>

#include "hpac/kernels.h"

namespace hpac {
namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

int64_t CacheIndex(int64_t patch, int r, int c, int p) {
  return (patch * p + r) * p + c;
}

}  // namespace

ActiveWeights ExtractActive(const Tensor& weight, const MaskKernel& mask) {
  if (weight.rank() != 4 || weight.dim(2) != mask.k() ||
      weight.dim(3) != mask.k()) {
    throw std::invalid_argument("ExtractActive: weight " +
                                ShapeString(weight.shape()) +
                                " does not match mask size");
  }
  ActiveWeights aw;
  aw.out_channels = weight.dim(0);
  aw.in_channels = weight.dim(1);
  aw.taps = mask.ActiveOffsets();
  const int64_t na = aw.num_active();
  const int k = mask.k();
  aw.weight = Tensor({aw.out_channels, aw.in_channels, na});
  for (int64_t o = 0; o < aw.out_channels; ++o) {
    for (int64_t c = 0; c < aw.in_channels; ++c) {
      const float* src = weight.data() + (o * aw.in_channels + c) * k * k;
      for (int64_t a = 0; a < na; ++a) {
        const TapOffset t = aw.taps[a];
        aw.weight[(o * aw.in_channels + c) * na + a] =
            src[(t.dr + mask.half()) * k + (t.dc + mask.half())];
      }
    }
  }
  return aw;
}

Tensor GatherMultiply(const Tensor& cache,
                      std::span<const CachePosition> positions,
                      const ActiveWeights& active, const Tensor* bias) {
  if (cache.rank() != 4 || cache.dim(3) != active.in_channels ||
      cache.dim(1) != cache.dim(2)) {
    throw std::invalid_argument("GatherMultiply: cache " +
                                ShapeString(cache.shape()) +
                                " does not match weights");
  }
  const int p = static_cast<int>(cache.dim(1));
  const int64_t ci = active.in_channels;
  const int64_t co = active.out_channels;
  const int64_t na = active.num_active();
  const int64_t n = static_cast<int64_t>(positions.size());
  Tensor out({n, co});
  if (bias) {
    for (int64_t i = 0; i < n; ++i) {
      std::copy(bias->data(), bias->data() + co, out.data() + i * co);
    }
  }
  if (na == 0 || n == 0) return out;
  RowMat xg = RowMat::Zero(n, ci * na);
  for (int64_t i = 0; i < n; ++i) {
    const CachePosition& pos = positions[i];
    for (int64_t a = 0; a < na; ++a) {
      const int rr = pos.r + active.taps[a].dr;
      const int cc = pos.c + active.taps[a].dc;
      if (rr < 0 || rr >= p || cc < 0 || cc >= p) continue;
      const float* src = cache.data() + CacheIndex(pos.patch, rr, cc, p) * ci;
      for (int64_t c = 0; c < ci; ++c) xg(i, c * na + a) = src[c];
    }
  }
  Eigen::Map<const RowMat> wm(active.weight.data(), co, ci * na);
  Eigen::Map<RowMat> om(out.data(), n, co);
  om.noalias() += xg * wm.transpose();
  CheckFinite(out, "GatherMultiply");
  return out;
}

CsiEngine::CsiEngine(const ModelWeights<float>& weights, int height,
                     int width, int bit_depth, CsiOptions opts)
    : w_(weights), opts_(opts) {
  const ModelConfig& cfg = w_.config;
  cfg.Validate();
  layout_ = MakeLayout(1, height, width, cfg.channels_in, cfg.patch);
  schedule_ = BuildSchedule(cfg.scan());
  range_ = cfg.pixel_range(bit_depth);
  embed_ = ExtractActive(
      w_.embed_w, BuildMask(MaskKind::kStrict, cfg.embed_kernel, cfg.delta));
  const MaskKernel perm =
      BuildMask(MaskKind::kPermissive, cfg.block_kernel, cfg.delta);
  for (const auto& b : w_.blocks) lcm_dw_.push_back(ExtractActive(b.lcm_dw, perm));
  input_ = Tensor(layout_.FeatureShape(cfg.channels_in));
  input_ok_.assign(layout_.num_rows(), 0);
  lcm_cache_.assign(cfg.depth, Tensor(layout_.FeatureShape(cfg.channels)));
  lcm_ok_.assign(layout_.num_rows(), 0);
}

std::vector<CachePosition> CsiEngine::StepPositions(int s) const {
  const Group& g = schedule_.groups.at(s);
  std::vector<CachePosition> pos;
  pos.reserve(layout_.num_patches() * g.members.size());
  for (int64_t p = 0; p < layout_.num_patches(); ++p) {
    for (const PatchCoord& m : g.members) pos.push_back({p, m.r, m.c});
  }
  return pos;
}

bool CsiEngine::ToImage(const CachePosition& pos, int* y, int* x) const {
  const int gw = layout_.grid_w();
  const int py = static_cast<int>(pos.patch / gw);
  const int px = static_cast<int>(pos.patch % gw);
  *y = py * layout_.patch + pos.r;
  *x = px * layout_.patch + pos.c;
  return *y < layout_.height && *x < layout_.width;
}

void CsiEngine::CheckRead(const std::vector<uint8_t>& valid, int64_t patch,
                          int r, int c, const char* what) const {
  if (!valid[CacheIndex(patch, r, c, layout_.patch)]) {
    throw std::logic_error(std::string("CSI read of an unavailable ") + what +
                           " position (patch " + std::to_string(patch) +
                           ", " + std::to_string(r) + ", " +
                           std::to_string(c) + ") at step " +
                           std::to_string(next_step_));
  }
}

Tensor CsiEngine::DepthwiseAt(const Tensor& cache,
                              const std::vector<uint8_t>* valid,
                              std::span<const CachePosition> pos,
                              const ActiveWeights& aw,
                              const Tensor& bias) const {
  const int p = layout_.patch;
  const int64_t c = aw.out_channels;
  const int64_t na = aw.num_active();
  const int64_t n = static_cast<int64_t>(pos.size());
  // Tap-major copy so the inner loop runs over channels.
  std::vector<float> wt(na * c);
  for (int64_t ch = 0; ch < c; ++ch) {
    for (int64_t a = 0; a < na; ++a) wt[a * c + ch] = aw.weight[ch * na + a];
  }
  Tensor out({n, c});
  for (int64_t i = 0; i < n; ++i) {
    float* dst = out.data() + i * c;
    std::copy(bias.data(), bias.data() + c, dst);
    for (int64_t a = 0; a < na; ++a) {
      const int rr = pos[i].r + aw.taps[a].dr;
      const int cc = pos[i].c + aw.taps[a].dc;
      if (rr < 0 || rr >= p || cc < 0 || cc >= p) continue;
      if (valid) CheckRead(*valid, pos[i].patch, rr, cc, "feature");
      const float* src = cache.data() + CacheIndex(pos[i].patch, rr, cc, p) * c;
      const float* wa = wt.data() + a * c;
      for (int64_t ch = 0; ch < c; ++ch) dst[ch] += src[ch] * wa[ch];
    }
  }
  CheckFinite(out, "CSI depthwise");
  return out;
}

const Tensor& CsiEngine::Step(int s) {
  if (pending_commit_) throw std::logic_error("CSI step before commit");
  if (s != next_step_ || s >= num_steps()) {
    throw std::logic_error("CSI steps must run in order: expected " +
                           std::to_string(next_step_) + ", got " +
                           std::to_string(s));
  }
  const ModelConfig& cfg = w_.config;
  const int p = layout_.patch;
  const int64_t cdim = cfg.channels;
  cur_pos_ = StepPositions(s);
  const int64_t n = static_cast<int64_t>(cur_pos_.size());
  const int m = static_cast<int>(schedule_.groups[s].members.size());

  if (opts_.check_reads) {
    for (const auto& pos : cur_pos_) {
      for (const TapOffset& t : embed_.taps) {
        const int rr = pos.r + t.dr, cc = pos.c + t.dc;
        if (rr < 0 || rr >= p || cc < 0 || cc >= p) continue;
        CheckRead(input_ok_, pos.patch, rr, cc, "input");
      }
    }
  }
  Tensor cur = GatherMultiply(input_, cur_pos_, embed_, &w_.embed_b);

  for (int bi = 0; bi < cfg.depth; ++bi) {
    const BlockWeights<float>& b = w_.blocks[bi];
    {
      Tensor h = LayerNorm(cur, b.lcm_ln_g, b.lcm_ln_b,
                           static_cast<LayerNormSaved<float>*>(nullptr));
      Tensor a = Linear(h, b.lcm_wa, &b.lcm_ba);
      Tensor v = Linear(h, b.lcm_wv, &b.lcm_bv);
      Tensor& cache = lcm_cache_[bi];
      for (int64_t i = 0; i < n; ++i) {
        const int64_t idx = CacheIndex(cur_pos_[i].patch, cur_pos_[i].r,
                                       cur_pos_[i].c, p);
        std::copy(a.data() + i * cdim, a.data() + (i + 1) * cdim,
                  cache.data() + idx * cdim);
        lcm_ok_[idx] = 1;
      }
      Tensor d = DepthwiseAt(cache, opts_.check_reads ? &lcm_ok_ : nullptr,
                             cur_pos_, lcm_dw_[bi], b.lcm_dwb);
      Tensor g = Swish(d);
      for (int64_t i = 0; i < n; ++i) {
        for (int64_t ch = 0; ch < cdim; ++ch) {
          cur[i * cdim + ch] +=
              b.lcm_gamma[ch] * (g[i * cdim + ch] * v[i * cdim + ch]);
        }
      }
    }
    {
      Tensor h = LayerNorm(cur, b.mlp_ln_g, b.mlp_ln_b,
                           static_cast<LayerNormSaved<float>*>(nullptr));
      Tensor z = Linear(Gelu(Linear(h, b.mlp_up, &b.mlp_bup)), b.mlp_down,
                        &b.mlp_bdown);
      for (int64_t i = 0; i < n; ++i) {
        for (int64_t ch = 0; ch < cdim; ++ch) {
          cur[i * cdim + ch] += b.mlp_gamma[ch] * z[i * cdim + ch];
        }
      }
    }
    {
      Tensor h = LayerNorm(cur, b.spm_ln_g, b.spm_ln_b,
                           static_cast<LayerNormSaved<float>*>(nullptr));
      Tensor a = Linear(h, b.spm_wa, &b.spm_ba);
      Tensor v = Linear(h, b.spm_wv, &b.spm_bv);
      // Same-member features of all patches form an M x Gh x Gw x C grid.
      const int64_t gh = layout_.grid_h(), gw = layout_.grid_w();
      Tensor grid({m, gh, gw, cdim});
      for (int64_t i = 0; i < n; ++i) {
        const int64_t patch = i / m, member = i % m;
        std::copy(a.data() + i * cdim, a.data() + (i + 1) * cdim,
                  grid.data() + (member * gh * gw + patch) * cdim);
      }
      Tensor dg = DepthwiseConv2d(grid, b.spm_dw, nullptr, &b.spm_dwb);
      for (int64_t i = 0; i < n; ++i) {
        const int64_t patch = i / m, member = i % m;
        const float* d = dg.data() + (member * gh * gw + patch) * cdim;
        for (int64_t ch = 0; ch < cdim; ++ch) {
          const float dv = d[ch];
          const float sw = dv / (1.0f + std::exp(-dv));
          cur[i * cdim + ch] += b.spm_gamma[ch] * (sw * v[i * cdim + ch]);
        }
      }
    }
  }
  out_ = Linear(cur, w_.head_w, &w_.head_b);
  CheckFinite(out_, "CSI step");
  pending_commit_ = true;
  return out_;
}

void CsiEngine::Commit(std::span<const uint16_t> samples) {
  if (!pending_commit_) throw std::logic_error("CSI commit without a step");
  const int cin = w_.config.channels_in;
  if (samples.size() != cur_pos_.size() * cin) {
    throw std::invalid_argument("CSI commit: expected " +
                                std::to_string(cur_pos_.size() * cin) +
                                " samples");
  }
  const int p = layout_.patch;
  for (size_t i = 0; i < cur_pos_.size(); ++i) {
    const auto& pos = cur_pos_[i];
    int y, x;
    const bool real = ToImage(pos, &y, &x);
    const int64_t idx = CacheIndex(pos.patch, pos.r, pos.c, p);
    for (int ch = 0; ch < cin; ++ch) {
      const int v = samples[i * cin + ch];
      if (real && v > range_.max_value()) {
        throw std::invalid_argument("CSI commit: sample exceeds bit depth");
      }
      input_[idx * cin + ch] =
          real ? static_cast<float>(range_.Normalize(v)) : 0.0f;
    }
    input_ok_[idx] = 1;
  }
  pending_commit_ = false;
  ++next_step_;
}

}  // namespace hpac
