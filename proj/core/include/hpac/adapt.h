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

#ifndef HPAC_ADAPT_H_
#define HPAC_ADAPT_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "hpac/model.h"
#include "hpac/tensor.h"

namespace hpac {

inline constexpr uint8_t kSiteListVersion = 1;

struct AdapterConfig {
  int rank = 8;
  double step = 0.05;         // quantization step w
  double prior_scale = 0.05;  // logistic prior scale s
  double init_amplitude = 0.1;
};

// Low-rank update of one weight. Linear sites use dW = A B with A [m, r]
// and B [r, n]. Depthwise sites [m, 1, k, k] use the CP form
// dW[m, i, j] = sum_t A[m, t] C[i, t] D[j, t] over r' = min(r, k) terms,
// with A [m, r'], C and D [k, r'].
struct SiteAdapter {
  int block = 0;
  SiteId site = SiteId::kLcmWa;
  Tensor a, b;  // linear
  Tensor c, d;  // depthwise (b unused)

  bool depthwise() const { return IsDepthwiseSite(site); }
  // Factor tensors in payload order.
  std::vector<Tensor*> Factors();
  std::vector<const Tensor*> Factors() const;
};

class AdapterSet {
 public:
  AdapterSet() = default;
  // First factors (A, C) uniform in +-init_amplitude, second factors (B, D)
  // zero, so the update starts at exactly zero.
  static AdapterSet Create(const ModelConfig& model, const AdapterConfig& cfg,
                           uint64_t seed);
  // All-zero factors with the right shapes.
  static AdapterSet Zeros(const ModelConfig& model, const AdapterConfig& cfg);

  const AdapterConfig& config() const { return config_; }
  std::vector<SiteAdapter>& sites() { return sites_; }
  const std::vector<SiteAdapter>& sites() const { return sites_; }
  std::vector<Tensor*> Factors();
  std::vector<const Tensor*> Factors() const;
  int64_t NumValues() const;

 private:
  AdapterConfig config_;
  std::vector<SiteAdapter> sites_;
};

template <typename T>
BasicTensor<T> DeltaLinear(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> DeltaDepthwise(const BasicTensor<T>& a, const BasicTensor<T>& c,
                              const BasicTensor<T>& d);
// Given d loss / d dW, add the factor gradients.
template <typename T>
void DeltaLinearBackward(const BasicTensor<T>& grad, const BasicTensor<T>& a,
                         const BasicTensor<T>& b, BasicTensor<T>* ga,
                         BasicTensor<T>* gb);
template <typename T>
void DeltaDepthwiseBackward(const BasicTensor<T>& grad,
                            const BasicTensor<T>& a, const BasicTensor<T>& c,
                            const BasicTensor<T>& d, BasicTensor<T>* ga,
                            BasicTensor<T>* gc, BasicTensor<T>* gd);

Tensor SiteDelta(const SiteAdapter& s);

// base + dW at every site. Masks are applied at use, as for the base.
ModelWeights<float> MergeAdapters(const ModelWeights<float>& base,
                                  const AdapterSet& adapters);

// Adds the low-rank branches on the fly instead of merging.
class AdapterBranch : public SideBranch<float> {
 public:
  AdapterBranch(const ModelConfig& model, const AdapterSet& adapters);
  void Apply(int block, SiteId site, const Tensor& in,
             Tensor* out) const override;

 private:
  ModelConfig model_;
  const AdapterSet& adapters_;
  std::vector<Tensor> deltas_;  // depthwise sites only, by site position
};

// round(v / w) * w, elementwise. The straight-through gradient is the
// identity, so callers pass gradients through unchanged.
Tensor QuantizeSte(const Tensor& v, double w);
// Integer indices round(v / w).
std::vector<int64_t> QuantizeIndices(const Tensor& v, double w);
// v + U(-w/2, w/2).
Tensor NoiseSample(const Tensor& v, double w, std::mt19937_64* rng);

// Quantized copy of every factor.
AdapterSet QuantizeAdapters(const AdapterSet& a);

// Bits of index q under the discretized zero-mean logistic prior, floored
// at 2^-16 probability.
double ExactIndexBits(int64_t q, double w, double s);
double ExactParamBits(const AdapterSet& quantized);
// Sum of -log2(lambda(v / s) w / s) over values; adds d bits / d v * scale
// to grad when given.
double SurrogateParamBits(std::span<const float> values, double w, double s,
                          std::span<float> grad = {}, double scale = 1.0);

// Payload: u8 rank | u8 site-list version | f32 w | f32 s | range-coded
// indices (sites in block order, SiteId order; factors A, B or A, C, D;
// row-major) under the prior table over [-64, 64] plus an escape symbol
// followed by an Exp-Golomb residual.
std::vector<uint8_t> EncodeAdapters(const AdapterSet& quantized);
AdapterSet DecodeAdapters(std::span<const uint8_t> bytes,
                          const ModelConfig& model);

}  // namespace hpac

#endif  // HPAC_ADAPT_H_
