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

#include "hpac/adapt.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hpac/bytes.h"
#include "hpac/coder.h"
#include "hpac/kernels.h"
#include "hpac/prob.h"

namespace hpac {
namespace {

constexpr int64_t kPriorHalfWidth = 64;
constexpr SiteId kSites[kNumSites] = {
    SiteId::kLcmWa, SiteId::kLcmWv, SiteId::kLcmDw, SiteId::kMlpUp,
    SiteId::kSpmWa, SiteId::kSpmWv, SiteId::kSpmDw};

// Output/input extents (linear) or channels/kernel (depthwise).
void SiteDims(const ModelConfig& m, SiteId site, int64_t* rows,
              int64_t* cols) {
  switch (site) {
    case SiteId::kMlpUp:
      *rows = static_cast<int64_t>(m.channels) * m.mlp_ratio;
      *cols = m.channels;
      return;
    case SiteId::kLcmDw:
      *rows = m.channels;
      *cols = m.block_kernel;
      return;
    case SiteId::kSpmDw:
      *rows = m.channels;
      *cols = m.spm_kernel;
      return;
    default:
      *rows = m.channels;
      *cols = m.channels;
  }
}

double LogisticCdf(double z) { return Sigmoid(z); }

// Mass of index q under the prior, with precision in both tails.
double IndexMass(int64_t q, double w, double s) {
  const double hi = (q * w + w / 2) / s;
  const double lo = (q * w - w / 2) / s;
  return q <= 0 ? LogisticCdf(hi) - LogisticCdf(lo)
                : LogisticCdf(-lo) - LogisticCdf(-hi);
}

CdfTable PriorTable(double w, double s) {
  std::vector<double> probs(2 * kPriorHalfWidth + 2);
  for (int64_t q = -kPriorHalfWidth; q <= kPriorHalfWidth; ++q) {
    probs[q + kPriorHalfWidth] = IndexMass(q, w, s);
  }
  probs.back() = 2.0 * LogisticCdf((-kPriorHalfWidth * w - w / 2) / s);
  return CdfTable::FromFrequencies(QuantizePmf(probs));
}

}  // namespace

std::vector<Tensor*> SiteAdapter::Factors() {
  if (depthwise()) return {&a, &c, &d};
  return {&a, &b};
}

std::vector<const Tensor*> SiteAdapter::Factors() const {
  if (depthwise()) return {&a, &c, &d};
  return {&a, &b};
}

AdapterSet AdapterSet::Zeros(const ModelConfig& model,
                             const AdapterConfig& cfg) {
  model.Validate();
  if (cfg.rank < 1 || cfg.rank > 255) {
    throw std::invalid_argument("adapter rank must be in [1, 255]");
  }
  if (!(cfg.step > 0) || !(cfg.prior_scale > 0)) {
    throw std::invalid_argument("adapter step and prior scale must be > 0");
  }
  AdapterSet set;
  set.config_ = cfg;
  // Steps travel as f32; both sides must quantize with the same value.
  set.config_.step = static_cast<float>(cfg.step);
  set.config_.prior_scale = static_cast<float>(cfg.prior_scale);
  for (int blk = 0; blk < model.depth; ++blk) {
    for (SiteId site : kSites) {
      SiteAdapter s;
      s.block = blk;
      s.site = site;
      int64_t rows, cols;
      SiteDims(model, site, &rows, &cols);
      if (s.depthwise()) {
        const int64_t rp = std::min<int64_t>(cfg.rank, cols);
        s.a = Tensor({rows, rp});
        s.c = Tensor({cols, rp});
        s.d = Tensor({cols, rp});
      } else {
        s.a = Tensor({rows, cfg.rank});
        s.b = Tensor({cfg.rank, cols});
      }
      set.sites_.push_back(std::move(s));
    }
  }
  return set;
}

AdapterSet AdapterSet::Create(const ModelConfig& model,
                              const AdapterConfig& cfg, uint64_t seed) {
  AdapterSet set = Zeros(model, cfg);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-cfg.init_amplitude,
                                              cfg.init_amplitude);
  for (auto& s : set.sites_) {
    for (auto& v : s.a.vec()) v = static_cast<float>(dist(rng));
    if (s.depthwise()) {
      for (auto& v : s.c.vec()) v = static_cast<float>(dist(rng));
    }
  }
  return set;
}

std::vector<Tensor*> AdapterSet::Factors() {
  std::vector<Tensor*> out;
  for (auto& s : sites_) {
    for (Tensor* t : s.Factors()) out.push_back(t);
  }
  return out;
}

std::vector<const Tensor*> AdapterSet::Factors() const {
  std::vector<const Tensor*> out;
  for (const auto& s : sites_) {
    for (const Tensor* t : s.Factors()) out.push_back(t);
  }
  return out;
}

int64_t AdapterSet::NumValues() const {
  int64_t n = 0;
  for (const Tensor* t : Factors()) n += t->size();
  return n;
}

template <typename T>
BasicTensor<T> DeltaLinear(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw std::invalid_argument("DeltaLinear: factor shapes " +
                                ShapeString(a.shape()) + " x " +
                                ShapeString(b.shape()));
  }
  if (a.dim(1) == 0) throw std::invalid_argument("DeltaLinear: rank 0");
  const int64_t m = a.dim(0), r = a.dim(1), n = b.dim(1);
  BasicTensor<T> out({m, n});
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t t = 0; t < r; ++t) {
      const T av = a[i * r + t];
      if (av == T(0)) continue;
      const T* br = b.data() + t * n;
      T* dst = out.data() + i * n;
      for (int64_t j = 0; j < n; ++j) dst[j] += av * br[j];
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> DeltaDepthwise(const BasicTensor<T>& a, const BasicTensor<T>& c,
                              const BasicTensor<T>& d) {
  if (a.rank() != 2 || c.rank() != 2 || d.rank() != 2 ||
      a.dim(1) != c.dim(1) || c.shape() != d.shape()) {
    throw std::invalid_argument("DeltaDepthwise: inconsistent factors");
  }
  if (a.dim(1) == 0) throw std::invalid_argument("DeltaDepthwise: rank 0");
  const int64_t m = a.dim(0), r = a.dim(1), k = c.dim(0);
  BasicTensor<T> out({m, 1, k, k});
  for (int64_t ch = 0; ch < m; ++ch) {
    for (int64_t i = 0; i < k; ++i) {
      for (int64_t j = 0; j < k; ++j) {
        T acc = 0;
        for (int64_t t = 0; t < r; ++t) {
          acc += a[ch * r + t] * c[i * r + t] * d[j * r + t];
        }
        out[(ch * k + i) * k + j] = acc;
      }
    }
  }
  return out;
}

template <typename T>
void DeltaLinearBackward(const BasicTensor<T>& grad, const BasicTensor<T>& a,
                         const BasicTensor<T>& b, BasicTensor<T>* ga,
                         BasicTensor<T>* gb) {
  const int64_t m = a.dim(0), r = a.dim(1), n = b.dim(1);
  if (grad.size() != m * n) {
    throw std::invalid_argument("DeltaLinearBackward: gradient shape");
  }
  for (int64_t i = 0; i < m; ++i) {
    const T* g = grad.data() + i * n;
    for (int64_t t = 0; t < r; ++t) {
      const T* br = b.data() + t * n;
      if (ga) {
        T acc = 0;
        for (int64_t j = 0; j < n; ++j) acc += g[j] * br[j];
        (*ga)[i * r + t] += acc;
      }
      if (gb) {
        const T av = a[i * r + t];
        T* dst = gb->data() + t * n;
        for (int64_t j = 0; j < n; ++j) dst[j] += av * g[j];
      }
    }
  }
}

template <typename T>
void DeltaDepthwiseBackward(const BasicTensor<T>& grad,
                            const BasicTensor<T>& a, const BasicTensor<T>& c,
                            const BasicTensor<T>& d, BasicTensor<T>* ga,
                            BasicTensor<T>* gc, BasicTensor<T>* gd) {
  const int64_t m = a.dim(0), r = a.dim(1), k = c.dim(0);
  if (grad.size() != m * k * k) {
    throw std::invalid_argument("DeltaDepthwiseBackward: gradient shape");
  }
  for (int64_t ch = 0; ch < m; ++ch) {
    for (int64_t i = 0; i < k; ++i) {
      for (int64_t j = 0; j < k; ++j) {
        const T g = grad[(ch * k + i) * k + j];
        if (g == T(0)) continue;
        for (int64_t t = 0; t < r; ++t) {
          const T av = a[ch * r + t], cv = c[i * r + t], dv = d[j * r + t];
          if (ga) (*ga)[ch * r + t] += g * cv * dv;
          if (gc) (*gc)[i * r + t] += g * av * dv;
          if (gd) (*gd)[j * r + t] += g * av * cv;
        }
      }
    }
  }
}

Tensor SiteDelta(const SiteAdapter& s) {
  return s.depthwise() ? DeltaDepthwise(s.a, s.c, s.d) : DeltaLinear(s.a, s.b);
}

ModelWeights<float> MergeAdapters(const ModelWeights<float>& base,
                                  const AdapterSet& adapters) {
  ModelWeights<float> out = base;
  for (const SiteAdapter& s : adapters.sites()) {
    Tensor& w = SiteWeight(out, s.block, s.site);
    const Tensor delta = SiteDelta(s);
    if (delta.size() != w.size()) {
      throw std::invalid_argument(std::string("adapter shape mismatch at ") +
                                  SiteName(s.site));
    }
    for (int64_t i = 0; i < w.size(); ++i) w[i] += delta[i];
  }
  return out;
}

AdapterBranch::AdapterBranch(const ModelConfig& model,
                             const AdapterSet& adapters)
    : model_(model), adapters_(adapters) {
  for (const SiteAdapter& s : adapters_.sites()) {
    deltas_.push_back(s.depthwise() ? SiteDelta(s) : Tensor());
  }
}

void AdapterBranch::Apply(int block, SiteId site, const Tensor& in,
                          Tensor* out) const {
  const size_t idx = static_cast<size_t>(block) * kNumSites +
                     static_cast<size_t>(site);
  const SiteAdapter& s = adapters_.sites().at(idx);
  Tensor extra;
  if (s.depthwise()) {
    if (site == SiteId::kLcmDw) {
      const MaskKernel perm = BuildMask(MaskKind::kPermissive,
                                        model_.block_kernel, model_.delta);
      extra = DepthwiseConv2d(in, deltas_[idx], &perm,
                              static_cast<const Tensor*>(nullptr));
    } else {
      extra = DepthwiseConv2d(in, deltas_[idx], nullptr,
                              static_cast<const Tensor*>(nullptr));
    }
  } else {
    extra = Linear(Linear(in, s.b, static_cast<const Tensor*>(nullptr)), s.a,
                   static_cast<const Tensor*>(nullptr));
  }
  CheckSameShape(*out, extra, "AdapterBranch");
  for (int64_t i = 0; i < out->size(); ++i) (*out)[i] += extra[i];
}

Tensor QuantizeSte(const Tensor& v, double w) {
  if (!(w > 0)) throw std::invalid_argument("quantization step must be > 0");
  Tensor out(v.shape());
  for (int64_t i = 0; i < v.size(); ++i) {
    // + 0.0f folds -0 into +0, matching what the payload decodes to.
    out[i] = static_cast<float>(std::nearbyint(v[i] / w) * w) + 0.0f;
  }
  return out;
}

std::vector<int64_t> QuantizeIndices(const Tensor& v, double w) {
  std::vector<int64_t> q(v.size());
  for (int64_t i = 0; i < v.size(); ++i) {
    q[i] = static_cast<int64_t>(std::nearbyint(v[i] / w));
  }
  return q;
}

Tensor NoiseSample(const Tensor& v, double w, std::mt19937_64* rng) {
  std::uniform_real_distribution<double> dist(-w / 2, w / 2);
  Tensor out(v.shape());
  for (int64_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>(v[i] + dist(*rng));
  }
  return out;
}

AdapterSet QuantizeAdapters(const AdapterSet& a) {
  AdapterSet q = a;
  for (Tensor* t : q.Factors()) *t = QuantizeSte(*t, a.config().step);
  return q;
}

double ExactIndexBits(int64_t q, double w, double s) {
  const double p = std::max(IndexMass(q, w, s), 1.0 / 65536.0);
  return -std::log2(p);
}

double ExactParamBits(const AdapterSet& quantized) {
  const double w = quantized.config().step;
  const double s = quantized.config().prior_scale;
  double bits = 0.0;
  for (const Tensor* t : quantized.Factors()) {
    for (int64_t q : QuantizeIndices(*t, w)) bits += ExactIndexBits(q, w, s);
  }
  return bits;
}

double SurrogateParamBits(std::span<const float> values, double w, double s,
                          std::span<float> grad, double scale) {
  const double inv_ln2 = 1.0 / std::numbers::ln2;
  const double base = -std::log2(w / s);
  double bits = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    const double z = values[i] / s;
    // -log2 lambda(z) = (softplus(z) + softplus(-z)) / ln 2.
    bits += (SoftplusScalar(z) + SoftplusScalar(-z)) * inv_ln2 + base;
    if (!grad.empty()) {
      grad[i] += static_cast<float>(scale * std::tanh(z / 2) / s * inv_ln2);
    }
  }
  return bits;
}

std::vector<uint8_t> EncodeAdapters(const AdapterSet& quantized) {
  const AdapterConfig& cfg = quantized.config();
  std::vector<uint8_t> out;
  AppendLe<uint8_t>(&out, static_cast<uint8_t>(cfg.rank));
  AppendLe<uint8_t>(&out, kSiteListVersion);
  AppendLe<float>(&out, static_cast<float>(cfg.step));
  AppendLe<float>(&out, static_cast<float>(cfg.prior_scale));
  // The decoder sees the f32 values, so the table is built from those.
  const double w = static_cast<float>(cfg.step);
  const double s = static_cast<float>(cfg.prior_scale);
  const CdfTable table = PriorTable(w, s);
  const int sentinel = static_cast<int>(2 * kPriorHalfWidth + 1);
  RangeEncoder enc;
  for (const Tensor* t : quantized.Factors()) {
    for (int64_t q : QuantizeIndices(*t, cfg.step)) {
      const int64_t local = q + kPriorHalfWidth;
      if (local >= 0 && local < sentinel) {
        enc.Encode(static_cast<int>(local), table);
      } else {
        enc.Encode(sentinel, table);
        WriteExpGolomb(enc, EscapeMap(local, sentinel));
      }
    }
  }
  const auto body = enc.Finish();
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

AdapterSet DecodeAdapters(std::span<const uint8_t> bytes,
                          const ModelConfig& model) {
  ByteReader in(bytes);
  AdapterConfig cfg;
  cfg.rank = in.Read<uint8_t>();
  if (in.Read<uint8_t>() != kSiteListVersion) {
    throw FormatError("unsupported adapter site list version");
  }
  const float wf = in.Read<float>();
  const float sf = in.Read<float>();
  if (!(wf > 0) || !(sf > 0) || !std::isfinite(wf) || !std::isfinite(sf) ||
      cfg.rank < 1) {
    throw FormatError("invalid adapter payload header");
  }
  cfg.step = wf;
  cfg.prior_scale = sf;
  AdapterSet set = AdapterSet::Zeros(model, cfg);
  const CdfTable table = PriorTable(wf, sf);
  const int sentinel = static_cast<int>(2 * kPriorHalfWidth + 1);
  RangeDecoder dec(bytes.subspan(in.position()));
  for (Tensor* t : set.Factors()) {
    for (int64_t i = 0; i < t->size(); ++i) {
      const int sym = dec.Decode(table);
      int64_t local = sym;
      if (sym == sentinel) {
        const uint64_t res = ReadExpGolomb(dec);
        if (res > (uint64_t{1} << 40)) throw DecodeError("adapter escape too large");
        local = EscapeUnmap(res, sentinel);
      }
      const int64_t q = local - kPriorHalfWidth;
      (*t)[i] = static_cast<float>(q * cfg.step);
    }
  }
  if (dec.overrun()) throw DecodeError("adapter payload truncated");
  return set;
}

#define HPAC_INSTANTIATE_ADAPT(T)                                              \
  template BasicTensor<T> DeltaLinear(const BasicTensor<T>&,                   \
                                      const BasicTensor<T>&);                  \
  template BasicTensor<T> DeltaDepthwise(const BasicTensor<T>&,                \
                                         const BasicTensor<T>&,                \
                                         const BasicTensor<T>&);               \
  template void DeltaLinearBackward(const BasicTensor<T>&,                     \
                                    const BasicTensor<T>&,                     \
                                    const BasicTensor<T>&, BasicTensor<T>*,    \
                                    BasicTensor<T>*);                          \
  template void DeltaDepthwiseBackward(                                        \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,     \
      const BasicTensor<T>&, BasicTensor<T>*, BasicTensor<T>*, BasicTensor<T>*);

HPAC_INSTANTIATE_ADAPT(float)
HPAC_INSTANTIATE_ADAPT(double)

#undef HPAC_INSTANTIATE_ADAPT

}  // namespace hpac
