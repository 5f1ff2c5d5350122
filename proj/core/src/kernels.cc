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

#include "hpac/kernels.h"

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

#include "hpac/parallel.h"

namespace hpac {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

template <typename T>
void RequireGradShape(const BasicTensor<T>* g, const Shape& shape,
                      const char* what) {
  if (g != nullptr && g->shape() != shape) {
    throw std::invalid_argument(std::string(what) + ": gradient buffer has shape " +
                                ShapeString(g->shape()) + ", expected " +
                                ShapeString(shape));
  }
}

template <typename T>
void RequireSaved(const BasicTensor<T>& saved, const char* what) {
  if (saved.empty()) {
    throw std::logic_error(std::string(what) +
                           ": backward called without saved forward state");
  }
}

struct ConvGeometry {
  int64_t n, h, w, ci;
};

template <typename T>
ConvGeometry Geometry4(const BasicTensor<T>& in, const char* what) {
  if (in.rank() != 4) {
    throw std::invalid_argument(std::string(what) + ": expected [N,H,W,C] input, got " +
                                ShapeString(in.shape()));
  }
  return {in.dim(0), in.dim(1), in.dim(2), in.dim(3)};
}

// Weight [Co,Ci,k,k] -> per active tap a [Ci, Co] block (co contiguous).
template <typename T>
std::vector<T> TapMajorWeights(const BasicTensor<T>& weight,
                               const std::vector<TapOffset>& taps, int k) {
  const int64_t co = weight.dim(0), ci = weight.dim(1);
  const int h = (k - 1) / 2;
  std::vector<T> out(taps.size() * ci * co);
  for (size_t a = 0; a < taps.size(); ++a) {
    const int kr = taps[a].dr + h, kc = taps[a].dc + h;
    for (int64_t i = 0; i < ci; ++i) {
      for (int64_t o = 0; o < co; ++o) {
        out[(a * ci + i) * co + o] = weight[((o * ci + i) * k + kr) * k + kc];
      }
    }
  }
  return out;
}

void CheckConvWeight(const Shape& ws, int64_t ci, const MaskKernel& mask,
                     const char* what) {
  if (ws.size() != 4 || ws[1] != ci || ws[2] != ws[3] || ws[2] != mask.k()) {
    throw std::invalid_argument(std::string(what) + ": weight shape " +
                                ShapeString(ws) + " incompatible with input channels " +
                                std::to_string(ci) + " and mask k=" +
                                std::to_string(mask.k()));
  }
}

}  // namespace

template <typename T>
BasicTensor<T> Conv2dMasked(const BasicTensor<T>& in, const BasicTensor<T>& weight,
                            const MaskKernel& mask, const BasicTensor<T>* bias) {
  const auto g = Geometry4(in, "Conv2dMasked");
  CheckConvWeight(weight.shape(), g.ci, mask, "Conv2dMasked");
  const int64_t co = weight.dim(0);
  if (bias && bias->size() != co) {
    throw std::invalid_argument("Conv2dMasked: bias size mismatch");
  }
  const auto taps = mask.ActiveOffsets();
  const auto wt = TapMajorWeights(weight, taps, mask.k());
  BasicTensor<T> out({g.n, g.h, g.w, co});
  ParallelFor(g.n, 1, [&](int64_t n0, int64_t n1) {
    for (int64_t n = n0; n < n1; ++n) {
      for (int64_t y = 0; y < g.h; ++y) {
        for (int64_t x = 0; x < g.w; ++x) {
          T* o = out.data() + ((n * g.h + y) * g.w + x) * co;
          for (int64_t c = 0; c < co; ++c) o[c] = bias ? (*bias)[c] : T(0);
          for (size_t a = 0; a < taps.size(); ++a) {
            const int64_t yy = y + taps[a].dr, xx = x + taps[a].dc;
            if (yy < 0 || yy >= g.h || xx < 0 || xx >= g.w) continue;
            const T* src = in.data() + ((n * g.h + yy) * g.w + xx) * g.ci;
            for (int64_t i = 0; i < g.ci; ++i) {
              const T v = src[i];
              const T* wr = wt.data() + (a * g.ci + i) * co;
              for (int64_t c = 0; c < co; ++c) o[c] += v * wr[c];
            }
          }
        }
      }
    }
  });
  CheckFinite(out, "Conv2dMasked");
  return out;
}

template <typename T>
void Conv2dMaskedBackward(const BasicTensor<T>& grad_out,
                          const BasicTensor<T>& saved_in,
                          const BasicTensor<T>& weight, const MaskKernel& mask,
                          BasicTensor<T>* grad_in, BasicTensor<T>* grad_weight,
                          BasicTensor<T>* grad_bias) {
  RequireSaved(saved_in, "Conv2dMaskedBackward");
  const auto g = Geometry4(saved_in, "Conv2dMaskedBackward");
  CheckConvWeight(weight.shape(), g.ci, mask, "Conv2dMaskedBackward");
  const int64_t co = weight.dim(0);
  const int k = mask.k(), h = mask.half();
  if (grad_out.shape() != Shape{g.n, g.h, g.w, co}) {
    throw std::invalid_argument("Conv2dMaskedBackward: grad_out shape mismatch");
  }
  RequireGradShape(grad_in, saved_in.shape(), "Conv2dMaskedBackward");
  RequireGradShape(grad_weight, weight.shape(), "Conv2dMaskedBackward");
  RequireGradShape(grad_bias, Shape{co}, "Conv2dMaskedBackward");
  const auto taps = mask.ActiveOffsets();
  const auto wt = TapMajorWeights(weight, taps, k);
  std::vector<T> gwt(grad_weight ? wt.size() : 0, T(0));
  for (int64_t n = 0; n < g.n; ++n) {
    for (int64_t y = 0; y < g.h; ++y) {
      for (int64_t x = 0; x < g.w; ++x) {
        const T* go = grad_out.data() + ((n * g.h + y) * g.w + x) * co;
        if (grad_bias) {
          for (int64_t c = 0; c < co; ++c) (*grad_bias)[c] += go[c];
        }
        for (size_t a = 0; a < taps.size(); ++a) {
          const int64_t yy = y + taps[a].dr, xx = x + taps[a].dc;
          if (yy < 0 || yy >= g.h || xx < 0 || xx >= g.w) continue;
          const int64_t src_off = ((n * g.h + yy) * g.w + xx) * g.ci;
          for (int64_t i = 0; i < g.ci; ++i) {
            const T* wr = wt.data() + (a * g.ci + i) * co;
            if (grad_in) {
              T acc = 0;
              for (int64_t c = 0; c < co; ++c) acc += go[c] * wr[c];
              (*grad_in)[src_off + i] += acc;
            }
            if (grad_weight) {
              const T v = saved_in[src_off + i];
              T* gw = gwt.data() + (a * g.ci + i) * co;
              for (int64_t c = 0; c < co; ++c) gw[c] += v * go[c];
            }
          }
        }
      }
    }
  }
  if (grad_weight) {
    for (size_t a = 0; a < taps.size(); ++a) {
      const int kr = taps[a].dr + h, kc = taps[a].dc + h;
      for (int64_t i = 0; i < g.ci; ++i) {
        for (int64_t o = 0; o < co; ++o) {
          (*grad_weight)[((o * g.ci + i) * k + kr) * k + kc] +=
              gwt[(a * g.ci + i) * co + o];
        }
      }
    }
  }
}

template <typename T>
BasicTensor<T> DepthwiseConv2d(const BasicTensor<T>& in,
                               const BasicTensor<T>& weight,
                               const MaskKernel* mask,
                               const BasicTensor<T>* bias) {
  const auto g = Geometry4(in, "DepthwiseConv2d");
  if (weight.rank() != 4 || weight.dim(0) != g.ci || weight.dim(1) != 1 ||
      weight.dim(2) != weight.dim(3)) {
    throw std::invalid_argument("DepthwiseConv2d: weight shape " +
                                ShapeString(weight.shape()) + " incompatible with " +
                                ShapeString(in.shape()));
  }
  const int k = static_cast<int>(weight.dim(2));
  const MaskKernel full = MaskKernel::AllOnes(k);
  const MaskKernel& m = mask ? *mask : full;
  if (m.k() != k) throw std::invalid_argument("DepthwiseConv2d: mask size mismatch");
  if (bias && bias->size() != g.ci) {
    throw std::invalid_argument("DepthwiseConv2d: bias size mismatch");
  }
  const int64_t c = g.ci;
  const auto taps = m.ActiveOffsets();
  const int h = m.half();
  std::vector<T> wt(taps.size() * c);
  for (size_t a = 0; a < taps.size(); ++a) {
    for (int64_t ch = 0; ch < c; ++ch) {
      wt[a * c + ch] = weight[(ch * k + taps[a].dr + h) * k + taps[a].dc + h];
    }
  }
  BasicTensor<T> out({g.n, g.h, g.w, c});
  ParallelFor(g.n, 1, [&](int64_t n0, int64_t n1) {
    for (int64_t n = n0; n < n1; ++n) {
      for (int64_t y = 0; y < g.h; ++y) {
        for (int64_t x = 0; x < g.w; ++x) {
          T* o = out.data() + ((n * g.h + y) * g.w + x) * c;
          for (int64_t ch = 0; ch < c; ++ch) o[ch] = bias ? (*bias)[ch] : T(0);
          for (size_t a = 0; a < taps.size(); ++a) {
            const int64_t yy = y + taps[a].dr, xx = x + taps[a].dc;
            if (yy < 0 || yy >= g.h || xx < 0 || xx >= g.w) continue;
            const T* src = in.data() + ((n * g.h + yy) * g.w + xx) * c;
            const T* wr = wt.data() + a * c;
            for (int64_t ch = 0; ch < c; ++ch) o[ch] += wr[ch] * src[ch];
          }
        }
      }
    }
  });
  CheckFinite(out, "DepthwiseConv2d");
  return out;
}

template <typename T>
void DepthwiseConv2dBackward(const BasicTensor<T>& grad_out,
                             const BasicTensor<T>& saved_in,
                             const BasicTensor<T>& weight,
                             const MaskKernel* mask, BasicTensor<T>* grad_in,
                             BasicTensor<T>* grad_weight,
                             BasicTensor<T>* grad_bias) {
  RequireSaved(saved_in, "DepthwiseConv2dBackward");
  const auto g = Geometry4(saved_in, "DepthwiseConv2dBackward");
  CheckSameShape(grad_out, saved_in, "DepthwiseConv2dBackward");
  RequireGradShape(grad_in, saved_in.shape(), "DepthwiseConv2dBackward");
  RequireGradShape(grad_weight, weight.shape(), "DepthwiseConv2dBackward");
  RequireGradShape(grad_bias, Shape{g.ci}, "DepthwiseConv2dBackward");
  const int k = static_cast<int>(weight.dim(2));
  const MaskKernel full = MaskKernel::AllOnes(k);
  const MaskKernel& m = mask ? *mask : full;
  const int64_t c = g.ci;
  const auto taps = m.ActiveOffsets();
  const int h = m.half();
  std::vector<T> wt(taps.size() * c), gwt(taps.size() * c, T(0));
  for (size_t a = 0; a < taps.size(); ++a) {
    for (int64_t ch = 0; ch < c; ++ch) {
      wt[a * c + ch] = weight[(ch * k + taps[a].dr + h) * k + taps[a].dc + h];
    }
  }
  for (int64_t n = 0; n < g.n; ++n) {
    for (int64_t y = 0; y < g.h; ++y) {
      for (int64_t x = 0; x < g.w; ++x) {
        const T* go = grad_out.data() + ((n * g.h + y) * g.w + x) * c;
        if (grad_bias) {
          for (int64_t ch = 0; ch < c; ++ch) (*grad_bias)[ch] += go[ch];
        }
        for (size_t a = 0; a < taps.size(); ++a) {
          const int64_t yy = y + taps[a].dr, xx = x + taps[a].dc;
          if (yy < 0 || yy >= g.h || xx < 0 || xx >= g.w) continue;
          const int64_t off = ((n * g.h + yy) * g.w + xx) * c;
          const T* wr = wt.data() + a * c;
          if (grad_in) {
            T* gi = grad_in->data() + off;
            for (int64_t ch = 0; ch < c; ++ch) gi[ch] += wr[ch] * go[ch];
          }
          if (grad_weight) {
            const T* src = saved_in.data() + off;
            T* gw = gwt.data() + a * c;
            for (int64_t ch = 0; ch < c; ++ch) gw[ch] += src[ch] * go[ch];
          }
        }
      }
    }
  }
  if (grad_weight) {
    for (size_t a = 0; a < taps.size(); ++a) {
      for (int64_t ch = 0; ch < c; ++ch) {
        (*grad_weight)[(ch * k + taps[a].dr + h) * k + taps[a].dc + h] +=
            gwt[a * c + ch];
      }
    }
  }
}

template <typename T>
BasicTensor<T> Linear(const BasicTensor<T>& in, const BasicTensor<T>& weight,
                      const BasicTensor<T>* bias) {
  if (weight.rank() != 2 || in.rank() < 1 || in.dim(-1) != weight.dim(1)) {
    throw std::invalid_argument("Linear: input " + ShapeString(in.shape()) +
                                " incompatible with weight " +
                                ShapeString(weight.shape()));
  }
  const int64_t ci = weight.dim(1), co = weight.dim(0);
  const int64_t rows = in.size() / std::max<int64_t>(ci, 1);
  if (bias && bias->size() != co) {
    throw std::invalid_argument("Linear: bias size mismatch");
  }
  Shape out_shape = in.shape();
  out_shape.back() = co;
  BasicTensor<T> out(out_shape);
  if (rows > 0) {
    Eigen::Map<const RowMat<T>> x(in.data(), rows, ci);
    Eigen::Map<const RowMat<T>> w(weight.data(), co, ci);
    Eigen::Map<RowMat<T>> y(out.data(), rows, co);
    y.noalias() = x * w.transpose();
    if (bias) {
      Eigen::Map<const RowVec<T>> b(bias->data(), co);
      y.rowwise() += b;
    }
  }
  CheckFinite(out, "Linear");
  return out;
}

template <typename T>
void LinearBackward(const BasicTensor<T>& grad_out,
                    const BasicTensor<T>& saved_in,
                    const BasicTensor<T>& weight, BasicTensor<T>* grad_in,
                    BasicTensor<T>* grad_weight, BasicTensor<T>* grad_bias) {
  RequireSaved(saved_in, "LinearBackward");
  const int64_t ci = weight.dim(1), co = weight.dim(0);
  const int64_t rows = saved_in.size() / ci;
  if (grad_out.size() != rows * co) {
    throw std::invalid_argument("LinearBackward: grad_out shape mismatch");
  }
  RequireGradShape(grad_in, saved_in.shape(), "LinearBackward");
  RequireGradShape(grad_weight, weight.shape(), "LinearBackward");
  RequireGradShape(grad_bias, Shape{co}, "LinearBackward");
  Eigen::Map<const RowMat<T>> x(saved_in.data(), rows, ci);
  Eigen::Map<const RowMat<T>> w(weight.data(), co, ci);
  Eigen::Map<const RowMat<T>> gy(grad_out.data(), rows, co);
  if (grad_in) {
    Eigen::Map<RowMat<T>> gx(grad_in->data(), rows, ci);
    gx.noalias() += gy * w;
  }
  if (grad_weight) {
    Eigen::Map<RowMat<T>> gw(grad_weight->data(), co, ci);
    gw.noalias() += gy.transpose() * x;
  }
  if (grad_bias) {
    Eigen::Map<RowVec<T>> gb(grad_bias->data(), co);
    gb += gy.colwise().sum();
  }
}

template <typename T>
BasicTensor<T> LayerNorm(const BasicTensor<T>& in, const BasicTensor<T>& gamma,
                         const BasicTensor<T>& beta, LayerNormSaved<T>* saved) {
  const int64_t c = in.dim(-1);
  if (gamma.size() != c || beta.size() != c) {
    throw std::invalid_argument("LayerNorm: affine size mismatch");
  }
  const int64_t rows = in.size() / c;
  BasicTensor<T> out(in.shape());
  if (saved) {
    saved->xhat = BasicTensor<T>(in.shape());
    saved->rstd.assign(rows, T(0));
  }
  for (int64_t r = 0; r < rows; ++r) {
    const T* x = in.data() + r * c;
    T* y = out.data() + r * c;
    T mean = 0;
    for (int64_t i = 0; i < c; ++i) mean += x[i];
    mean /= static_cast<T>(c);
    T var = 0;
    for (int64_t i = 0; i < c; ++i) var += (x[i] - mean) * (x[i] - mean);
    var /= static_cast<T>(c);
    const T rstd = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
    for (int64_t i = 0; i < c; ++i) {
      const T xh = (x[i] - mean) * rstd;
      if (saved) saved->xhat[r * c + i] = xh;
      y[i] = xh * gamma[i] + beta[i];
    }
    if (saved) saved->rstd[r] = rstd;
  }
  CheckFinite(out, "LayerNorm");
  return out;
}

template <typename T>
void LayerNormBackward(const BasicTensor<T>& grad_out,
                       const LayerNormSaved<T>& saved,
                       const BasicTensor<T>& gamma, BasicTensor<T>* grad_in,
                       BasicTensor<T>* grad_gamma, BasicTensor<T>* grad_beta) {
  RequireSaved(saved.xhat, "LayerNormBackward");
  CheckSameShape(grad_out, saved.xhat, "LayerNormBackward");
  const int64_t c = gamma.size();
  const int64_t rows = grad_out.size() / c;
  RequireGradShape(grad_in, saved.xhat.shape(), "LayerNormBackward");
  RequireGradShape(grad_gamma, gamma.shape(), "LayerNormBackward");
  RequireGradShape(grad_beta, gamma.shape(), "LayerNormBackward");
  std::vector<T> dxh(c);
  for (int64_t r = 0; r < rows; ++r) {
    const T* gy = grad_out.data() + r * c;
    const T* xh = saved.xhat.data() + r * c;
    T mean_d = 0, mean_dx = 0;
    for (int64_t i = 0; i < c; ++i) {
      if (grad_gamma) (*grad_gamma)[i] += gy[i] * xh[i];
      if (grad_beta) (*grad_beta)[i] += gy[i];
      dxh[i] = gy[i] * gamma[i];
      mean_d += dxh[i];
      mean_dx += dxh[i] * xh[i];
    }
    if (!grad_in) continue;
    mean_d /= static_cast<T>(c);
    mean_dx /= static_cast<T>(c);
    T* gx = grad_in->data() + r * c;
    for (int64_t i = 0; i < c; ++i) {
      gx[i] += saved.rstd[r] * (dxh[i] - mean_d - xh[i] * mean_dx);
    }
  }
}

template <typename T>
BasicTensor<T> Swish(const BasicTensor<T>& in) {
  BasicTensor<T> out(in.shape());
  for (int64_t i = 0; i < in.size(); ++i) {
    const T x = in[i];
    out[i] = x / (T(1) + std::exp(-x));
  }
  CheckFinite(out, "Swish");
  return out;
}

template <typename T>
BasicTensor<T> SwishBackward(const BasicTensor<T>& grad_out,
                             const BasicTensor<T>& saved_in) {
  RequireSaved(saved_in, "SwishBackward");
  CheckSameShape(grad_out, saved_in, "SwishBackward");
  BasicTensor<T> g(saved_in.shape());
  for (int64_t i = 0; i < g.size(); ++i) {
    const T x = saved_in[i];
    const T s = T(1) / (T(1) + std::exp(-x));
    g[i] = grad_out[i] * s * (T(1) + x * (T(1) - s));
  }
  return g;
}

template <typename T>
BasicTensor<T> Gelu(const BasicTensor<T>& in) {
  BasicTensor<T> out(in.shape());
  const T inv_sqrt2 = static_cast<T>(0.70710678118654752440);
  for (int64_t i = 0; i < in.size(); ++i) {
    const T x = in[i];
    out[i] = T(0.5) * x * (T(1) + std::erf(x * inv_sqrt2));
  }
  CheckFinite(out, "Gelu");
  return out;
}

template <typename T>
BasicTensor<T> GeluBackward(const BasicTensor<T>& grad_out,
                            const BasicTensor<T>& saved_in) {
  RequireSaved(saved_in, "GeluBackward");
  CheckSameShape(grad_out, saved_in, "GeluBackward");
  const T inv_sqrt2 = static_cast<T>(0.70710678118654752440);
  const T inv_sqrt2pi = static_cast<T>(0.39894228040143267794);
  BasicTensor<T> g(saved_in.shape());
  for (int64_t i = 0; i < g.size(); ++i) {
    const T x = saved_in[i];
    const T cdf = T(0.5) * (T(1) + std::erf(x * inv_sqrt2));
    const T pdf = inv_sqrt2pi * std::exp(T(-0.5) * x * x);
    g[i] = grad_out[i] * (cdf + x * pdf);
  }
  return g;
}

template <typename T>
BasicTensor<T> Softplus(const BasicTensor<T>& in) {
  BasicTensor<T> out(in.shape());
  for (int64_t i = 0; i < in.size(); ++i) {
    out[i] = static_cast<T>(SoftplusScalar(in[i]));
  }
  CheckFinite(out, "Softplus");
  return out;
}

template <typename T>
BasicTensor<T> SoftplusBackward(const BasicTensor<T>& grad_out,
                                const BasicTensor<T>& saved_in) {
  RequireSaved(saved_in, "SoftplusBackward");
  CheckSameShape(grad_out, saved_in, "SoftplusBackward");
  BasicTensor<T> g(saved_in.shape());
  for (int64_t i = 0; i < g.size(); ++i) {
    g[i] = grad_out[i] * static_cast<T>(Sigmoid(saved_in[i]));
  }
  return g;
}

template <typename T>
BasicTensor<T> Softmax(const BasicTensor<T>& in) {
  const int64_t c = in.dim(-1);
  BasicTensor<T> out(in.shape());
  for (int64_t r = 0; r < in.size() / c; ++r) {
    const T* x = in.data() + r * c;
    T* y = out.data() + r * c;
    T m = x[0];
    for (int64_t i = 1; i < c; ++i) m = std::max(m, x[i]);
    T z = 0;
    for (int64_t i = 0; i < c; ++i) z += (y[i] = std::exp(x[i] - m));
    for (int64_t i = 0; i < c; ++i) y[i] /= z;
  }
  CheckFinite(out, "Softmax");
  return out;
}

template <typename T>
BasicTensor<T> SoftmaxBackward(const BasicTensor<T>& grad_out,
                               const BasicTensor<T>& saved_out) {
  RequireSaved(saved_out, "SoftmaxBackward");
  CheckSameShape(grad_out, saved_out, "SoftmaxBackward");
  const int64_t c = saved_out.dim(-1);
  BasicTensor<T> g(saved_out.shape());
  for (int64_t r = 0; r < g.size() / c; ++r) {
    const T* y = saved_out.data() + r * c;
    const T* gy = grad_out.data() + r * c;
    T dot = 0;
    for (int64_t i = 0; i < c; ++i) dot += gy[i] * y[i];
    for (int64_t i = 0; i < c; ++i) g[r * c + i] = y[i] * (gy[i] - dot);
  }
  return g;
}

template <typename T>
BasicTensor<T> LayerScale(const BasicTensor<T>& in, const BasicTensor<T>& gamma) {
  const int64_t c = in.dim(-1);
  if (gamma.size() != c) throw std::invalid_argument("LayerScale: size mismatch");
  BasicTensor<T> out(in.shape());
  for (int64_t r = 0; r < in.size() / c; ++r) {
    for (int64_t i = 0; i < c; ++i) out[r * c + i] = in[r * c + i] * gamma[i];
  }
  CheckFinite(out, "LayerScale");
  return out;
}

template <typename T>
void LayerScaleBackward(const BasicTensor<T>& grad_out,
                        const BasicTensor<T>& saved_in,
                        const BasicTensor<T>& gamma, BasicTensor<T>* grad_in,
                        BasicTensor<T>* grad_gamma) {
  RequireSaved(saved_in, "LayerScaleBackward");
  CheckSameShape(grad_out, saved_in, "LayerScaleBackward");
  RequireGradShape(grad_in, saved_in.shape(), "LayerScaleBackward");
  RequireGradShape(grad_gamma, gamma.shape(), "LayerScaleBackward");
  const int64_t c = gamma.size();
  for (int64_t r = 0; r < saved_in.size() / c; ++r) {
    for (int64_t i = 0; i < c; ++i) {
      const T go = grad_out[r * c + i];
      if (grad_in) (*grad_in)[r * c + i] += go * gamma[i];
      if (grad_gamma) (*grad_gamma)[i] += go * saved_in[r * c + i];
    }
  }
}

#define HPAC_INSTANTIATE_KERNELS(T)                                              \
  template BasicTensor<T> Conv2dMasked(const BasicTensor<T>&,                    \
                                       const BasicTensor<T>&, const MaskKernel&, \
                                       const BasicTensor<T>*);                   \
  template void Conv2dMaskedBackward(                                            \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,       \
      const MaskKernel&, BasicTensor<T>*, BasicTensor<T>*, BasicTensor<T>*);     \
  template BasicTensor<T> DepthwiseConv2d(                                       \
      const BasicTensor<T>&, const BasicTensor<T>&, const MaskKernel*,           \
      const BasicTensor<T>*);                                                    \
  template void DepthwiseConv2dBackward(                                         \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,       \
      const MaskKernel*, BasicTensor<T>*, BasicTensor<T>*, BasicTensor<T>*);     \
  template BasicTensor<T> Linear(const BasicTensor<T>&, const BasicTensor<T>&,   \
                                 const BasicTensor<T>*);                         \
  template void LinearBackward(const BasicTensor<T>&, const BasicTensor<T>&,     \
                               const BasicTensor<T>&, BasicTensor<T>*,           \
                               BasicTensor<T>*, BasicTensor<T>*);                \
  template BasicTensor<T> LayerNorm(const BasicTensor<T>&,                       \
                                    const BasicTensor<T>&,                       \
                                    const BasicTensor<T>&, LayerNormSaved<T>*);  \
  template void LayerNormBackward(const BasicTensor<T>&,                         \
                                  const LayerNormSaved<T>&,                      \
                                  const BasicTensor<T>&, BasicTensor<T>*,        \
                                  BasicTensor<T>*, BasicTensor<T>*);             \
  template BasicTensor<T> Swish(const BasicTensor<T>&);                          \
  template BasicTensor<T> SwishBackward(const BasicTensor<T>&,                   \
                                        const BasicTensor<T>&);                  \
  template BasicTensor<T> Gelu(const BasicTensor<T>&);                           \
  template BasicTensor<T> GeluBackward(const BasicTensor<T>&,                    \
                                       const BasicTensor<T>&);                   \
  template BasicTensor<T> Softplus(const BasicTensor<T>&);                       \
  template BasicTensor<T> SoftplusBackward(const BasicTensor<T>&,                \
                                           const BasicTensor<T>&);               \
  template BasicTensor<T> Softmax(const BasicTensor<T>&);                        \
  template BasicTensor<T> SoftmaxBackward(const BasicTensor<T>&,                 \
                                          const BasicTensor<T>&);                \
  template BasicTensor<T> LayerScale(const BasicTensor<T>&,                      \
                                     const BasicTensor<T>&);                     \
  template void LayerScaleBackward(const BasicTensor<T>&, const BasicTensor<T>&, \
                                   const BasicTensor<T>&, BasicTensor<T>*,       \
                                   BasicTensor<T>*);

HPAC_INSTANTIATE_KERNELS(float)
HPAC_INSTANTIATE_KERNELS(double)

#undef HPAC_INSTANTIATE_KERNELS

}  // namespace hpac
