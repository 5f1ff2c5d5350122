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

#ifndef HPAC_KERNELS_H_
#define HPAC_KERNELS_H_

// Forward/backward kernel pairs. Feature maps are channels-last
// [N, H, W, C]; convolutions zero-pad by (k - 1) / 2 on every side of each of
// the N samples. Backward functions add into the gradient tensors they are
// given (pass nullptr to skip one); the gradient tensors must already have
// the right shape.

#include "hpac/scan.h"
#include "hpac/tensor.h"

namespace hpac {

inline constexpr double kLayerNormEps = 1e-5;

// in [N,H,W,Ci], weight [Co,Ci,k,k], bias [Co] or nullptr -> [N,H,W,Co].
// Equal to a plain convolution with weight * mask; masked taps are skipped.
template <typename T>
BasicTensor<T> Conv2dMasked(const BasicTensor<T>& in,
                            const BasicTensor<T>& weight,
                            const MaskKernel& mask,
                            const BasicTensor<T>* bias);

template <typename T>
void Conv2dMaskedBackward(const BasicTensor<T>& grad_out,
                          const BasicTensor<T>& saved_in,
                          const BasicTensor<T>& weight, const MaskKernel& mask,
                          BasicTensor<T>* grad_in, BasicTensor<T>* grad_weight,
                          BasicTensor<T>* grad_bias);

// in [N,H,W,C], weight [C,1,k,k]; mask may be nullptr (unmasked).
template <typename T>
BasicTensor<T> DepthwiseConv2d(const BasicTensor<T>& in,
                               const BasicTensor<T>& weight,
                               const MaskKernel* mask,
                               const BasicTensor<T>* bias);

template <typename T>
void DepthwiseConv2dBackward(const BasicTensor<T>& grad_out,
                             const BasicTensor<T>& saved_in,
                             const BasicTensor<T>& weight,
                             const MaskKernel* mask, BasicTensor<T>* grad_in,
                             BasicTensor<T>* grad_weight,
                             BasicTensor<T>* grad_bias);

// in [..., Ci], weight [Co, Ci] -> [..., Co].
template <typename T>
BasicTensor<T> Linear(const BasicTensor<T>& in, const BasicTensor<T>& weight,
                      const BasicTensor<T>* bias);

template <typename T>
void LinearBackward(const BasicTensor<T>& grad_out,
                    const BasicTensor<T>& saved_in,
                    const BasicTensor<T>& weight, BasicTensor<T>* grad_in,
                    BasicTensor<T>* grad_weight, BasicTensor<T>* grad_bias);

// Normalizes over the last axis; `saved` receives what backward needs.
template <typename T>
struct LayerNormSaved {
  BasicTensor<T> xhat;  // normalized input, same shape as input
  std::vector<T> rstd;  // one per row
};

template <typename T>
BasicTensor<T> LayerNorm(const BasicTensor<T>& in, const BasicTensor<T>& gamma,
                         const BasicTensor<T>& beta, LayerNormSaved<T>* saved);

template <typename T>
void LayerNormBackward(const BasicTensor<T>& grad_out,
                       const LayerNormSaved<T>& saved,
                       const BasicTensor<T>& gamma, BasicTensor<T>* grad_in,
                       BasicTensor<T>* grad_gamma, BasicTensor<T>* grad_beta);

template <typename T>
BasicTensor<T> Swish(const BasicTensor<T>& in);
template <typename T>
BasicTensor<T> SwishBackward(const BasicTensor<T>& grad_out,
                             const BasicTensor<T>& saved_in);

// Exact (erf) GELU.
template <typename T>
BasicTensor<T> Gelu(const BasicTensor<T>& in);
template <typename T>
BasicTensor<T> GeluBackward(const BasicTensor<T>& grad_out,
                            const BasicTensor<T>& saved_in);

template <typename T>
BasicTensor<T> Softplus(const BasicTensor<T>& in);
template <typename T>
BasicTensor<T> SoftplusBackward(const BasicTensor<T>& grad_out,
                                const BasicTensor<T>& saved_in);

// Over the last axis.
template <typename T>
BasicTensor<T> Softmax(const BasicTensor<T>& in);
template <typename T>
BasicTensor<T> SoftmaxBackward(const BasicTensor<T>& grad_out,
                               const BasicTensor<T>& saved_out);

// Per-channel scale over the last axis.
template <typename T>
BasicTensor<T> LayerScale(const BasicTensor<T>& in, const BasicTensor<T>& gamma);
template <typename T>
void LayerScaleBackward(const BasicTensor<T>& grad_out,
                        const BasicTensor<T>& saved_in,
                        const BasicTensor<T>& gamma, BasicTensor<T>* grad_in,
                        BasicTensor<T>* grad_gamma);

// Scalar helpers shared by the model and the probability code.
inline double Sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}
inline double SoftplusScalar(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace hpac

#endif  // HPAC_KERNELS_H_
