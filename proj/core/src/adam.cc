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

#include "hpac/adam.h"

#include <cmath>
#include <stdexcept>

namespace hpac {

template <typename T>
void AdamStep(const std::vector<BasicTensor<T>*>& params,
              const std::vector<const BasicTensor<T>*>& grads,
              AdamState<T>* state, double lr, const AdamOptions& opts) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("AdamStep: params/grads count mismatch");
  }
  if (state->m.empty()) {
    for (const auto* p : params) {
      state->m.emplace_back(p->shape());
      state->v.emplace_back(p->shape());
    }
  }
  if (state->m.size() != params.size()) {
    throw std::invalid_argument("AdamStep: optimizer state does not match params");
  }
  ++state->step;
  const double bc1 = 1.0 - std::pow(opts.beta1, static_cast<double>(state->step));
  const double bc2 = 1.0 - std::pow(opts.beta2, static_cast<double>(state->step));
  for (size_t t = 0; t < params.size(); ++t) {
    BasicTensor<T>& p = *params[t];
    const BasicTensor<T>& g = *grads[t];
    CheckSameShape(p, g, "AdamStep");
    CheckSameShape(p, state->m[t], "AdamStep");
    T* m = state->m[t].data();
    T* v = state->v[t].data();
    for (int64_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      m[i] = static_cast<T>(opts.beta1 * m[i] + (1.0 - opts.beta1) * gi);
      v[i] = static_cast<T>(opts.beta2 * v[i] + (1.0 - opts.beta2) * gi * gi);
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] = static_cast<T>(p[i] - lr * mhat / (std::sqrt(vhat) + opts.eps));
    }
  }
}

template void AdamStep(const std::vector<BasicTensor<float>*>&,
                       const std::vector<const BasicTensor<float>*>&,
                       AdamState<float>*, double, const AdamOptions&);
template void AdamStep(const std::vector<BasicTensor<double>*>&,
                       const std::vector<const BasicTensor<double>*>&,
                       AdamState<double>*, double, const AdamOptions&);

}  // namespace hpac
