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

#ifndef HPAC_ADAM_H_
#define HPAC_ADAM_H_

#include <cstdint>
#include <vector>

#include "hpac/tensor.h"

namespace hpac {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moments per parameter tensor plus the shared step count.
template <typename T>
struct AdamState {
  std::vector<BasicTensor<T>> m;
  std::vector<BasicTensor<T>> v;
  int64_t step = 0;
};

// One bias-corrected Adam update. `params` and `grads` are parallel lists;
// the state is sized lazily on the first call.
template <typename T>
void AdamStep(const std::vector<BasicTensor<T>*>& params,
              const std::vector<const BasicTensor<T>*>& grads,
              AdamState<T>* state, double lr, const AdamOptions& opts = {});

}  // namespace hpac

#endif  // HPAC_ADAM_H_
