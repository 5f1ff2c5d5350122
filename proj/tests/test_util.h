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

#ifndef HPAC_TESTS_TEST_UTIL_H_
#define HPAC_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "hpac/image.h"
#include "hpac/model.h"
#include "hpac/tensor.h"

namespace hpac::testing {

template <typename T>
BasicTensor<T> RandomTensor(const Shape& shape, std::mt19937_64& rng,
                            double lo = -1.0, double hi = 1.0) {
  BasicTensor<T> t(shape);
  std::uniform_real_distribution<double> d(lo, hi);
  for (auto& v : t.vec()) v = static_cast<T>(d(rng));
  return t;
}

template <typename T>
double MaxAbsDiff(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  double m = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::fabs(static_cast<double>(a[i]) - b[i]));
  }
  return m;
}

template <typename T>
double MaxAbs(const BasicTensor<T>& a) {
  double m = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(double(a[i])));
  return m;
}

// max |a - n| / max |n| between an analytic gradient and central
// differences of `loss` with respect to every element of `x`.
inline double GradRelErr(const std::function<double()>& loss, Tensor64* x,
                         const Tensor64& analytic, double h = 1e-5) {
  Tensor64 numeric(x->shape());
  for (int64_t i = 0; i < x->size(); ++i) {
    const double keep = (*x)[i];
    (*x)[i] = keep + h;
    const double up = loss();
    (*x)[i] = keep - h;
    const double down = loss();
    (*x)[i] = keep;
    numeric[i] = (up - down) / (2 * h);
  }
  return MaxAbsDiff(analytic, numeric) / std::max(MaxAbs(numeric), 1e-12);
}

inline double Dot(const Tensor64& a, const Tensor64& b) {
  double s = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline ImageBuffer RandomImage(int w, int h, int c, int b, uint64_t seed) {
  ImageBuffer im;
  im.width = w;
  im.height = h;
  im.channels = c;
  im.bit_depth = b;
  im.samples.resize(size_t(w) * h * c);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, (1 << b) - 1);
  for (auto& v : im.samples) v = static_cast<uint16_t>(d(rng));
  return im;
}

// Random weights with non-trivial residual branches, so every path of the
// network affects the output.
template <typename T>
ModelWeights<T> RandomModel(const ModelConfig& cfg, uint64_t seed) {
  ModelWeights<T> w = InitWeights<T>(cfg, seed);
  std::mt19937_64 rng(seed + 17);
  std::uniform_real_distribution<double> gam(0.3, 1.0), small(-0.2, 0.2);
  w.ForEach([&](const std::string& name, BasicTensor<T>& t) {
    const bool gamma = name.find("gamma") != std::string::npos;
    const bool bias = name.ends_with("_b") || name.ends_with("_ba") ||
                      name.ends_with("_bv") || name.ends_with("_dwb") ||
                      name.ends_with("_bup") || name.ends_with("_bdown");
    if (gamma) {
      for (auto& v : t.vec()) v = static_cast<T>(gam(rng));
    } else if (bias && name != "head_b") {
      for (auto& v : t.vec()) v = static_cast<T>(small(rng));
    } else if (name.find("ln_g") != std::string::npos) {
      for (auto& v : t.vec()) v = static_cast<T>(1.0 + small(rng));
    }
  });
  return w;
}

inline ModelConfig SmallConfig(int patch = 8, int delta = 2, int cin = 1) {
  ModelConfig c;
  c.depth = 2;
  c.channels = 16;
  c.mixtures = 3;
  c.patch = patch;
  c.delta = delta;
  c.channels_in = cin;
  return c;
}

}  // namespace hpac::testing

#endif  // HPAC_TESTS_TEST_UTIL_H_
