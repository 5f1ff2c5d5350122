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

#include "hpac/corpus.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace hpac {
namespace {

using Rng = std::mt19937_64;

double Uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Float canvas in [0, 1] per channel.
struct Canvas {
  int w, h, c;
  std::vector<double> v;
  Canvas(int w_, int h_, int c_) : w(w_), h(h_), c(c_), v(size_t(w_) * h_ * c_, 0.0) {}
  double& at(int y, int x, int ch) { return v[(size_t(y) * w + x) * c + ch]; }
};

void Gradient(Canvas& cv, Rng& rng) {
  const double ang = Uniform(rng, 0, 2 * std::numbers::pi);
  const double dx = std::cos(ang), dy = std::sin(ang);
  const double scale = 1.0 / std::max(cv.w, cv.h);
  for (int ch = 0; ch < cv.c; ++ch) {
    const double a = Uniform(rng, 0.1, 0.9), b = Uniform(rng, -0.6, 0.6);
    const double curve = Uniform(rng, -0.3, 0.3);
    for (int y = 0; y < cv.h; ++y) {
      for (int x = 0; x < cv.w; ++x) {
        const double t = (x * dx + y * dy) * scale;
        cv.at(y, x, ch) = a + b * t + curve * t * t;
      }
    }
  }
}

void ValueNoise(Canvas& cv, Rng& rng) {
  for (int ch = 0; ch < cv.c; ++ch) {
    double amp = 0.5;
    int cell = std::max(4, std::max(cv.w, cv.h) / 2);
    const double base = Uniform(rng, 0.3, 0.7);
    for (int y = 0; y < cv.h; ++y) {
      for (int x = 0; x < cv.w; ++x) cv.at(y, x, ch) = base;
    }
    for (int oct = 0; oct < 4 && cell >= 2; ++oct) {
      const int gw = cv.w / cell + 2, gh = cv.h / cell + 2;
      std::vector<double> g(size_t(gw) * gh);
      for (auto& v : g) v = Uniform(rng, -1, 1);
      for (int y = 0; y < cv.h; ++y) {
        const double fy = double(y) / cell;
        const int iy = static_cast<int>(fy);
        double ty = fy - iy;
        ty = ty * ty * (3 - 2 * ty);
        for (int x = 0; x < cv.w; ++x) {
          const double fx = double(x) / cell;
          const int ix = static_cast<int>(fx);
          double tx = fx - ix;
          tx = tx * tx * (3 - 2 * tx);
          const double v00 = g[iy * gw + ix], v01 = g[iy * gw + ix + 1];
          const double v10 = g[(iy + 1) * gw + ix], v11 = g[(iy + 1) * gw + ix + 1];
          const double v = (v00 * (1 - tx) + v01 * tx) * (1 - ty) +
                           (v10 * (1 - tx) + v11 * tx) * ty;
          cv.at(y, x, ch) += amp * 0.5 * v;
        }
      }
      amp *= 0.5;
      cell /= 2;
    }
  }
}

// Rows of 5x7 random bitmaps scaled by an integer factor.
void Glyphs(Canvas& cv, Rng& rng, const std::vector<double>& bg,
            const std::vector<double>& fg) {
  for (int y = 0; y < cv.h; ++y) {
    for (int x = 0; x < cv.w; ++x) {
      for (int ch = 0; ch < cv.c; ++ch) cv.at(y, x, ch) = bg[ch];
    }
  }
  const int s = std::uniform_int_distribution<int>(1, 2)(rng);
  const int gw = 5 * s, gh = 7 * s, gap = s + 1;
  for (int y0 = gap; y0 + gh <= cv.h; y0 += gh + 2 * gap) {
    for (int x0 = gap; x0 + gw <= cv.w; x0 += gw + gap) {
      if (Uniform(rng, 0, 1) < 0.15) continue;  // word break
      uint64_t bits = rng();
      for (int gy = 0; gy < 7; ++gy) {
        for (int gx = 0; gx < 5; ++gx) {
          if (!((bits >> (gy * 5 + gx)) & 1u)) continue;
          for (int dy = 0; dy < s; ++dy) {
            for (int dx = 0; dx < s; ++dx) {
              for (int ch = 0; ch < cv.c; ++ch) {
                cv.at(y0 + gy * s + dy, x0 + gx * s + dx, ch) = fg[ch];
              }
            }
          }
        }
      }
    }
  }
}

ImageBuffer Quantize(const Canvas& cv, int bit_depth, double noise, Rng& rng) {
  ImageBuffer im;
  im.width = cv.w;
  im.height = cv.h;
  im.channels = cv.c;
  im.bit_depth = bit_depth;
  im.samples.resize(cv.v.size());
  const double top = (1 << bit_depth) - 1;
  std::normal_distribution<double> n01(0.0, 1.0);
  for (size_t i = 0; i < cv.v.size(); ++i) {
    double v = cv.v[i] * top;
    if (noise > 0) v += noise * top / 255.0 * n01(rng);
    im.samples[i] = static_cast<uint16_t>(std::clamp(std::lround(v), 0L,
                                                     static_cast<long>(top)));
  }
  return im;
}

}  // namespace

ImageBuffer SynthImage(SynthKind kind, int width, int height, int channels,
                       int bit_depth, uint64_t seed) {
  if (width < 1 || height < 1) throw std::invalid_argument("empty image");
  if (channels != 1 && channels != 3) throw std::invalid_argument("channels");
  if (!IsSupportedBitDepth(bit_depth)) throw std::invalid_argument("bit depth");
  Rng rng(seed);
  Canvas cv(width, height, channels);
  double noise = 0.0;
  switch (kind) {
    case SynthKind::kGradient:
      Gradient(cv, rng);
      noise = Uniform(rng, 0.5, 2.0);
      break;
    case SynthKind::kValueNoise:
      ValueNoise(cv, rng);
      noise = Uniform(rng, 0.5, 2.0);
      break;
    case SynthKind::kGlyphs: {
      std::vector<double> bg(channels), fg(channels);
      for (int ch = 0; ch < channels; ++ch) {
        bg[ch] = Uniform(rng, 0.7, 0.95);
        fg[ch] = Uniform(rng, 0.05, 0.35);
      }
      Glyphs(cv, rng, bg, fg);
      noise = Uniform(rng, 1.0, 3.0);
      break;
    }
    case SynthKind::kOodText: {
      std::vector<double> bg(channels), fg(channels);
      for (int ch = 0; ch < channels; ++ch) {
        bg[ch] = Uniform(rng, 0.02, 0.2);
        fg[ch] = Uniform(rng, 0.6, 0.98);
      }
      Glyphs(cv, rng, bg, fg);
      break;
    }
  }
  return Quantize(cv, bit_depth, noise, rng);
}

std::vector<ImageBuffer> MakeCorpus(int count, int width, int height,
                                    int channels, int bit_depth,
                                    uint64_t seed) {
  static constexpr SynthKind kKinds[] = {
      SynthKind::kGradient, SynthKind::kValueNoise, SynthKind::kGlyphs};
  std::vector<ImageBuffer> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    out.push_back(SynthImage(kKinds[i % 3], width, height, channels, bit_depth,
                             seed * 1000003ull + i));
  }
  return out;
}

}  // namespace hpac
