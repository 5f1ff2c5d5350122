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

#ifndef HPAC_CORPUS_H_
#define HPAC_CORPUS_H_

#include <cstdint>
#include <vector>

#include "hpac/image.h"

namespace hpac {

// Synthetic content families for desk-scale training and tests.
enum class SynthKind {
  kGradient,    // smooth ramps with mild sensor noise
  kValueNoise,  // multi-octave interpolated noise
  kGlyphs,      // dark glyph rows on a light, noisy background
  kOodText,     // noiseless light glyphs on a dark field, two exact levels
};

ImageBuffer SynthImage(SynthKind kind, int width, int height, int channels,
                       int bit_depth, uint64_t seed);

// Cycles through the three in-distribution kinds.
std::vector<ImageBuffer> MakeCorpus(int count, int width, int height,
                                    int channels, int bit_depth,
                                    uint64_t seed);

}  // namespace hpac

#endif  // HPAC_CORPUS_H_
