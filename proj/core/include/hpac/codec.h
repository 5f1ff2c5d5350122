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

#ifndef HPAC_CODEC_H_
#define HPAC_CODEC_H_

#include <cstdint>
#include <span>
#include <vector>

#include "hpac/adapt.h"
#include "hpac/image.h"
#include "hpac/model.h"
#include "hpac/sarpft.h"

namespace hpac {

inline constexpr uint8_t kContainerVersion = 1;
inline constexpr uint8_t kFlagAdapters = 1u << 0;
inline constexpr uint8_t kFlagFast = 1u << 1;

// Fixed 33-byte little-endian header:
// "HPAC" | u8 version | u8 flags | u32 width | u32 height | u8 channels |
// u8 bit depth | u8 P | u8 delta | u8 K | u16 R | u64 model hash |
// u32 adapter length. Adapter bytes and image bytes follow.
struct ContainerHeader {
  uint8_t version = kContainerVersion;
  uint8_t flags = 0;
  uint32_t width = 0;
  uint32_t height = 0;
  uint8_t channels = 0;
  uint8_t bit_depth = 0;
  uint8_t patch = 0;
  uint8_t delta = 0;
  uint8_t mixtures = 0;
  uint16_t window = 0;
  uint64_t model_hash = 0;
  uint32_t adapter_bytes = 0;

  static constexpr size_t kSize = 33;
  void AppendTo(std::vector<uint8_t>* out) const;
  // Throws FormatError on bad magic, version or field values.
  static ContainerHeader Parse(std::span<const uint8_t> bytes);
};

struct EncodeOptions {
  int window = 1024;  // AFC R
  bool fine_tune = false;
  FineTuneOptions ft;
  // With fine_tune: also code with the base model and keep whichever
  // container is smaller.
  bool keep_smaller = true;
};

struct EncodeStats {
  size_t header_bytes = 0;
  size_t adapter_bytes = 0;
  size_t image_bytes = 0;
  double ideal_image_bits = 0.0;  // sum of table costs of coded symbols
  double adapter_exact_bits = 0.0;
  int64_t escapes = 0;
  double bpsp = 0.0;  // total bytes * 8 / samples
  double fine_tune_seconds = 0.0;
  double coding_seconds = 0.0;
  // Container sizes with the base model and with the fine-tuned adapters
  // (0 when not computed).
  size_t base_total_bytes = 0;
  size_t tuned_total_bytes = 0;
  bool adapters_sent() const { return adapter_bytes > 0; }
};

// Full container: optional fine-tuning and adapter payload, then the image
// payload coded group by group.
std::vector<uint8_t> EncodeImage(const ImageBuffer& image,
                                 const ModelWeights<float>& weights,
                                 const EncodeOptions& opts,
                                 EncodeStats* stats = nullptr);

// Throws FormatError/DecodeError on malformed input and on a model hash
// mismatch.
ImageBuffer DecodeImage(std::span<const uint8_t> bytes,
                        const ModelWeights<float>& weights);

// Image payload only: CSI pass with AFC windows of size R.
std::vector<uint8_t> EncodePixels(const ImageBuffer& image,
                                  const ModelWeights<float>& weights,
                                  int window, EncodeStats* stats);
ImageBuffer DecodePixels(std::span<const uint8_t> payload, int width,
                         int height, int channels, int bit_depth,
                         const ModelWeights<float>& weights, int window);

bool IsFastConfig(const ModelConfig& c);

}  // namespace hpac

#endif  // HPAC_CODEC_H_
