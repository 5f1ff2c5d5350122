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

#ifndef HPAC_IMAGE_H_
#define HPAC_IMAGE_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hpac {

// Row-major interleaved integer samples: index (y * width + x) * channels + c.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 1;
  int bit_depth = 8;
  std::vector<uint16_t> samples;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, int c, int b)
      : width(w), height(h), channels(c), bit_depth(b),
        samples(static_cast<size_t>(w) * h * c, 0) {}

  uint32_t max_value() const { return (1u << bit_depth) - 1u; }
  size_t index(int y, int x, int c) const {
    return (static_cast<size_t>(y) * width + x) * channels + c;
  }
  uint16_t at(int y, int x, int c) const { return samples[index(y, x, c)]; }
  uint16_t& at(int y, int x, int c) { return samples[index(y, x, c)]; }
  int64_t num_subpixels() const {
    return static_cast<int64_t>(width) * height * channels;
  }
  bool operator==(const ImageBuffer&) const = default;

  // Throws std::invalid_argument on bad geometry, depth or sample range.
  void Validate() const;
};

bool IsSupportedBitDepth(int b);

// Binary PGM (P5) / PPM (P6). maxval > 255 is stored as 16-bit big-endian.
ImageBuffer ReadPnm(const std::string& path);
ImageBuffer DecodePnm(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> EncodePnm(const ImageBuffer& image);
void WritePnm(const std::string& path, const ImageBuffer& image);

// Raw little-endian 16-bit samples plus a text sidecar "<path>.dims" holding
// "width height channels bit_depth".
ImageBuffer ReadRaw16(const std::string& path);
void WriteRaw16(const std::string& path, const ImageBuffer& image);

// Dispatches on extension: .raw -> raw16, anything else -> PNM.
ImageBuffer LoadImage(const std::string& path);
void SaveImage(const std::string& path, const ImageBuffer& image);

std::vector<uint8_t> ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, const std::vector<uint8_t>& bytes);

}  // namespace hpac

#endif  // HPAC_IMAGE_H_
