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

#include "hpac/image.h"

#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

namespace hpac {
namespace {

class PnmHeaderReader {
 public:
  explicit PnmHeaderReader(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

  long ReadInt() {
    SkipSpaceAndComments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw std::runtime_error("malformed PNM header: expected integer");
    }
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > (1L << 30)) throw std::runtime_error("PNM header value too large");
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  size_t RasterStart() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw std::runtime_error("malformed PNM header: missing raster separator");
    }
    return pos_ + 1;
  }

  size_t pos_ = 2;

 private:
  void SkipSpaceAndComments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<uint8_t>& bytes_;
};

int BitDepthForMaxval(long maxval) {
  for (int b : {8, 12, 16}) {
    if (maxval <= (1L << b) - 1) return b;
  }
  throw std::runtime_error("PNM maxval out of range");
}

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

bool IsSupportedBitDepth(int b) { return b == 8 || b == 12 || b == 16; }

void ImageBuffer::Validate() const {
  if (width < 1 || height < 1) throw std::invalid_argument("image has no pixels");
  if (channels != 1 && channels != 3) {
    throw std::invalid_argument("only 1 or 3 channels are supported");
  }
  if (!IsSupportedBitDepth(bit_depth)) {
    throw std::invalid_argument("unsupported bit depth " + std::to_string(bit_depth));
  }
  if (samples.size() != static_cast<size_t>(width) * height * channels) {
    throw std::invalid_argument("sample count does not match geometry");
  }
  const uint32_t maxv = max_value();
  for (uint16_t s : samples) {
    if (s > maxv) {
      throw std::invalid_argument("sample " + std::to_string(s) +
                                  " exceeds bit depth " + std::to_string(bit_depth));
    }
  }
}

std::vector<uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(f), {});
}

void WriteFileBytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for " + path);
}

ImageBuffer DecodePnm(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw std::runtime_error("not a PNM file");
  }
  if (bytes[1] == '2' || bytes[1] == '3') {
    throw std::runtime_error("ASCII PNM (P2/P3) is not supported; use binary P5/P6");
  }
  if (bytes[1] != '5' && bytes[1] != '6') {
    throw std::runtime_error("unsupported PNM variant P" + std::string(1, bytes[1]));
  }
  PnmHeaderReader hdr(bytes);
  const long w = hdr.ReadInt();
  const long h = hdr.ReadInt();
  const long maxval = hdr.ReadInt();
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) {
    throw std::runtime_error("malformed PNM header values");
  }
  const size_t start = hdr.RasterStart();
  ImageBuffer img(static_cast<int>(w), static_cast<int>(h), bytes[1] == '6' ? 3 : 1,
                  BitDepthForMaxval(maxval));
  const size_t bps = maxval > 255 ? 2 : 1;
  const size_t need = img.samples.size() * bps;
  if (bytes.size() - start < need) throw std::runtime_error("truncated PNM raster");
  for (size_t i = 0; i < img.samples.size(); ++i) {
    uint32_t v = bps == 2 ? (bytes[start + 2 * i] << 8) | bytes[start + 2 * i + 1]
                          : bytes[start + i];
    if (v > static_cast<uint32_t>(maxval)) {
      throw std::runtime_error("PNM sample exceeds maxval");
    }
    img.samples[i] = static_cast<uint16_t>(v);
  }
  return img;
}

std::vector<uint8_t> EncodePnm(const ImageBuffer& image) {
  image.Validate();
  std::ostringstream hdr;
  hdr << (image.channels == 3 ? "P6" : "P5") << "\n"
      << image.width << " " << image.height << "\n"
      << image.max_value() << "\n";
  const std::string h = hdr.str();
  std::vector<uint8_t> out(h.begin(), h.end());
  const bool wide = image.max_value() > 255;
  out.reserve(out.size() + image.samples.size() * (wide ? 2 : 1));
  for (uint16_t s : image.samples) {
    if (wide) out.push_back(static_cast<uint8_t>(s >> 8));
    out.push_back(static_cast<uint8_t>(s & 0xFF));
  }
  return out;
}

ImageBuffer ReadPnm(const std::string& path) { return DecodePnm(ReadFileBytes(path)); }

void WritePnm(const std::string& path, const ImageBuffer& image) {
  WriteFileBytes(path, EncodePnm(image));
}

ImageBuffer ReadRaw16(const std::string& path) {
  std::ifstream dims(path + ".dims");
  if (!dims) throw std::runtime_error("missing sidecar " + path + ".dims");
  int w = 0, h = 0, c = 0, b = 0;
  if (!(dims >> w >> h >> c >> b)) throw std::runtime_error("malformed sidecar dims");
  ImageBuffer img(w, h, c, b);
  const auto bytes = ReadFileBytes(path);
  if (bytes.size() != img.samples.size() * 2) {
    throw std::runtime_error("raw file size does not match sidecar dims");
  }
  for (size_t i = 0; i < img.samples.size(); ++i) {
    img.samples[i] = static_cast<uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
  }
  img.Validate();
  return img;
}

void WriteRaw16(const std::string& path, const ImageBuffer& image) {
  image.Validate();
  std::vector<uint8_t> bytes;
  bytes.reserve(image.samples.size() * 2);
  for (uint16_t s : image.samples) {
    bytes.push_back(static_cast<uint8_t>(s & 0xFF));
    bytes.push_back(static_cast<uint8_t>(s >> 8));
  }
  WriteFileBytes(path, bytes);
  std::ofstream dims(path + ".dims");
  dims << image.width << " " << image.height << " " << image.channels << " "
       << image.bit_depth << "\n";
  if (!dims) throw std::runtime_error("cannot write sidecar for " + path);
}

ImageBuffer LoadImage(const std::string& path) {
  return EndsWith(path, ".raw") ? ReadRaw16(path) : ReadPnm(path);
}

void SaveImage(const std::string& path, const ImageBuffer& image) {
  if (EndsWith(path, ".raw")) {
    WriteRaw16(path, image);
  } else {
    WritePnm(path, image);
  }
}

}  // namespace hpac
