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

#ifndef HPAC_CODER_H_
#define HPAC_CODER_H_

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace hpac {

inline constexpr int kCdfPrecisionBits = 16;
inline constexpr uint32_t kCdfTotal = 1u << kCdfPrecisionBits;

// Thrown on malformed or truncated streams.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cumulative counts c[0..n]: c[0] = 0, c[n] = 2^16, strictly increasing.
class CdfTable {
 public:
  CdfTable() = default;
  explicit CdfTable(std::vector<uint32_t> cumulative);
  static CdfTable FromFrequencies(std::span<const uint32_t> freq);

  int num_symbols() const { return static_cast<int>(cum_.size()) - 1; }
  uint32_t low(int s) const { return cum_[s]; }
  uint32_t freq(int s) const { return cum_[s + 1] - cum_[s]; }
  const std::vector<uint32_t>& cumulative() const { return cum_; }
  // Symbol s with c[s] <= v < c[s + 1].
  int Find(uint32_t v) const;
  // -log2(freq / 2^16).
  double CostBits(int s) const;

 private:
  std::vector<uint32_t> cum_;
};

// Range coder with a 32-bit range, byte-wise renormalization and carry
// propagation through a one-byte cache (the LZMA construction). The final
// symbol of each table absorbs the truncation slack of range >> 16.
class RangeEncoder {
 public:
  void Encode(int symbol, const CdfTable& cdf);
  // Equiprobable bit, used for bypass codes.
  void WriteBit(bool bit);
  std::vector<uint8_t> Finish();
  // Bytes emitted so far plus the pending carry chain.
  size_t ApproxBytes() const { return out_.size() + cache_size_; }

 private:
  void ShiftLow();

  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> bytes);
  int Decode(const CdfTable& cdf);
  bool ReadBit();
  // True once the decoder has asked for bytes beyond the end of the stream
  // (after the 4 bytes of look-ahead a correct stream always provides).
  bool overrun() const { return pos_ > bytes_.size(); }
  size_t consumed() const { return pos_; }

 private:
  uint8_t NextByte() {
    const uint8_t b = pos_ < bytes_.size() ? bytes_[pos_] : 0;
    ++pos_;
    return b;
  }
  void Normalize();

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
};

// Plain MSB-first bit packing.
class BitWriter {
 public:
  void WriteBit(bool bit);
  void WriteBits(uint64_t value, int count);
  std::vector<uint8_t> Finish();
  size_t bit_count() const { return bits_; }

 private:
  std::vector<uint8_t> out_;
  size_t bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}
  // Throws DecodeError past the end.
  bool ReadBit();
  uint64_t ReadBits(int count);

 private:
  std::span<const uint8_t> bytes_;
  size_t bit_pos_ = 0;
};

// Order-0 exponential Golomb: v + 1 written as (n - 1) zeros and then its n
// significant bits. Works with any sink/source exposing WriteBit/ReadBit.
template <typename Sink>
void WriteExpGolomb(Sink& sink, uint64_t v) {
  if (v == UINT64_MAX) throw std::invalid_argument("exp-golomb value too large");
  const uint64_t x = v + 1;
  const int n = static_cast<int>(std::bit_width(x));
  for (int i = 0; i < n - 1; ++i) sink.WriteBit(false);
  for (int i = n - 1; i >= 0; --i) sink.WriteBit(((x >> i) & 1u) != 0);
}

template <typename Source>
uint64_t ReadExpGolomb(Source& source) {
  int zeros = 0;
  while (!source.ReadBit()) {
    if (++zeros > 62) throw DecodeError("exp-golomb prefix too long");
  }
  uint64_t x = 1;
  for (int i = 0; i < zeros; ++i) x = (x << 1) | (source.ReadBit() ? 1u : 0u);
  return x - 1;
}

}  // namespace hpac

#endif  // HPAC_CODER_H_
