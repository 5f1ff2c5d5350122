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

#include "hpac/coder.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace hpac {
namespace {

constexpr uint32_t kTopValue = 1u << 24;

}  // namespace

CdfTable::CdfTable(std::vector<uint32_t> cumulative) : cum_(std::move(cumulative)) {
  if (cum_.size() < 2 || cum_.front() != 0 || cum_.back() != kCdfTotal) {
    throw std::invalid_argument("CDF table must start at 0 and end at 2^16");
  }
  for (size_t i = 1; i < cum_.size(); ++i) {
    if (cum_[i] <= cum_[i - 1]) {
      throw std::invalid_argument("CDF table is not strictly increasing at " +
                                  std::to_string(i));
    }
  }
}

CdfTable CdfTable::FromFrequencies(std::span<const uint32_t> freq) {
  std::vector<uint32_t> cum(freq.size() + 1, 0);
  for (size_t i = 0; i < freq.size(); ++i) cum[i + 1] = cum[i] + freq[i];
  return CdfTable(std::move(cum));
}

int CdfTable::Find(uint32_t v) const {
  auto it = std::upper_bound(cum_.begin(), cum_.end(), v);
  return static_cast<int>(it - cum_.begin()) - 1;
}

double CdfTable::CostBits(int s) const {
  return kCdfPrecisionBits - std::log2(static_cast<double>(freq(s)));
}

void RangeEncoder::ShiftLow() {
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const uint8_t carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t temp = cache_;
    do {
      out_.push_back(static_cast<uint8_t>(temp + carry));
      temp = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(static_cast<uint32_t>(low_) >> 24);
  }
  ++cache_size_;
  low_ = static_cast<uint32_t>(low_) << 8;
}

void RangeEncoder::Encode(int symbol, const CdfTable& cdf) {
  if (symbol < 0 || symbol >= cdf.num_symbols()) {
    throw std::invalid_argument("symbol outside table");
  }
  const uint32_t r = range_ >> kCdfPrecisionBits;
  const uint32_t lo = cdf.low(symbol);
  low_ += static_cast<uint64_t>(r) * lo;
  if (symbol == cdf.num_symbols() - 1) {
    range_ -= r * lo;
  } else {
    range_ = r * cdf.freq(symbol);
  }
  while (range_ < kTopValue) {
    range_ <<= 8;
    ShiftLow();
  }
}

void RangeEncoder::WriteBit(bool bit) {
  const uint32_t half = range_ >> 1;
  if (bit) {
    low_ += half;
    range_ -= half;
  } else {
    range_ = half;
  }
  while (range_ < kTopValue) {
    range_ <<= 8;
    ShiftLow();
  }
}

std::vector<uint8_t> RangeEncoder::Finish() {
  for (int i = 0; i < 5; ++i) ShiftLow();
  std::vector<uint8_t> out;
  out.swap(out_);
  low_ = 0;
  range_ = 0xFFFFFFFFu;
  cache_ = 0;
  cache_size_ = 1;
  return out;
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> bytes) : bytes_(bytes) {
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | NextByte();
}

void RangeDecoder::Normalize() {
  while (range_ < kTopValue) {
    range_ <<= 8;
    code_ = (code_ << 8) | NextByte();
  }
}

int RangeDecoder::Decode(const CdfTable& cdf) {
  const uint32_t r = range_ >> kCdfPrecisionBits;
  uint32_t v = code_ / r;
  if (v >= kCdfTotal) v = kCdfTotal - 1;
  const int s = cdf.Find(v);
  const uint32_t lo = cdf.low(s);
  code_ -= r * lo;
  if (s == cdf.num_symbols() - 1) {
    range_ -= r * lo;
  } else {
    range_ = r * cdf.freq(s);
  }
  if (code_ >= range_) throw DecodeError("range decoder state out of bounds");
  Normalize();
  return s;
}

bool RangeDecoder::ReadBit() {
  const uint32_t half = range_ >> 1;
  bool bit = code_ >= half;
  if (bit) {
    code_ -= half;
    range_ -= half;
  } else {
    range_ = half;
  }
  if (code_ >= range_) throw DecodeError("range decoder state out of bounds");
  Normalize();
  return bit;
}

void BitWriter::WriteBit(bool bit) {
  if (bits_ % 8 == 0) out_.push_back(0);
  if (bit) out_.back() |= static_cast<uint8_t>(0x80u >> (bits_ % 8));
  ++bits_;
}

void BitWriter::WriteBits(uint64_t value, int count) {
  for (int i = count - 1; i >= 0; --i) WriteBit(((value >> i) & 1u) != 0);
}

std::vector<uint8_t> BitWriter::Finish() {
  std::vector<uint8_t> out;
  out.swap(out_);
  bits_ = 0;
  return out;
}

bool BitReader::ReadBit() {
  if (bit_pos_ >= bytes_.size() * 8) throw DecodeError("bit stream exhausted");
  const bool bit = (bytes_[bit_pos_ / 8] >> (7 - bit_pos_ % 8)) & 1u;
  ++bit_pos_;
  return bit;
}

uint64_t BitReader::ReadBits(int count) {
  uint64_t v = 0;
  for (int i = 0; i < count; ++i) v = (v << 1) | (ReadBit() ? 1u : 0u);
  return v;
}

}  // namespace hpac
