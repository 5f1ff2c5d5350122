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

#include "hpac/scan.h"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace hpac {

void ScanSpec::Validate() const {
  if (patch < 1) throw std::invalid_argument("patch size must be >= 1");
  if (delta < 0) throw std::invalid_argument("delta must be >= 0");
}

GroupSchedule BuildSchedule(const ScanSpec& spec) {
  spec.Validate();
  std::map<int, std::vector<PatchCoord>> by_index;
  for (int r = 0; r < spec.patch; ++r) {
    for (int c = 0; c < spec.patch; ++c) {
      by_index[GroupIndex(r, c, spec.delta)].push_back({r, c});
    }
  }
  GroupSchedule schedule;
  schedule.spec = spec;
  schedule.step_of.assign(static_cast<size_t>(spec.patch) * spec.patch, -1);
  for (auto& [index, members] : by_index) {
    const int step = static_cast<int>(schedule.groups.size());
    for (const auto& m : members) {
      schedule.step_of[m.r * spec.patch + m.c] = step;
    }
    schedule.groups.push_back({index, std::move(members)});
  }
  return schedule;
}

MaskKernel::MaskKernel(int k, MaskKind kind, std::vector<uint8_t> bits)
    : k_(k), kind_(kind), bits_(std::move(bits)) {
  if (k < 1 || k % 2 == 0) {
    throw std::invalid_argument("mask kernel size must be odd, got " +
                                std::to_string(k));
  }
  if (bits_.size() != static_cast<size_t>(k) * k) {
    throw std::invalid_argument("mask has wrong number of bits");
  }
  for (uint8_t b : bits_) {
    if (b > 1) throw std::invalid_argument("mask is not binary");
  }
}

MaskKernel MaskKernel::AllOnes(int k) {
  return MaskKernel(k, MaskKind::kFull,
                    std::vector<uint8_t>(static_cast<size_t>(k) * k, 1));
}

int MaskKernel::popcount() const {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<TapOffset> MaskKernel::ActiveOffsets() const {
  std::vector<TapOffset> taps;
  for (int dr = -half(); dr <= half(); ++dr) {
    for (int dc = -half(); dc <= half(); ++dc) {
      if (active(dr, dc)) taps.push_back({dr, dc});
    }
  }
  return taps;
}

std::string MaskKernel::ToString() const {
  std::string s;
  for (int i = 0; i < k_; ++i) {
    for (int j = 0; j < k_; ++j) s += bits_[i * k_ + j] ? '1' : '.';
    s += '\n';
  }
  return s;
}

MaskKernel BuildMask(MaskKind kind, int k, int delta) {
  if (k < 1 || k % 2 == 0) {
    throw std::invalid_argument("mask kernel size must be odd, got " +
                                std::to_string(k));
  }
  if (kind == MaskKind::kFull) return MaskKernel::AllOnes(k);
  const int h = (k - 1) / 2;
  std::vector<uint8_t> bits(static_cast<size_t>(k) * k, 0);
  for (int dr = -h; dr <= h; ++dr) {
    for (int dc = -h; dc <= h; ++dc) {
      const int rel = dr * delta + dc;
      const bool on = kind == MaskKind::kStrict ? rel < 0 : rel <= 0;
      bits[(dr + h) * k + (dc + h)] = on ? 1 : 0;
    }
  }
  return MaskKernel(k, kind, std::move(bits));
}

}  // namespace hpac
