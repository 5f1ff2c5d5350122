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

#ifndef HPAC_SCAN_H_
#define HPAC_SCAN_H_

#include <cstdint>
#include <string>
#include <vector>

namespace hpac {

// Patch geometry and the group-wise scan order inside a patch. A pixel at
// patch-local (r, c) belongs to group s = c + r * delta; groups are coded in
// ascending s and all members of a group are predicted in parallel.
struct ScanSpec {
  int patch = 32;
  int delta = 2;

  // Size of the index range [0, (1 + delta) * (patch - 1)]. For
  // delta <= patch every index is occupied; beyond that some are empty and
  // the schedule skips them.
  int num_groups() const { return (1 + delta) * (patch - 1) + 1; }
  void Validate() const;
};

inline int GroupIndex(int r, int c, int delta) { return c + r * delta; }

struct PatchCoord {
  int r = 0;
  int c = 0;
  bool operator==(const PatchCoord&) const = default;
};

struct Group {
  int index = 0;                    // s
  std::vector<PatchCoord> members;  // sorted by (r, c)
};

// Non-empty groups in ascending index order; together they partition the
// patch grid.
struct GroupSchedule {
  ScanSpec spec;
  std::vector<Group> groups;
  // step_of[r * patch + c] is the position of (r, c)'s group in `groups`.
  std::vector<int> step_of;

  int num_steps() const { return static_cast<int>(groups.size()); }
  int StepOf(int r, int c) const { return step_of[r * spec.patch + c]; }
};

GroupSchedule BuildSchedule(const ScanSpec& spec);

enum class MaskKind : uint8_t {
  kStrict,      // taps strictly earlier in scan order (first layer)
  kPermissive,  // taps earlier or in the same group, center included
  kFull,        // unmasked
};

struct TapOffset {
  int dr = 0;
  int dc = 0;
  bool operator==(const TapOffset&) const = default;
};

// Binary k x k kernel mask; bit (dr, dc) with dr, dc in [-(k-1)/2, (k-1)/2]
// says whether the tap reading input at (r + dr, c + dc) is active.
class MaskKernel {
 public:
  MaskKernel() = default;
  // Throws std::invalid_argument for even k or non-binary bits.
  MaskKernel(int k, MaskKind kind, std::vector<uint8_t> bits);

  static MaskKernel AllOnes(int k);

  int k() const { return k_; }
  int half() const { return (k_ - 1) / 2; }
  MaskKind kind() const { return kind_; }
  const std::vector<uint8_t>& bits() const { return bits_; }
  bool active(int dr, int dc) const {
    return bits_[(dr + half()) * k_ + (dc + half())] != 0;
  }
  int popcount() const;
  // Active offsets in row-major tap order.
  std::vector<TapOffset> ActiveOffsets() const;
  std::string ToString() const;

 private:
  int k_ = 1;
  MaskKind kind_ = MaskKind::kFull;
  std::vector<uint8_t> bits_{1};
};

// strict: dr * delta + dc < 0; permissive: dr * delta + dc <= 0.
MaskKernel BuildMask(MaskKind kind, int k, int delta);

}  // namespace hpac

#endif  // HPAC_SCAN_H_
