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

#ifndef HPAC_PROB_H_
#define HPAC_PROB_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hpac/coder.h"

namespace hpac {

inline constexpr int kMaxMixtures = 10;
inline constexpr double kMinScale = 1e-3;
inline constexpr int kMinWindow = 2;
inline constexpr int kMaxWindow = 32768;

// Mapping between integer samples and the model's normalized range:
// v = x / 2^b * (v_max - v_min) + v_min.
struct PixelRange {
  int bit_depth = 8;
  double v_min = -1.0;
  double v_max = 1.0;

  int max_value() const { return (1 << bit_depth) - 1; }
  double bin_width() const { return (v_max - v_min) / (1 << bit_depth); }
  double half_bin() const { return 0.5 * bin_width(); }
  double Normalize(int x) const { return x * bin_width() + v_min; }
  double ToPixel(double v) const { return (v - v_min) / bin_width(); }
};

// One pixel's logistic mixture. Means and scales are in normalized units.
struct MixtureParams {
  int k = 0;
  std::array<double, kMaxMixtures> logit{};
  std::array<double, kMaxMixtures> mean{};
  std::array<double, kMaxMixtures> scale{};

  // Throws std::invalid_argument on bad k, non-finite values or scales
  // below the floor.
  void Validate() const;
};

// d log p / d(logit, mean, scale).
struct MixtureGrad {
  std::array<double, kMaxMixtures> logit{};
  std::array<double, kMaxMixtures> mean{};
  std::array<double, kMaxMixtures> scale{};
};

// Natural log of the discretized mixture mass of sample x. The lowest and
// highest samples take the open tails, so the masses over the alphabet sum
// to one. Optionally returns the gradient of the log mass.
double LogBinProb(const MixtureParams& p, int x, const PixelRange& range,
                  MixtureGrad* grad = nullptr);
double BinProb(const MixtureParams& p, int x, const PixelRange& range);

// Mixture mean in (fractional) pixel units.
double AfcCenter(const MixtureParams& p, const PixelRange& range);

// Truncated alphabet [x_lo, x_hi] plus a trailing sentinel symbol that
// carries the out-of-window mass.
struct CodingWindow {
  int x_lo = 0;
  int x_hi = 0;
  int nominal = 0;           // requested R
  double escape_mass = 0.0;  // model mass outside the window
  CdfTable table;            // count() + 1 symbols

  int count() const { return x_hi - x_lo + 1; }
  int sentinel() const { return count(); }
};

// Window of nominal size R around the mixture mean. Bounds are
// x_lo = max(0, round(c - R/2)) and x_hi = min(2^b - 1, round(c + R/2)) with
// the center clamped into the alphabet first; R >= 2^b selects the whole
// alphabet. Valid R is [2, 32768].
CodingWindow AfcWindow(const MixtureParams& p, int r, const PixelRange& range);

// Integer frequencies summing to 2^16, each at least 1. Entries whose share
// would fall below one unit are raised to it and the rest share what is
// left in proportion to their mass, with largest-remainder rounding (ties
// to the lower index).
std::vector<uint32_t> QuantizePmf(std::span<const double> probs);

// Residual bijection for local indices outside [0, r_prime):
// s >= r_prime -> 2(s - r_prime), s < 0 -> -2s - 1.
uint64_t EscapeMap(int64_t s, int64_t r_prime);
int64_t EscapeUnmap(uint64_t residual, int64_t r_prime);

// Codes sample x through the window: local index, or sentinel followed by
// the Exp-Golomb residual in bypass bits.
void EncodeWithWindow(RangeEncoder& enc, const CodingWindow& win, int x);
// Throws DecodeError if the decoded sample leaves [0, max_value].
int DecodeWithWindow(RangeDecoder& dec, const CodingWindow& win,
                     const PixelRange& range);
// Ideal cost of EncodeWithWindow in bits.
double WindowCostBits(const CodingWindow& win, int x);

// Largest CDF table (in symbols) built since the last reset; used to check
// that table memory follows R and not the alphabet size.
int64_t PeakTableSymbols();
void ResetPeakTableSymbols();

}  // namespace hpac

#endif  // HPAC_PROB_H_
