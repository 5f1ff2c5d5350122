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

#include "hpac/prob.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "hpac/coder.h"

namespace hpac {
namespace {

double Sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

MixtureParams Single(double mean, double scale) {
  MixtureParams p;
  p.k = 1;
  p.mean[0] = mean;
  p.scale[0] = scale;
  return p;
}

MixtureParams RandomParams(std::mt19937_64& rng, const PixelRange& range) {
  std::uniform_real_distribution<double> u(0, 1);
  MixtureParams p;
  p.k = 1 + int(rng() % 5);
  for (int k = 0; k < p.k; ++k) {
    p.logit[k] = 4 * u(rng) - 2;
    p.mean[k] = range.v_min + (range.v_max - range.v_min) * (1.4 * u(rng) - 0.2);
    p.scale[k] = std::exp(-6.9 + 6.9 * u(rng));
  }
  return p;
}

TEST(BinProb, UnitBinAtZero) {
  const PixelRange r{8, -128.0, 128.0};  // bin width 1, x=128 -> 0.0
  EXPECT_NEAR(BinProb(Single(0.0, 1.0), 128, r), 0.244919, 1e-6);
  EXPECT_NEAR(BinProb(Single(0.0, 1.0), 128, r), 2 * Sig(0.5) - 1, 1e-14);
}

TEST(BinProb, SymmetricBin) {
  const PixelRange r{8, -1.0, 1.0};
  for (double s : {0.001, 0.02, 0.5, 3.0}) {
    EXPECT_NEAR(BinProb(Single(r.Normalize(77), s), 77, r),
                2 * Sig(r.half_bin() / s) - 1, 1e-12);
  }
}

TEST(BinProb, SumsToOneOverAlphabet) {
  std::mt19937_64 rng(1);
  for (int b : {8, 12}) {
    const PixelRange r{b, -1.0, 1.0};
    for (int t = 0; t < 20; ++t) {
      const MixtureParams p = RandomParams(rng, r);
      double sum = 0;
      for (int x = 0; x <= r.max_value(); ++x) {
        const double q = BinProb(p, x, r);
        EXPECT_GE(q, 0.0);
        sum += q;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(BinProb, GradientMatchesFiniteDifference) {
  std::mt19937_64 rng(2);
  const PixelRange r{8, -1.0, 1.0};
  for (int t = 0; t < 50; ++t) {
    MixtureParams p = RandomParams(rng, r);
    for (int k = 0; k < p.k; ++k) p.scale[k] = std::max(p.scale[k], 0.01);
    const int x = int(rng() % 256);
    MixtureGrad g;
    LogBinProb(p, x, r, &g);
    const double h = 1e-6;
    auto num = [&](double* v) {
      const double keep = *v;
      *v = keep + h;
      const double up = LogBinProb(p, x, r);
      *v = keep - h;
      const double down = LogBinProb(p, x, r);
      *v = keep;
      return (up - down) / (2 * h);
    };
    for (int k = 0; k < p.k; ++k) {
      EXPECT_NEAR(g.logit[k], num(&p.logit[k]), 1e-5 * (1 + std::fabs(g.logit[k])));
      EXPECT_NEAR(g.mean[k], num(&p.mean[k]), 1e-4 * (1 + std::fabs(g.mean[k])));
      EXPECT_NEAR(g.scale[k], num(&p.scale[k]), 1e-4 * (1 + std::fabs(g.scale[k])));
    }
  }
}

TEST(BinProb, FarTailsStayFinite) {
  const PixelRange r{16, -1.0, 1.0};
  const MixtureParams p = Single(-1.0, 1e-3);
  const double lp = LogBinProb(p, 65535, r);
  EXPECT_TRUE(std::isfinite(lp));
  EXPECT_LT(lp, -500);
}

TEST(BinProb, RejectsBadParams) {
  const PixelRange r{8, -1.0, 1.0};
  EXPECT_THROW(BinProb(Single(0.0, 0.0), 3, r), std::invalid_argument);
  MixtureParams p = Single(0.0, 0.1);
  p.k = 0;
  EXPECT_THROW(BinProb(p, 3, r), std::invalid_argument);
}

TEST(AfcCenter, Examples) {
  const PixelRange r{12, -1.0, 1.0};
  EXPECT_NEAR(AfcCenter(Single(r.Normalize(321), 0.1), r), 321.0, 1e-9);
  MixtureParams two;
  two.k = 2;
  two.mean = {r.Normalize(100), r.Normalize(300)};
  two.scale = {0.1, 0.1};
  EXPECT_NEAR(AfcCenter(two, r), 200.0, 1e-9);
  two.logit = {std::log(3.0), 0.0};
  two.mean = {r.Normalize(0), r.Normalize(400)};
  EXPECT_NEAR(AfcCenter(two, r), 100.0, 1e-9);
}

TEST(AfcWindow, FullAlphabetAt8Bit) {
  const PixelRange r{8, -1.0, 1.0};
  for (int rr : {256, 1024}) {
    const CodingWindow w = AfcWindow(Single(0.3, 0.05), rr, r);
    EXPECT_EQ(w.x_lo, 0);
    EXPECT_EQ(w.x_hi, 255);
    EXPECT_NEAR(w.escape_mass, 0.0, 1e-12);
    EXPECT_EQ(w.table.freq(w.sentinel()), 1u);  // floor only
  }
}

TEST(AfcWindow, ClampsAtLowEdge) {
  const PixelRange r{12, -1.0, 1.0};
  const CodingWindow w = AfcWindow(Single(r.Normalize(500), 0.01), 1024, r);
  EXPECT_EQ(w.x_lo, 0);
  EXPECT_EQ(w.x_hi, 1012);
}

TEST(AfcWindow, CenterOutsideAlphabetIsClamped) {
  const PixelRange r{12, -1.0, 1.0};
  const CodingWindow hi = AfcWindow(Single(5.0, 0.01), 64, r);
  EXPECT_EQ(hi.x_hi, 4095);
  EXPECT_EQ(hi.x_lo, 4095 - 32);
  const CodingWindow lo = AfcWindow(Single(-5.0, 0.01), 64, r);
  EXPECT_EQ(lo.x_lo, 0);
  EXPECT_EQ(lo.x_hi, 32);
}

TEST(AfcWindow, TablesSumTo65536AndArePositive) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 1000; ++t) {
    const int b = (t % 3 == 0) ? 8 : (t % 3 == 1 ? 12 : 16);
    const PixelRange r{b, -1.0, 1.0};
    const int rr = 2 + int(rng() % 2000);
    const CodingWindow w = AfcWindow(RandomParams(rng, r), rr, r);
    ASSERT_EQ(w.table.num_symbols(), w.count() + 1);
    uint64_t sum = 0;
    for (int s = 0; s < w.table.num_symbols(); ++s) {
      EXPECT_GE(w.table.freq(s), 1u);
      sum += w.table.freq(s);
    }
    EXPECT_EQ(sum, 65536u);
  }
}

TEST(AfcWindow, TableSizeFollowsR) {
  ResetPeakTableSymbols();
  const PixelRange r{16, -1.0, 1.0};
  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) AfcWindow(RandomParams(rng, r), 1024, r);
  EXPECT_LE(PeakTableSymbols(), 1024 + 2);
}

TEST(AfcWindow, RejectsBadR) {
  const PixelRange r{8, -1.0, 1.0};
  EXPECT_THROW(AfcWindow(Single(0, 0.1), 1, r), std::invalid_argument);
  EXPECT_THROW(AfcWindow(Single(0, 0.1), 40000, r), std::invalid_argument);
}

TEST(QuantizePmf, ExactSumAndFloors) {
  std::vector<double> p = {0.5, 0.25, 0.25, 0.0, 1e-12};
  const auto q = QuantizePmf(p);
  EXPECT_EQ(std::accumulate(q.begin(), q.end(), uint64_t{0}), 65536u);
  EXPECT_EQ(q[3], 1u);
  EXPECT_EQ(q[4], 1u);
  EXPECT_NEAR(q[0], 32767, 2);
}

TEST(QuantizePmf, TiesAreDeterministic) {
  std::vector<double> p(3, 1.0 / 3);
  const auto q = QuantizePmf(p);
  EXPECT_EQ(q[0], 21846u);
  EXPECT_EQ(q[1], 21845u);
  EXPECT_EQ(q[2], 21845u);
}

TEST(Escape, Examples) {
  EXPECT_EQ(EscapeMap(10, 10), 0u);
  EXPECT_EQ(EscapeMap(-1, 10), 1u);
  EXPECT_EQ(EscapeMap(11, 10), 2u);
  EXPECT_EQ(EscapeMap(-2, 10), 3u);
}

TEST(Escape, BijectionOverRange) {
  for (int64_t rp : {1, 7, 1024}) {
    for (int64_t s = -10000; s < rp + 10000; ++s) {
      if (s >= 0 && s < rp) continue;
      ASSERT_EQ(EscapeUnmap(EscapeMap(s, rp), rp), s);
    }
  }
}

TEST(WindowCoding, RoundtripWithEscapes) {
  std::mt19937_64 rng(5);
  const PixelRange r{12, -1.0, 1.0};
  std::vector<std::pair<MixtureParams, int>> items;
  for (int t = 0; t < 3000; ++t) {
    items.push_back({RandomParams(rng, r), int(rng() % 4096)});
  }
  RangeEncoder enc;
  double ideal = 0;
  int escapes = 0;
  for (const auto& [p, x] : items) {
    const CodingWindow w = AfcWindow(p, 64, r);
    if (x < w.x_lo || x > w.x_hi) ++escapes;
    ideal += WindowCostBits(w, x);
    EncodeWithWindow(enc, w, x);
  }
  const auto bytes = enc.Finish();
  EXPECT_GT(escapes, 100);
  EXPECT_LE(bytes.size() * 8.0, ideal * 1.001 + 256);
  RangeDecoder dec(bytes);
  for (const auto& [p, x] : items) {
    ASSERT_EQ(DecodeWithWindow(dec, AfcWindow(p, 64, r), r), x);
  }
}

}  // namespace
}  // namespace hpac
