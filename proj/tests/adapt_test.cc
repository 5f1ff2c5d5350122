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

#include "hpac/adapt.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hpac/bytes.h"
#include "test_util.h"

namespace hpac {
namespace {

using testing::MaxAbs;
using testing::MaxAbsDiff;
using testing::RandomImage;
using testing::RandomModel;
using testing::RandomTensor;
using testing::SmallConfig;

Tensor Forward(const ModelWeights<float>& w, const ImageBuffer& im,
               const SideBranch<float>* branch = nullptr) {
  const PatchLayout l = MakeLayout(1, im.height, im.width, im.channels, w.config.patch);
  const std::span<const ImageBuffer> one(&im, 1);
  return HpacForward(w, ImagesToPatches<float>(one, l, w.config.pixel_range(8)), l,
                     nullptr, branch);
}

AdapterSet RandomAdapters(const ModelConfig& cfg, uint64_t seed, double amp = 0.1) {
  AdapterSet a = AdapterSet::Create(cfg, {}, seed);
  std::mt19937_64 rng(seed + 1);
  for (Tensor* t : a.Factors())
    for (auto& v : t->vec()) v = float(std::uniform_real_distribution<>(-amp, amp)(rng));
  return a;
}

TEST(Adapters, ShapesAndCount) {
  const ModelConfig cfg = ModelConfig::Default(1);
  const AdapterSet a = AdapterSet::Create(cfg, {}, 1);
  ASSERT_EQ(a.sites().size(), size_t(cfg.depth * kNumSites));
  const int64_t c = cfg.channels, r = 8;
  int64_t expect = 0;
  for (const auto& s : a.sites()) {
    if (s.depthwise()) {
      const int64_t k = s.site == SiteId::kLcmDw ? cfg.block_kernel : cfg.spm_kernel;
      const int64_t rp = std::min<int64_t>(r, k);
      EXPECT_EQ(s.a.shape(), (Shape{c, rp}));
      EXPECT_EQ(s.c.shape(), (Shape{k, rp}));
      EXPECT_EQ(s.d.shape(), (Shape{k, rp}));
      expect += c * rp + 2 * k * rp;
    } else {
      const int64_t m = s.site == SiteId::kMlpUp ? c * cfg.mlp_ratio : c;
      EXPECT_EQ(s.a.shape(), (Shape{m, r}));
      EXPECT_EQ(s.b.shape(), (Shape{r, c}));
      expect += m * r + r * c;
    }
  }
  EXPECT_EQ(a.NumValues(), expect);
}

TEST(Adapters, ZeroSecondFactorGivesZeroDelta) {
  std::mt19937_64 rng(2);
  const Tensor a = RandomTensor<float>({6, 3}, rng);
  const Tensor b({3, 5});
  const Tensor dl = DeltaLinear(a, b);
  for (float v : dl.vec()) EXPECT_EQ(v, 0.0f);
  const Tensor c = RandomTensor<float>({3, 3}, rng);
  const Tensor dd = DeltaDepthwise(a, c, Tensor({3, 3}));
  for (float v : dd.vec()) EXPECT_EQ(v, 0.0f);
}

TEST(Adapters, RankOneDepthwiseDelta) {
  const Tensor a({4, 1}, 1.0f);
  Tensor c({5, 1}), d({5, 1});
  c[1] = 1.0f;
  d[3] = 1.0f;
  const Tensor dw = DeltaDepthwise(a, c, d);
  ASSERT_EQ(dw.shape(), (Shape{4, 1, 5, 5}));
  for (int ch = 0; ch < 4; ++ch)
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        EXPECT_EQ(dw[(ch * 5 + i) * 5 + j], (i == 1 && j == 3) ? 1.0f : 0.0f);
}

TEST(Adapters, FactorGradients) {
  std::mt19937_64 rng(3);
  Tensor64 a = RandomTensor<double>({5, 3}, rng), b = RandomTensor<double>({3, 4}, rng);
  const Tensor64 g = RandomTensor<double>({5, 4}, rng);
  Tensor64 ga(a.shape()), gb(b.shape());
  DeltaLinearBackward(g, a, b, &ga, &gb);
  auto ll = [&] { return testing::Dot(DeltaLinear(a, b), g); };
  EXPECT_LT(testing::GradRelErr(ll, &a, ga), 1e-6);
  EXPECT_LT(testing::GradRelErr(ll, &b, gb), 1e-6);

  Tensor64 c = RandomTensor<double>({3, 3}, rng), d = RandomTensor<double>({3, 3}, rng);
  Tensor64 a2 = RandomTensor<double>({4, 3}, rng);
  const Tensor64 g2 = RandomTensor<double>({4, 1, 3, 3}, rng);
  Tensor64 ga2(a2.shape()), gc(c.shape()), gd(d.shape());
  DeltaDepthwiseBackward(g2, a2, c, d, &ga2, &gc, &gd);
  auto ld = [&] { return testing::Dot(DeltaDepthwise(a2, c, d), g2); };
  EXPECT_LT(testing::GradRelErr(ld, &a2, ga2), 1e-6);
  EXPECT_LT(testing::GradRelErr(ld, &c, gc), 1e-6);
  EXPECT_LT(testing::GradRelErr(ld, &d, gd), 1e-6);
}

TEST(Adapters, FreshInitIsBitIdentical) {
  const auto w = RandomModel<float>(SmallConfig(8, 2, 3), 4);
  const AdapterSet a = AdapterSet::Create(w.config, {}, 5);
  const ImageBuffer im = RandomImage(16, 16, 3, 8, 6);
  const Tensor base = Forward(w, im);
  EXPECT_EQ(Forward(MergeAdapters(w, a), im).vec(), base.vec());
  const AdapterBranch br(w.config, a);
  EXPECT_EQ(Forward(w, im, &br).vec(), base.vec());
}

TEST(Adapters, MergeMatchesOnTheFly) {
  const auto w = RandomModel<float>(SmallConfig(8, 2, 1), 7);
  const AdapterSet a = RandomAdapters(w.config, 8);
  const ImageBuffer im = RandomImage(16, 16, 1, 8, 9);
  const Tensor merged = Forward(MergeAdapters(w, a), im);
  const AdapterBranch br(w.config, a);
  const Tensor fly = Forward(w, im, &br);
  EXPECT_LE(MaxAbsDiff(merged, fly) / MaxAbs(merged), 1e-5);
  EXPECT_GT(MaxAbsDiff(merged, Forward(w, im)), 1e-3);  // the delta matters
}

TEST(Adapters, MergeAddsSiteDelta) {
  const auto w = RandomModel<float>(SmallConfig(), 10);
  const AdapterSet a = RandomAdapters(w.config, 11);
  const auto m = MergeAdapters(w, a);
  for (const auto& s : a.sites()) {
    const Tensor& before = SiteWeight(w, s.block, s.site);
    const Tensor& after = SiteWeight(m, s.block, s.site);
    const Tensor d = SiteDelta(s);
    ASSERT_EQ(d.size(), before.size());
    for (int64_t i = 0; i < d.size(); ++i) EXPECT_EQ(after[i], before[i] + d[i]);
  }
}

TEST(Quantize, Rounding) {
  const Tensor v({4}, std::vector<float>{0.024f, 0.026f, -0.026f, 0.124f});
  const Tensor q = QuantizeSte(v, 0.05);
  EXPECT_EQ(q[0], 0.0f);
  EXPECT_FLOAT_EQ(q[1], 0.05f);
  EXPECT_FLOAT_EQ(q[2], -0.05f);
  EXPECT_FLOAT_EQ(q[3], 0.10f);
  EXPECT_EQ(QuantizeIndices(v, 0.05), (std::vector<int64_t>{0, 1, -1, 2}));
}

TEST(Quantize, NoiseSupport) {
  std::mt19937_64 rng(12);
  const Tensor v = RandomTensor<float>({1000}, rng);
  const Tensor n = NoiseSample(v, 0.05, &rng);
  for (int64_t i = 0; i < v.size(); ++i) EXPECT_LE(std::fabs(n[i] - v[i]), 0.025 + 1e-7);
}

TEST(ParamBits, ZeroIndexCost) {
  EXPECT_NEAR(ExactIndexBits(0, 0.05, 0.05), 2.0297, 1e-4);
  for (int q = 1; q < 30; ++q) {
    EXPECT_DOUBLE_EQ(ExactIndexBits(q, 0.05, 0.05), ExactIndexBits(-q, 0.05, 0.05));
    EXPECT_GE(ExactIndexBits(q, 0.05, 0.05), ExactIndexBits(q - 1, 0.05, 0.05));
    EXPECT_LE(ExactIndexBits(q, 0.05, 0.05), 16.0);  // table floor
  }
  EXPECT_GT(ExactIndexBits(5, 0.05, 0.05), ExactIndexBits(4, 0.05, 0.05));
}

TEST(ParamBits, SurrogateGradient) {
  std::mt19937_64 rng(13);
  const Tensor v = RandomTensor<float>({20}, rng, -0.3, 0.3);
  std::vector<float> g(20, 0.0f);
  SurrogateParamBits(v.span(), 0.05, 0.05, g, 2.0);
  for (int i = 0; i < 20; ++i) {
    const float h = 1e-3f;
    std::vector<float> up(v.vec().begin(), v.vec().end()), down = up;
    up[i] += h;
    down[i] -= h;
    const double num = (SurrogateParamBits(up, 0.05, 0.05) -
                        SurrogateParamBits(down, 0.05, 0.05)) / (2 * h);
    EXPECT_NEAR(g[i], 2.0 * num, 1e-2 * (1 + std::fabs(num)));
  }
  // The surrogate tracks the exact cost for values on the grid.
  const std::vector<float> grid = {0.0f, 0.05f, -0.15f};
  double exact = 0;
  for (float x : grid) exact += ExactIndexBits(std::lround(x / 0.05), 0.05, 0.05);
  EXPECT_NEAR(SurrogateParamBits(grid, 0.05, 0.05), exact, 0.15);
}

TEST(Payload, ZerosAreSmallAndRoundtrip) {
  const ModelConfig cfg = SmallConfig();
  const AdapterSet z = AdapterSet::Zeros(cfg, {});
  const auto bytes = EncodeAdapters(z);
  // About 2.03 bits per zero under the prior, plus a 10-byte prefix.
  EXPECT_LE(bytes.size(), z.NumValues() * 2.04 / 8 + 16);
  const AdapterSet back = DecodeAdapters(bytes, cfg);
  for (const Tensor* t : back.Factors())
    for (float v : t->vec()) EXPECT_EQ(v, 0.0f);
}

TEST(Payload, RandomIndicesRoundtripAndMatchExactBits) {
  const ModelConfig cfg = ModelConfig::Tiny(1);
  AdapterSet a = AdapterSet::Zeros(cfg, {});
  std::mt19937_64 rng(14);
  std::normal_distribution<double> nd(0.0, 4.0);
  for (Tensor* t : a.Factors())
    for (auto& v : t->vec()) v = float(std::clamp<double>(std::round(nd(rng)), -50, 50) * 0.05);
  const AdapterSet q = QuantizeAdapters(a);
  const auto bytes = EncodeAdapters(q);
  const AdapterSet back = DecodeAdapters(bytes, cfg);
  const auto fq = q.Factors();
  const auto fb = back.Factors();
  ASSERT_EQ(fq.size(), fb.size());
  for (size_t i = 0; i < fq.size(); ++i) {
    for (int64_t j = 0; j < fq[i]->size(); ++j) {
      ASSERT_EQ((*fq[i])[j], (*fb[i])[j]) << i << " " << j;
    }
  }
  const double exact = ExactParamBits(q);
  EXPECT_LE(std::fabs(bytes.size() * 8.0 - exact), 0.01 * exact + 16 * 8);
}

TEST(Payload, PathologicalIndexEscapes) {
  const ModelConfig cfg = SmallConfig();
  AdapterSet a = AdapterSet::Zeros(cfg, {});
  a.sites()[0].a[0] = float(1e6 * 0.05);
  a.sites()[3].a[5] = float(-70 * 0.05);
  const AdapterSet q = QuantizeAdapters(a);
  const AdapterSet back = DecodeAdapters(EncodeAdapters(q), cfg);
  EXPECT_EQ(QuantizeIndices(back.sites()[0].a, 0.05)[0], 1000000);
  EXPECT_EQ(QuantizeIndices(back.sites()[3].a, 0.05)[5], -70);
}

TEST(Payload, BothSidesMergeIdentically) {
  const auto w = RandomModel<float>(SmallConfig(), 15);
  const AdapterSet q = QuantizeAdapters(RandomAdapters(w.config, 16, 0.3));
  const AdapterSet back = DecodeAdapters(EncodeAdapters(q), w.config);
  const auto m1 = MergeAdapters(w, q), m2 = MergeAdapters(w, back);
  std::vector<const Tensor*> t1, t2;
  m1.ForEach([&](const std::string&, const Tensor& t) { t1.push_back(&t); });
  m2.ForEach([&](const std::string&, const Tensor& t) { t2.push_back(&t); });
  for (size_t i = 0; i < t1.size(); ++i) EXPECT_EQ(t1[i]->vec(), t2[i]->vec());
}

TEST(Payload, MalformedRejected) {
  const ModelConfig cfg = SmallConfig();
  auto bytes = EncodeAdapters(AdapterSet::Zeros(cfg, {}));
  auto bad = bytes;
  bad[1] = 9;
  EXPECT_THROW(DecodeAdapters(bad, cfg), FormatError);
  bad = bytes;
  bad[0] = 0;
  EXPECT_THROW(DecodeAdapters(bad, cfg), FormatError);
  EXPECT_ANY_THROW(DecodeAdapters(std::span(bytes).first(5), cfg));
}

}  // namespace
}  // namespace hpac
