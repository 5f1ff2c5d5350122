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


#include <algorithm>
#include <set>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "hpac/corpus.h"
#include "hpac/train.h"
#include "test_util.h"

namespace hpac {
namespace {

using testing::SmallConfig;

TEST(LearningRate, WarmupThenCosine) {
  TrainConfig c;
  c.steps = 2000;
  c.peak_lr = 1e-3;
  EXPECT_DOUBLE_EQ(LearningRate(0, c), 1e-3 / 500);
  EXPECT_DOUBLE_EQ(LearningRate(499, c), 1e-3);
  EXPECT_DOUBLE_EQ(LearningRate(500, c), 1e-3);
  EXPECT_NEAR(LearningRate(1250, c), 0.5e-3, 1e-15);
  EXPECT_NEAR(LearningRate(2000, c), 0.0, 1e-18);
  for (int t = 1; t < 500; ++t) EXPECT_GT(LearningRate(t, c), LearningRate(t - 1, c));
  for (int t = 501; t <= 2000; ++t) EXPECT_LE(LearningRate(t, c), LearningRate(t - 1, c));
}

TEST(LearningRate, ShortRunsReachTheTail) {
  TrainConfig c;
  c.steps = 100;
  EXPECT_DOUBLE_EQ(LearningRate(24, c), c.peak_lr);
  EXPECT_NEAR(LearningRate(100, c), 0.0, 1e-18);
}

TEST(Corpus, DeterministicAndCycling) {
  const auto a = MakeCorpus(6, 40, 24, 3, 8, 5);
  const auto b = MakeCorpus(6, 40, 24, 3, 8, 5);
  const auto c = MakeCorpus(6, 40, 24, 3, 8, 6);
  ASSERT_EQ(a.size(), 6u);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].samples, b[i].samples);
    EXPECT_NE(a[i].samples, c[i].samples);
    EXPECT_EQ(a[i].width, 40);
    EXPECT_EQ(a[i].height, 24);
    EXPECT_EQ(a[i].channels, 3);
  }
}

TEST(Corpus, ValuesInRangeForEveryKindAndDepth) {
  for (SynthKind k : {SynthKind::kGradient, SynthKind::kValueNoise,
                      SynthKind::kGlyphs, SynthKind::kOodText}) {
    for (int bd : {8, 12, 16}) {
      const ImageBuffer im = SynthImage(k, 33, 17, 1, bd, 3);
      ASSERT_EQ(im.samples.size(), 33u * 17u);
      const uint16_t hi = *std::max_element(im.samples.begin(), im.samples.end());
      EXPECT_LE(hi, (1u << bd) - 1);
      // Not a flat image.
      EXPECT_GT(std::set<uint16_t>(im.samples.begin(), im.samples.end()).size(), 1u);
    }
  }
}

TEST(Corpus, OodTextHasTwoLevels) {
  const ImageBuffer im = SynthImage(SynthKind::kOodText, 64, 64, 1, 8, 1);
  EXPECT_EQ(std::set<uint16_t>(im.samples.begin(), im.samples.end()).size(), 2u);
}

TEST(Train, RejectsBadInputs) {
  const ModelConfig cfg = SmallConfig(8, 2);
  const auto corpus = MakeCorpus(2, 32, 32, 1, 8, 1);
  TrainConfig tc;
  tc.steps = 1;
  tc.crop = 12;
  EXPECT_THROW(Train(cfg, corpus, tc), std::invalid_argument);
  tc.crop = 64;
  EXPECT_THROW(Train(cfg, corpus, tc), std::invalid_argument);
  tc.crop = 16;
  EXPECT_THROW(Train(cfg, std::span<const ImageBuffer>(), tc), std::invalid_argument);
  EXPECT_THROW(Train(SmallConfig(8, 2, 3), corpus, tc), std::invalid_argument);
}

TEST(Train, SeededDeterminism) {
  const ModelConfig cfg = SmallConfig(8, 2);
  const auto corpus = MakeCorpus(3, 32, 32, 1, 8, 2);
  TrainConfig tc;
  tc.steps = 4;
  tc.batch = 2;
  tc.crop = 16;
  const auto a = Train(cfg, corpus, tc);
  const auto b = Train(cfg, corpus, tc);
  tc.seed = 2;
  const auto c = Train(cfg, corpus, tc);
  std::vector<std::string> names;
  std::vector<AlignedVector<float>> va, vb, vc;
  a.ForEach([&](const std::string& n, const Tensor& t) {
    names.push_back(n);
    va.push_back(t.vec());
  });
  b.ForEach([&](const std::string&, const Tensor& t) { vb.push_back(t.vec()); });
  c.ForEach([&](const std::string&, const Tensor& t) { vc.push_back(t.vec()); });
  for (size_t i = 0; i < va.size(); ++i) EXPECT_EQ(va[i], vb[i]) << names[i];
  EXPECT_NE(va, vc);
}

TEST(Train, HeldOutImproves) {
  const ModelConfig cfg = SmallConfig(8, 2);
  const auto corpus = MakeCorpus(6, 48, 48, 1, 8, 3);
  const auto held = MakeCorpus(3, 48, 48, 1, 8, 99);
  TrainConfig tc;
  tc.steps = 120;
  tc.batch = 4;
  tc.crop = 24;
  tc.peak_lr = 3e-3;
  TrainReport rep;
  const auto w = Train(cfg, corpus, tc, &rep);
  ASSERT_EQ(rep.loss.size(), 120u);
  const double before = EvaluateBpsp(InitWeights<float>(cfg, tc.seed), held);
  const double after = EvaluateBpsp(w, held);
  EXPECT_LT(after, before - 0.5) << before << " -> " << after;
}

TEST(Train, ConstantCorpusIsNearlyFree) {
  const ModelConfig cfg = SmallConfig(8, 2);
  ImageBuffer flat = SynthImage(SynthKind::kGradient, 32, 32, 1, 8, 1);
  std::fill(flat.samples.begin(), flat.samples.end(), 77);
  const std::vector<ImageBuffer> corpus{flat};
  // Crops span 3x3 patches so an interior patch with all its grid neighbours
  // is seen; 2x2 crops do not carry over to larger images.
  TrainConfig tc;
  tc.steps = 300;
  tc.batch = 2;
  tc.crop = 24;
  tc.peak_lr = 3e-3;
  const auto w = Train(cfg, corpus, tc);
  EXPECT_LT(EvaluateBpsp(w, corpus), 0.25);
  ImageBuffer big = flat;
  big.width = big.height = 64;
  big.samples.assign(64 * 64, 77);
  EXPECT_LT(EvaluateBpsp(w, std::vector<ImageBuffer>{big}), 0.25);
}

TEST(Train, DivergenceAborts) {
  const ModelConfig cfg = SmallConfig(8, 2);
  const auto corpus = MakeCorpus(2, 32, 32, 1, 8, 4);
  TrainConfig tc;
  tc.steps = 60;
  tc.batch = 2;
  tc.crop = 16;
  tc.warmup = 0;
  tc.peak_lr = 1e4;
  EXPECT_THROW(Train(cfg, corpus, tc), NumericError);
}

}  // namespace
}  // namespace hpac
