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


// Criteria 7 (adapters) and 8 (SARP-FT).

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "acceptance.h"
#include "hpac/adapt.h"
#include "hpac/codec.h"
#include "hpac/corpus.h"
#include "hpac/sarpft.h"
#include "test_util.h"

namespace hpac::acceptance {
namespace {

using testing::RandomImage;
using testing::RandomModel;

Tensor Forward(const ModelWeights<float>& w, const ImageBuffer& im,
               const SideBranch<float>* branch = nullptr) {
  const PatchLayout l = MakeLayout(1, im.height, im.width, im.channels, w.config.patch);
  const std::span<const ImageBuffer> one(&im, 1);
  return HpacForward(w, ImagesToPatches<float>(one, l, w.config.pixel_range(im.bit_depth)),
                     l, nullptr, branch);
}

bool BitEqual(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

Result Adapters(const Settings&) {
  Result r;
  const ModelConfig configs[] = {ModelConfig::Default(1), ModelConfig::Fast(3),
                                 ModelConfig::Tiny(1)};
  std::mt19937_64 rng(7);
  int idx = 0;
  double worst_rel = 0.0, worst_bits = 0.0;
  for (const ModelConfig& cfg : configs) {
    const auto w = RandomModel<float>(cfg, 70 + idx);
    const ImageBuffer im = RandomImage(40, 36, cfg.channels_in, 8, 80 + idx);
    const Tensor base = Forward(w, im);

    // Zero-initialized B and D: the model is unchanged, bit for bit.
    const AdapterSet fresh = AdapterSet::Create(cfg, {}, 90 + idx);
    r.Check(BitEqual(Forward(MergeAdapters(w, fresh), im), base),
            "zero-init merged forward is bit-identical");
    const AdapterBranch fresh_branch(cfg, fresh);
    r.Check(BitEqual(Forward(w, im, &fresh_branch), base),
            "zero-init on-the-fly forward is bit-identical");
    r.Check(EncodePixels(im, MergeAdapters(w, QuantizeAdapters(fresh)), 1024, nullptr) ==
                EncodePixels(im, w, 1024, nullptr),
            "zero-init coded bytes identical");

    // Non-zero adapters at several magnitudes.
    for (double amp : {0.02, 0.1, 0.4}) {
      AdapterSet phi = AdapterSet::Create(cfg, {}, 100 + idx);
      std::normal_distribution<double> g(0.0, amp);
      for (Tensor* t : phi.Factors()) {
        for (float& v : t->vec()) v = static_cast<float>(g(rng));
      }
      const Tensor merged = Forward(MergeAdapters(w, phi), im);
      const AdapterBranch branch(cfg, phi);
      const Tensor fly = Forward(w, im, &branch);
      const double rel = testing::MaxAbsDiff(merged, fly) /
                         std::max(testing::MaxAbs(fly), 1e-12);
      worst_rel = std::max(worst_rel, rel);
      r.Check(rel <= 1e-5, "merge vs on-the-fly rel diff " + std::to_string(rel));

      const AdapterSet q = QuantizeAdapters(phi);
      const auto bytes = EncodeAdapters(q);
      const AdapterSet back = DecodeAdapters(bytes, cfg);
      const auto fq = q.Factors();
      const auto fb = back.Factors();
      bool exact = fq.size() == fb.size();
      for (size_t i = 0; exact && i < fq.size(); ++i) exact = fq[i]->vec() == fb[i]->vec();
      r.Check(exact, "adapter payload decodes exactly");
      const double exact_bits = ExactParamBits(q);
      const double payload_bits = 8.0 * bytes.size();
      const double gap = std::fabs(payload_bits - exact_bits);
      worst_bits = std::max(worst_bits, gap / exact_bits);
      r.Check(gap <= 0.01 * exact_bits + 128,
              "payload " + std::to_string(bytes.size()) + " B vs exact " +
                  std::to_string(exact_bits / 8) + " B");
    }
    ++idx;
  }
  const double q0 = ExactIndexBits(0, 0.05, 0.05);
  r.Notef("q=0 bin cost ", q0, " bits");
  r.Check(std::fabs(q0 - 2.0297) < 5e-4, "q=0 bin cost is 2.0297 bits");
  r.Notef("merge vs on-the-fly worst rel diff ", worst_rel,
          "; payload vs exact bits worst relative gap ", worst_bits);
  return r;
}

Result SarpFineTuning(const Settings& s, TrainedModel& desk) {
  Result r;
  std::mt19937_64 rng(8);

  // Region search against brute force.
  int wrong = 0;
  for (int t = 0; t < 1000; ++t) {
    RateMap m;
    m.grid_h = 1 + static_cast<int>(rng() % 20);
    m.grid_w = 1 + static_cast<int>(rng() % 20);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    m.bits.resize(m.grid_h * m.grid_w);
    for (double& v : m.bits) v = u(rng);
    const int h = 1 + static_cast<int>(rng() % m.grid_h);
    const int w = 1 + static_cast<int>(rng() % m.grid_w);
    double best = -1;
    RegionPos arg;
    for (int i = 0; i + h <= m.grid_h; ++i) {
      for (int j = 0; j + w <= m.grid_w; ++j) {
        double sum = 0;
        for (int a = 0; a < h; ++a)
          for (int b = 0; b < w; ++b) sum += m.at(i + a, j + b);
        if (sum > best + 1e-9) {
          best = sum;
          arg = {i, j};
        }
      }
    }
    if (!(FindRegion(IntegralImage(m), h, w) == arg)) ++wrong;
  }
  r.Check(wrong == 0, std::to_string(wrong) + " of 1000 region searches differ");
  r.Note("region search equals brute force on 1000 random rate maps");

  // Schedule endpoints.
  Schedule sch;
  sch.steps = s.ft_steps;
  r.Check(std::fabs(ScheduleAlpha(0, sch) - sch.b) < 1e-12, "alpha(0) = b");
  const int full_from = static_cast<int>(std::ceil((1.0 - sch.d) * sch.steps));
  bool tail = true, mono = true;
  for (int t = 0; t < sch.steps; ++t) {
    if (t >= full_from) tail = tail && ScheduleAlpha(t, sch) == 1.0;
    if (t > 0) mono = mono && ScheduleAlpha(t, sch) >= ScheduleAlpha(t - 1, sch);
  }
  r.Check(tail, "alpha = 1 over the final d*T steps");
  r.Check(mono, "alpha non-decreasing");
  r.Notef("schedule: alpha(0)=", ScheduleAlpha(0, sch), ", alpha=1 from step ",
          full_from, " of ", sch.steps);

  // Out-of-distribution set: total codelength with and without adapters.
  const auto& w = desk.Get(&r);
  int wins = 0;
  double sum_base = 0, sum_tuned = 0, sum_sent = 0, sarp_secs = 0, full_secs = 0;
  int64_t sum_full_tuned = 0, sum_sarp_tuned_subset = 0;
  const int timed = std::min(4, s.ood_images);
  for (int i = 0; i < s.ood_images; ++i) {
    const ImageBuffer im = SynthImage(SynthKind::kOodText, s.ood_size, s.ood_size, 1, 8, 5000 + i);
    EncodeOptions o;
    o.fine_tune = true;
    o.ft.schedule.steps = s.ft_steps;
    EncodeStats st;
    const auto bytes = EncodeImage(im, w, o, &st);
    r.Check(DecodeImage(bytes, w) == im, "OOD image roundtrip");
    const double n = static_cast<double>(im.num_subpixels());
    const double base = st.base_total_bytes * 8.0 / n;
    const double tuned = st.tuned_total_bytes * 8.0 / n;
    wins += st.tuned_total_bytes < st.base_total_bytes;
    sum_base += base;
    sum_tuned += tuned;
    sum_sent += st.bpsp;
    if (i < timed) {
      sarp_secs += st.fine_tune_seconds;
      sum_sarp_tuned_subset += st.tuned_total_bytes;
      EncodeOptions f = o;
      f.ft.strategy = RegionStrategy::kFullImage;
      EncodeStats fs;
      EncodeImage(im, w, f, &fs);
      full_secs += fs.fine_tune_seconds;
      sum_full_tuned += fs.tuned_total_bytes;
    }
    char line[160];
    if (st.adapters_sent()) {
      std::snprintf(line, sizeof line,
                    "OOD %2d: pre-trained %.4f bpsp, after SARP-FT %.4f bpsp (adapters %zu B)",
                    i, base, tuned, st.adapter_bytes);
    } else {
      std::snprintf(line, sizeof line,
                    "OOD %2d: pre-trained %.4f bpsp, after SARP-FT %.4f bpsp (base stream kept)",
                    i, base, tuned);
    }
    r.Note(line);
  }
  const int need = (4 * s.ood_images + 4) / 5;  // ceil(0.8 * n)
  r.Notef("SARP-FT shortens the codelength on ", wins, " of ", s.ood_images,
          " images (need ", need, "); mean ", sum_base / s.ood_images, " -> ",
          sum_tuned / s.ood_images, " bpsp, as written ", sum_sent / s.ood_images);
  r.Check(wins >= need, "codelength after T steps < pre-trained on >= 80% of the OOD set");
  r.Notef("fine-tuning wall-clock on ", timed, " images at T=", s.ft_steps, ": SARP ",
          sarp_secs, " s, full image ", full_secs, " s; codelength ",
          sum_sarp_tuned_subset, " vs ", sum_full_tuned, " bytes");
  r.Check(sarp_secs < full_secs, "SARP-FT faster than full-image FT at equal T");
  return r;
}

}  // namespace hpac::acceptance
