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


// verify: fast self-checks of an installed build. Exits nonzero on failure.

#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>

#include "commands.h"
#include "hpac/adapt.h"
#include "hpac/codec.h"
#include "hpac/coder.h"
#include "hpac/corpus.h"
#include "hpac/prob.h"
#include "hpac/scan.h"

namespace hpac::cli {
namespace {

bool ScanPartitions() {
  for (int p : {1, 2, 5, 16, 32}) {
    for (int d = 0; d <= 3; ++d) {
      const GroupSchedule g = BuildSchedule({p, d});
      std::vector<int> seen(p * p, 0);
      for (const Group& gr : g.groups) {
        for (const PatchCoord& m : gr.members) {
          if (GroupIndex(m.r, m.c, d) != gr.index) return false;
          ++seen[m.r * p + m.c];
        }
      }
      for (int s : seen) {
        if (s != 1) return false;
      }
    }
  }
  return true;
}

bool CoderRoundtrip() {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 300);
    std::vector<double> probs(n);
    for (auto& q : probs) q = 1.0 + static_cast<double>(rng() % 500);
    const CdfTable t = CdfTable::FromFrequencies(QuantizePmf(probs));
    std::vector<int> msg(2000);
    RangeEncoder enc;
    for (int& s : msg) {
      s = static_cast<int>(rng() % n);
      enc.Encode(s, t);
    }
    const auto bytes = enc.Finish();
    RangeDecoder dec(bytes);
    for (int s : msg) {
      if (dec.Decode(t) != s) return false;
    }
  }
  return true;
}

bool WindowsNormalized() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const PixelRange range{8, -1.0, 1.0};
  for (int trial = 0; trial < 200; ++trial) {
    MixtureParams p;
    p.k = 3;
    for (int i = 0; i < p.k; ++i) {
      p.logit[i] = 2 * u(rng);
      p.mean[i] = u(rng);
      p.scale[i] = std::exp(-6 + 5 * (u(rng) + 1) / 2);
    }
    const CodingWindow w = AfcWindow(p, 2 + static_cast<int>(rng() % 300), range);
    if (w.table.cumulative().back() != 65536u) return false;
    if (w.table.num_symbols() != w.count() + 1) return false;
  }
  return true;
}

bool CodecRoundtrip() {
  for (int c : {1, 3}) {
    const ModelWeights<float> w = InitWeights<float>(ModelConfig::Tiny(c), kBuiltinSeed);
    const ImageBuffer im = SynthImage(SynthKind::kGradient, 21, 18, c, 8, 3 + c);
    EncodeOptions o;
    o.window = 64;
    if (DecodeImage(EncodeImage(im, w, o), w) != im) return false;
  }
  return true;
}

bool ZeroAdaptersAreIdentity() {
  const ModelConfig cfg = ModelConfig::Tiny(1);
  const ModelWeights<float> w = InitWeights<float>(cfg, kBuiltinSeed);
  const ModelWeights<float> merged = MergeAdapters(w, AdapterSet::Zeros(cfg, {}));
  const ImageBuffer im = SynthImage(SynthKind::kGradient, 20, 20, 1, 8, 1);
  return EncodePixels(im, w, 256, nullptr) == EncodePixels(im, merged, 256, nullptr);
}

}  // namespace

void RegisterVerify(CLI::App& app) {
  CLI::App* v = app.add_subcommand("verify", "Run quick self-checks");
  v->callback([] {
    const std::pair<const char*, std::function<bool()>> checks[] = {
        {"scan groups partition the patch", ScanPartitions},
        {"range coder roundtrip", CoderRoundtrip},
        {"AFC tables sum to 2^16", WindowsNormalized},
        {"codec roundtrip", CodecRoundtrip},
        {"zero adapters leave the stream unchanged", ZeroAdaptersAreIdentity},
    };
    int failed = 0;
    for (const auto& [name, fn] : checks) {
      const bool ok = fn();
      failed += ok ? 0 : 1;
      std::printf("%s  %s\n", ok ? "ok  " : "FAIL", name);
    }
    if (failed > 0) throw CLI::RuntimeError(1);
  });
}

}  // namespace hpac::cli
