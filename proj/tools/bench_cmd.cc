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


// finetune-bench and sweep: CSV reports.

#include <chrono>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "commands.h"
#include "hpac/codec.h"
#include "hpac/train.h"

namespace hpac::cli {
namespace {

double Since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct FtBenchArgs {
  std::vector<std::string> images;
  ModelChoice model;
  int count = 5;
  int size = 192;
  int steps = 50;
  std::vector<std::string> strategies = {"rate", "random", "full"};
};

void RunFtBench(const FtBenchArgs& a) {
  const auto images = LoadOrSynthesize(a.images, a.count, a.size, 1, 8, true, 5000);
  std::printf("image,strategy,steps,ft_seconds,base_bpsp,adapted_bpsp,written_bpsp\n");
  for (size_t i = 0; i < images.size(); ++i) {
    const ImageBuffer& im = images[i];
    const ModelWeights<float> w = ResolveModel(a.model, im.channels);
    const double n = static_cast<double>(im.num_subpixels());
    for (const std::string& s : a.strategies) {
      EncodeOptions o;
      o.fine_tune = true;
      o.ft.schedule.steps = a.steps;
      o.ft.strategy = s == "full"     ? RegionStrategy::kFullImage
                      : s == "random" ? RegionStrategy::kRandom
                                      : RegionStrategy::kRateGuided;
      EncodeStats st;
      const auto bytes = EncodeImage(im, w, o, &st);
      std::printf("%zu,%s,%d,%.3f,%.5f,%.5f,%.5f\n", i, s.c_str(), a.steps,
                  st.fine_tune_seconds, st.base_total_bytes * 8.0 / n,
                  st.tuned_total_bytes * 8.0 / n, bytes.size() * 8.0 / n);
      std::fflush(stdout);
    }
  }
}

struct SweepArgs {
  std::vector<std::string> images;
  ModelChoice model;
  std::vector<int> deltas, patches, windows;
  int count = 3;
  int size = 128;
  int bit_depth = 8;
  int train_steps = 0;
};

void RunSweep(const SweepArgs& a) {
  if (a.deltas.empty() && a.patches.empty() && a.windows.empty()) {
    throw CLI::ValidationError("sweep", "give at least one of --delta, --patch, --window");
  }
  const auto images = LoadOrSynthesize(a.images, a.count, a.size, 1, a.bit_depth, false, 900);
  const ModelWeights<float> base = ResolveModel(a.model, images[0].channels);
  std::printf("param,value,bpsp,encode_ms,decode_ms,lossless\n");
  auto run = [&](const char* param, int value, const ModelWeights<float>& w, int window) {
    double bits = 0, n = 0, enc = 0, dec = 0;
    bool ok = true;
    for (const ImageBuffer& im : images) {
      const auto t0 = std::chrono::steady_clock::now();
      EncodeOptions o;
      o.window = window;
      const auto bytes = EncodeImage(im, w, o);
      enc += Since(t0);
      const auto t1 = std::chrono::steady_clock::now();
      ok = ok && DecodeImage(bytes, w) == im;
      dec += Since(t1);
      bits += 8.0 * bytes.size();
      n += im.num_subpixels();
    }
    std::printf("%s,%d,%.5f,%.1f,%.1f,%d\n", param, value, bits / n,
                1e3 * enc / images.size(), 1e3 * dec / images.size(), ok ? 1 : 0);
    std::fflush(stdout);
  };
  // Structural settings reuse the weights unless --train-steps asks for a
  // fresh model per setting.
  auto variant = [&](ModelConfig cfg) {
    cfg.Validate();
    if (a.train_steps <= 0) {
      ModelWeights<float> w = base;
      w.config = cfg;
      return w;
    }
    TrainConfig tc;
    tc.steps = a.train_steps;
    tc.crop = 4 * cfg.patch;
    const int side = std::max(a.size, tc.crop);
    return Train(cfg, LoadOrSynthesize({}, 24, side, 1, a.bit_depth, false, 1), tc);
  };
  for (int d : a.deltas) {
    ModelConfig c = base.config;
    c.delta = d;
    run("delta", d, variant(c), 1024);
  }
  for (int p : a.patches) {
    ModelConfig c = base.config;
    c.patch = p;
    run("patch", p, variant(c), 1024);
  }
  for (int r : a.windows) run("window", r, base, r);
}

}  // namespace

void RegisterBench(CLI::App& app) {
  auto f = std::make_shared<FtBenchArgs>();
  CLI::App* fb = app.add_subcommand(
      "finetune-bench", "Compare fine-tuning region strategies (CSV on stdout)");
  fb->add_option("images", f->images, "Images (default: synthetic out-of-distribution text)")
      ->check(CLI::ExistingFile);
  AddModelOptions(fb, &f->model);
  fb->add_option("--count", f->count, "Synthetic image count")->check(CLI::PositiveNumber);
  fb->add_option("--size", f->size, "Synthetic image side")->check(CLI::Range(8, 4096));
  fb->add_option("--steps", f->steps, "Fine-tuning steps")->check(CLI::PositiveNumber);
  fb->add_option("--strategies", f->strategies, "Subset of rate, random, full")
      ->check(CLI::IsMember({"rate", "random", "full"}));
  fb->callback([f] { RunFtBench(*f); });

  auto s = std::make_shared<SweepArgs>();
  CLI::App* sw = app.add_subcommand("sweep", "bpsp and latency over delta, P or R (CSV)");
  sw->add_option("images", s->images, "Images (default: synthetic)")->check(CLI::ExistingFile);
  AddModelOptions(sw, &s->model);
  sw->add_option("--delta", s->deltas, "Scan offsets, e.g. 0,1,2,3")->delimiter(',')
      ->check(CLI::Range(0, 64));
  sw->add_option("--patch", s->patches, "Patch sizes, e.g. 8,16,32")->delimiter(',')
      ->check(CLI::Range(1, 255));
  sw->add_option("--window", s->windows, "Window sizes R, e.g. 256,1024,4096")
      ->delimiter(',')->check(CLI::Range(2, 32768));
  sw->add_option("--count", s->count, "Synthetic image count")->check(CLI::PositiveNumber);
  sw->add_option("--size", s->size, "Synthetic image side")->check(CLI::Range(8, 4096));
  sw->add_option("--bit-depth", s->bit_depth, "Synthetic bit depth")
      ->check(CLI::IsMember({8, 12, 16}));
  sw->add_option("--train-steps", s->train_steps,
                 "Train a fresh model per structural setting for this many steps");
  sw->callback([s] { RunSweep(*s); });
}

}  // namespace hpac::cli
