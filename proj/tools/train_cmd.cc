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


// train: desk-scale pre-training on synthetic or user images.

#include <cstdio>
#include <fstream>
#include <memory>

#include "commands.h"
#include "hpac/corpus.h"
#include "hpac/train.h"
#include "hpac/weights_io.h"

namespace hpac::cli {
namespace {

struct TrainArgs {
  std::string out;
  std::string config = "tiny";
  int channels = 1;
  std::vector<std::string> images;
  int corpus_count = 48;
  int corpus_size = 128;
  int held_out = 6;
  int bit_depth = 8;
  TrainConfig tc;
  int log_every = 100;
  std::string loss_csv;
};

void RunTrain(TrainArgs a) {
  const ModelConfig cfg = ConfigByName(a.config, a.channels);
  a.tc.crop = a.tc.crop > 0 ? a.tc.crop : 4 * cfg.patch;
  const auto corpus = LoadOrSynthesize(a.images, a.corpus_count, a.corpus_size, a.channels,
                                       a.bit_depth, false, 1);
  const auto held = MakeCorpus(a.held_out, a.corpus_size, a.corpus_size, a.channels,
                               a.bit_depth, 777);
  std::printf("training %s (%d channels): %d steps, batch %d, %dx%d crops, peak lr %.1e, "
              "%zu images\n",
              a.config.c_str(), a.channels, a.tc.steps, a.tc.batch, a.tc.crop, a.tc.crop,
              a.tc.peak_lr, corpus.size());
  std::unique_ptr<std::ofstream> csv;
  if (!a.loss_csv.empty()) {
    csv = std::make_unique<std::ofstream>(a.loss_csv);
    *csv << "step,loss_bpsp,lr\n";
  }
  TrainReport rep;
  const auto w = Train(cfg, corpus, a.tc, &rep, [&](int step, double loss, double lr) {
    if (csv) *csv << step << ',' << loss << ',' << lr << '\n';
    if (a.log_every > 0 && (step + 1) % a.log_every == 0) {
      std::printf("step %6d  loss %.4f bpsp  lr %.3e\n", step + 1, loss, lr);
      std::fflush(stdout);
    }
  });
  SaveWeights(a.out, w);
  if (!held.empty() && a.images.empty()) {
    std::printf("held-out bpsp (synthetic): %.4f\n", EvaluateBpsp(w, held));
  }
  std::printf("wrote %s (hash %016llx) after %.1f s\n", a.out.c_str(),
              static_cast<unsigned long long>(WeightsHash(w)), rep.seconds);
}

}  // namespace

void RegisterTrain(CLI::App& app) {
  auto a = std::make_shared<TrainArgs>();
  a->tc.crop = 0;
  CLI::App* t = app.add_subcommand("train", "Train a model and write a weight file");
  t->add_option("-o,--out", a->out, "Weight file to write")->required();
  t->add_option("--config", a->config, "Model size: tiny, fast, default")
      ->check(CLI::IsMember({"default", "fast", "tiny"}));
  t->add_option("--channels", a->channels, "Image channels")->check(CLI::IsMember({1, 3}));
  t->add_option("--images", a->images, "Training images (default: synthetic corpus)")
      ->check(CLI::ExistingFile);
  t->add_option("--corpus-count", a->corpus_count, "Synthetic corpus size")
      ->check(CLI::PositiveNumber);
  t->add_option("--corpus-size", a->corpus_size, "Synthetic image side")
      ->check(CLI::Range(16, 4096));
  t->add_option("--bit-depth", a->bit_depth, "Synthetic corpus bit depth")
      ->check(CLI::IsMember({8, 12, 16}));
  t->add_option("--steps", a->tc.steps, "Optimizer steps")->check(CLI::NonNegativeNumber);
  t->add_option("--batch", a->tc.batch, "Crops per step")->check(CLI::PositiveNumber);
  t->add_option("--crop", a->tc.crop, "Crop side, a multiple of the patch (default 4 patches)");
  t->add_option("--lr", a->tc.peak_lr, "Peak learning rate")->check(CLI::PositiveNumber);
  t->add_option("--warmup", a->tc.warmup, "Warmup steps (capped at steps/4)")
      ->check(CLI::NonNegativeNumber);
  t->add_option("--seed", a->tc.seed, "Seed for init and crops");
  t->add_option("--log-every", a->log_every, "Progress interval (0: silent)");
  t->add_option("--loss-csv", a->loss_csv, "Write per-step loss here");
  t->callback([a] { RunTrain(*a); });
}

}  // namespace hpac::cli
