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


// encode / decode, plus the model and image helpers shared by every command.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <stdexcept>

#include "commands.h"
#include "hpac/codec.h"
#include "hpac/corpus.h"
#include "hpac/weights_io.h"

namespace hpac::cli {

void AddModelOptions(CLI::App* cmd, ModelChoice* m) {
  cmd->add_option("-m,--model", m->path, "Weight file (default: $HPAC_MODEL)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--config", m->config,
                  "Built-in untrained model when no weight file is given")
      ->check(CLI::IsMember({"default", "fast", "tiny"}));
}

ModelConfig ConfigByName(const std::string& name, int channels) {
  if (name == "fast") return ModelConfig::Fast(channels);
  if (name == "tiny") return ModelConfig::Tiny(channels);
  if (name == "default") return ModelConfig::Default(channels);
  throw std::invalid_argument("unknown model config '" + name + "'");
}

ModelWeights<float> ResolveModel(const ModelChoice& m, int channels) {
  std::string path = m.path;
  if (path.empty()) {
    if (const char* env = std::getenv("HPAC_MODEL"); env && *env) path = env;
  }
  if (!path.empty()) return LoadWeights(path);
  std::fprintf(stderr,
               "hpac: no --model or $HPAC_MODEL; using the untrained built-in '%s' "
               "model (lossless, but far from compact)\n",
               m.config.c_str());
  return InitWeights<float>(ConfigByName(m.config, channels), kBuiltinSeed);
}

std::vector<ImageBuffer> LoadOrSynthesize(const std::vector<std::string>& paths,
                                          int count, int size, int channels,
                                          int bit_depth, bool ood, uint64_t seed) {
  std::vector<ImageBuffer> out;
  for (const auto& p : paths) out.push_back(LoadImage(p));
  if (!out.empty()) return out;
  if (ood) {
    for (int i = 0; i < count; ++i) {
      out.push_back(SynthImage(SynthKind::kOodText, size, size, channels, bit_depth,
                               seed + i));
    }
    return out;
  }
  return MakeCorpus(count, size, size, channels, bit_depth, seed);
}

namespace {

struct EncodeArgs {
  std::string in, out;
  ModelChoice model;
  int window = 1024;
  bool ft = false;
  int steps = 50;
  int rank = 8;
  std::string strategy = "rate";
  bool always_adapt = false;
  bool quiet = false;
};

struct DecodeArgs {
  std::string in, out;
  ModelChoice model;
};

void RunEncode(const EncodeArgs& a) {
  const ImageBuffer im = LoadImage(a.in);
  const ModelWeights<float> w = ResolveModel(a.model, im.channels);
  EncodeOptions o;
  o.window = a.window;
  o.fine_tune = a.ft;
  o.keep_smaller = !a.always_adapt;
  o.ft.schedule.steps = a.steps;
  o.ft.adapter.rank = a.rank;
  o.ft.strategy = a.strategy == "full"     ? RegionStrategy::kFullImage
                  : a.strategy == "random" ? RegionStrategy::kRandom
                                           : RegionStrategy::kRateGuided;
  EncodeStats st;
  const auto bytes = EncodeImage(im, w, o, &st);
  WriteFileBytes(a.out, bytes);
  if (!a.quiet) {
    std::printf("%s: %dx%dx%d, %d-bit -> %zu bytes, %.4f bpsp (header %zu, adapters %zu, "
                "image %zu; escapes %lld)\n",
                a.out.c_str(), im.width, im.height, im.channels, im.bit_depth, bytes.size(),
                st.bpsp, st.header_bytes, st.adapter_bytes, st.image_bytes,
                static_cast<long long>(st.escapes));
    if (a.ft) {
      std::printf("fine-tuning: %.2f s, base %zu bytes, adapted %zu bytes, %s\n",
                  st.fine_tune_seconds, st.base_total_bytes, st.tuned_total_bytes,
                  st.adapters_sent() ? "adapters sent" : "base model kept");
    }
  }
}

void RunDecode(const DecodeArgs& a) {
  const auto bytes = ReadFileBytes(a.in);
  const ContainerHeader h = ContainerHeader::Parse(bytes);
  ModelChoice m = a.model;
  // Without a weight file the header says which built-in model encoded it.
  if (m.path.empty() && !std::getenv("HPAC_MODEL")) {
    m.config = (h.flags & kFlagFast) ? "fast" : m.config;
  }
  const ModelWeights<float> w = ResolveModel(m, h.channels);
  SaveImage(a.out, DecodeImage(bytes, w));
}

}  // namespace

void RegisterCodec(CLI::App& app) {
  auto enc = std::make_shared<EncodeArgs>();
  CLI::App* e = app.add_subcommand("encode", "Compress a PGM/PPM (or .raw) image");
  e->add_option("input", enc->in, "Input image")->required()->check(CLI::ExistingFile);
  e->add_option("output", enc->out, "Output container")->required();
  AddModelOptions(e, &enc->model);
  e->add_option("-R,--window", enc->window, "Coding window size R")
      ->check(CLI::Range(2, 32768));
  e->add_flag("--ft", enc->ft, "Fine-tune adapters on this image before coding");
  e->add_option("--steps", enc->steps, "Fine-tuning steps")->check(CLI::NonNegativeNumber);
  e->add_option("--rank", enc->rank, "Adapter rank")->check(CLI::Range(1, 64));
  e->add_option("--region", enc->strategy, "Fine-tuning region: rate, random, full")
      ->check(CLI::IsMember({"rate", "random", "full"}));
  e->add_flag("--always-adapt", enc->always_adapt,
              "Send adapters even when the base model codes smaller");
  e->add_flag("-q,--quiet", enc->quiet, "No summary line");
  e->callback([enc] { RunEncode(*enc); });

  auto dec = std::make_shared<DecodeArgs>();
  CLI::App* d = app.add_subcommand("decode", "Decompress a container to PGM/PPM (or .raw)");
  d->add_option("input", dec->in, "Input container")->required()->check(CLI::ExistingFile);
  d->add_option("output", dec->out, "Output image")->required();
  AddModelOptions(d, &dec->model);
  d->callback([dec] { RunDecode(*dec); });

  struct SynthArgs {
    std::string out, kind = "gradient";
    int width = 64, height = 64, channels = 1, bit_depth = 8;
    uint64_t seed = 1;
  };
  auto syn = std::make_shared<SynthArgs>();
  CLI::App* s = app.add_subcommand("synth", "Write a synthetic test image");
  s->add_option("output", syn->out, "Output PGM/PPM")->required();
  s->add_option("--kind", syn->kind, "gradient, noise, glyphs or text")
      ->check(CLI::IsMember({"gradient", "noise", "glyphs", "text"}));
  s->add_option("--width", syn->width)->check(CLI::Range(1, 1 << 15));
  s->add_option("--height", syn->height)->check(CLI::Range(1, 1 << 15));
  s->add_option("--channels", syn->channels)->check(CLI::IsMember({1, 3}));
  s->add_option("--bit-depth", syn->bit_depth)->check(CLI::Range(1, 16));
  s->add_option("--seed", syn->seed);
  s->callback([syn] {
    const SynthKind k = syn->kind == "noise"    ? SynthKind::kValueNoise
                        : syn->kind == "glyphs" ? SynthKind::kGlyphs
                        : syn->kind == "text"   ? SynthKind::kOodText
                                                : SynthKind::kGradient;
    SaveImage(syn->out, SynthImage(k, syn->width, syn->height, syn->channels,
                                   syn->bit_depth, syn->seed));
  });
}

}  // namespace hpac::cli
