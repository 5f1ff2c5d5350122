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

#include "hpac/codec.h"

#include <chrono>
#include <string>

#include "hpac/bytes.h"
#include "hpac/coder.h"
#include "hpac/csi.h"
#include "hpac/prob.h"
#include "hpac/weights_io.h"

namespace hpac {
namespace {

constexpr uint64_t kMaxSamples = uint64_t{1} << 28;

double Seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void CheckModelFits(const ModelWeights<float>& w, int channels) {
  if (w.config.channels_in != channels) {
    throw std::invalid_argument(
        "model expects " + std::to_string(w.config.channels_in) +
        " channel(s), image has " + std::to_string(channels));
  }
}

}  // namespace

bool IsFastConfig(const ModelConfig& c) {
  return c == ModelConfig::Fast(c.channels_in);
}

void ContainerHeader::AppendTo(std::vector<uint8_t>* out) const {
  out->insert(out->end(), {'H', 'P', 'A', 'C'});
  AppendLe(out, version);
  AppendLe(out, flags);
  AppendLe(out, width);
  AppendLe(out, height);
  AppendLe(out, channels);
  AppendLe(out, bit_depth);
  AppendLe(out, patch);
  AppendLe(out, delta);
  AppendLe(out, mixtures);
  AppendLe(out, window);
  AppendLe(out, model_hash);
  AppendLe(out, adapter_bytes);
}

ContainerHeader ContainerHeader::Parse(std::span<const uint8_t> bytes) {
  ByteReader in(bytes);
  auto magic = in.Take(4);
  if (std::string(magic.begin(), magic.end()) != "HPAC") {
    throw FormatError("not an HPAC stream (bad magic)");
  }
  ContainerHeader h;
  h.version = in.Read<uint8_t>();
  if (h.version != kContainerVersion) {
    throw FormatError("unsupported stream version " +
                      std::to_string(h.version));
  }
  h.flags = in.Read<uint8_t>();
  h.width = in.Read<uint32_t>();
  h.height = in.Read<uint32_t>();
  h.channels = in.Read<uint8_t>();
  h.bit_depth = in.Read<uint8_t>();
  h.patch = in.Read<uint8_t>();
  h.delta = in.Read<uint8_t>();
  h.mixtures = in.Read<uint8_t>();
  h.window = in.Read<uint16_t>();
  h.model_hash = in.Read<uint64_t>();
  h.adapter_bytes = in.Read<uint32_t>();
  if ((h.flags & ~(kFlagAdapters | kFlagFast)) != 0) {
    throw FormatError("unknown header flags");
  }
  if (h.width == 0 || h.height == 0 ||
      static_cast<uint64_t>(h.width) * h.height * std::max<uint8_t>(h.channels, 1) >
          kMaxSamples) {
    throw FormatError("invalid image dimensions");
  }
  if (h.channels != 1 && h.channels != 3) throw FormatError("invalid channel count");
  if (!IsSupportedBitDepth(h.bit_depth)) throw FormatError("invalid bit depth");
  if (h.window < kMinWindow || h.window > kMaxWindow) {
    throw FormatError("invalid window size");
  }
  if (!(h.flags & kFlagAdapters) && h.adapter_bytes != 0) {
    throw FormatError("adapter bytes without adapter flag");
  }
  return h;
}

std::vector<uint8_t> EncodePixels(const ImageBuffer& image,
                                  const ModelWeights<float>& weights,
                                  int window, EncodeStats* stats) {
  image.Validate();
  CheckModelFits(weights, image.channels);
  const ModelConfig& cfg = weights.config;
  const PixelRange range = cfg.pixel_range(image.bit_depth);
  CsiEngine engine(weights, image.height, image.width, image.bit_depth);
  RangeEncoder enc;
  const int cin = image.channels;
  std::vector<uint16_t> samples;
  for (int s = 0; s < engine.num_steps(); ++s) {
    const Tensor& out = engine.Step(s);
    const auto pos = engine.StepPositions(s);
    const int64_t ho = out.dim(1);
    samples.assign(pos.size() * cin, 0);
    for (size_t i = 0; i < pos.size(); ++i) {
      int y, x;
      if (!engine.ToImage(pos[i], &y, &x)) continue;
      for (int ch = 0; ch < cin; ++ch) {
        const int v = image.at(y, x, ch);
        const MixtureParams mp =
            HeadToMixture(out.data() + i * ho, ch, cfg.mixtures);
        const CodingWindow win = AfcWindow(mp, window, range);
        EncodeWithWindow(enc, win, v);
        if (stats) {
          stats->ideal_image_bits += WindowCostBits(win, v);
          if (v < win.x_lo || v > win.x_hi) ++stats->escapes;
        }
        samples[i * cin + ch] = static_cast<uint16_t>(v);
      }
    }
    engine.Commit(samples);
  }
  return enc.Finish();
}

ImageBuffer DecodePixels(std::span<const uint8_t> payload, int width,
                         int height, int channels, int bit_depth,
                         const ModelWeights<float>& weights, int window) {
  CheckModelFits(weights, channels);
  const ModelConfig& cfg = weights.config;
  const PixelRange range = cfg.pixel_range(bit_depth);
  ImageBuffer image;
  image.width = width;
  image.height = height;
  image.channels = channels;
  image.bit_depth = bit_depth;
  image.samples.assign(static_cast<size_t>(width) * height * channels, 0);
  CsiEngine engine(weights, height, width, bit_depth);
  RangeDecoder dec(payload);
  std::vector<uint16_t> samples;
  for (int s = 0; s < engine.num_steps(); ++s) {
    const Tensor& out = engine.Step(s);
    const auto pos = engine.StepPositions(s);
    const int64_t ho = out.dim(1);
    samples.assign(pos.size() * channels, 0);
    for (size_t i = 0; i < pos.size(); ++i) {
      int y, x;
      if (!engine.ToImage(pos[i], &y, &x)) continue;
      for (int ch = 0; ch < channels; ++ch) {
        const MixtureParams mp =
            HeadToMixture(out.data() + i * ho, ch, cfg.mixtures);
        const CodingWindow win = AfcWindow(mp, window, range);
        const int v = DecodeWithWindow(dec, win, range);
        image.at(y, x, ch) = static_cast<uint16_t>(v);
        samples[i * channels + ch] = static_cast<uint16_t>(v);
      }
    }
    engine.Commit(samples);
    if (dec.overrun()) throw DecodeError("image payload truncated");
  }
  return image;
}

std::vector<uint8_t> EncodeImage(const ImageBuffer& image,
                                 const ModelWeights<float>& weights,
                                 const EncodeOptions& opts,
                                 EncodeStats* stats) {
  image.Validate();
  CheckModelFits(weights, image.channels);
  const ModelConfig& cfg = weights.config;
  if (opts.window < kMinWindow || opts.window > kMaxWindow) {
    throw std::invalid_argument("window size outside [2, 32768]");
  }
  EncodeStats local;
  EncodeStats& st = stats ? *stats : local;
  st = EncodeStats{};

  ContainerHeader h;
  h.flags = IsFastConfig(cfg) ? kFlagFast : 0;
  h.width = image.width;
  h.height = image.height;
  h.channels = static_cast<uint8_t>(image.channels);
  h.bit_depth = static_cast<uint8_t>(image.bit_depth);
  h.patch = static_cast<uint8_t>(cfg.patch);
  h.delta = static_cast<uint8_t>(cfg.delta);
  h.mixtures = static_cast<uint8_t>(cfg.mixtures);
  h.window = static_cast<uint16_t>(opts.window);
  h.model_hash = WeightsHash(weights);

  std::vector<uint8_t> adapter_bytes;
  std::vector<uint8_t> pixels;
  bool coded = false;
  if (opts.fine_tune) {
    const auto t0 = std::chrono::steady_clock::now();
    const AdapterSet phi = SarpFineTune(weights, image, opts.ft);
    const AdapterSet q = QuantizeAdapters(phi);
    bool all_zero = true;
    for (const Tensor* t : q.Factors()) {
      for (float v : t->vec()) all_zero = all_zero && v == 0.0f;
    }
    st.fine_tune_seconds = Seconds(t0);
    // An all-zero update leaves the model unchanged; send nothing.
    if (!all_zero) {
      // Both sides merge the decoded (quantized) values.
      adapter_bytes = EncodeAdapters(q);
      const AdapterSet quant = DecodeAdapters(adapter_bytes, cfg);
      const ModelWeights<float> merged = MergeAdapters(weights, quant);
      const auto t1 = std::chrono::steady_clock::now();
      EncodeStats tuned_st;
      pixels = EncodePixels(image, merged, opts.window, &tuned_st);
      const size_t tuned_total =
          ContainerHeader::kSize + adapter_bytes.size() + pixels.size();
      st.tuned_total_bytes = tuned_total;
      st.adapter_exact_bits = ExactParamBits(quant);
      EncodeStats base_st;
      std::vector<uint8_t> base_pixels;
      if (opts.keep_smaller) {
        base_pixels = EncodePixels(image, weights, opts.window, &base_st);
        st.base_total_bytes = ContainerHeader::kSize + base_pixels.size();
      }
      if (opts.keep_smaller && st.base_total_bytes <= tuned_total) {
        // The adapters do not pay for themselves on this image.
        adapter_bytes.clear();
        pixels = std::move(base_pixels);
        tuned_st = base_st;
        st.adapter_exact_bits = 0.0;
      } else {
        h.flags |= kFlagAdapters;
        h.adapter_bytes = static_cast<uint32_t>(adapter_bytes.size());
      }
      st.ideal_image_bits = tuned_st.ideal_image_bits;
      st.escapes = tuned_st.escapes;
      st.coding_seconds = Seconds(t1);
      coded = true;
    }
  }
  if (!coded) {
    const auto t1 = std::chrono::steady_clock::now();
    EncodeStats base_st;
    pixels = EncodePixels(image, weights, opts.window, &base_st);
    st.ideal_image_bits = base_st.ideal_image_bits;
    st.escapes = base_st.escapes;
    st.coding_seconds = Seconds(t1);
    st.base_total_bytes = ContainerHeader::kSize + pixels.size();
    if (opts.fine_tune) st.tuned_total_bytes = st.base_total_bytes;
  }

  std::vector<uint8_t> out;
  h.AppendTo(&out);
  out.insert(out.end(), adapter_bytes.begin(), adapter_bytes.end());
  out.insert(out.end(), pixels.begin(), pixels.end());
  st.header_bytes = ContainerHeader::kSize;
  st.adapter_bytes = adapter_bytes.size();
  st.image_bytes = pixels.size();
  st.bpsp = out.size() * 8.0 /
            (static_cast<double>(image.width) * image.height * image.channels);
  return out;
}

ImageBuffer DecodeImage(std::span<const uint8_t> bytes,
                        const ModelWeights<float>& weights) {
  const ContainerHeader h = ContainerHeader::Parse(bytes);
  const ModelConfig& cfg = weights.config;
  if (h.model_hash != WeightsHash(weights)) {
    throw FormatError("stream was encoded with a different model");
  }
  if (h.patch != cfg.patch || h.delta != cfg.delta ||
      h.mixtures != cfg.mixtures || h.channels != cfg.channels_in) {
    throw FormatError("stream parameters do not match the model");
  }
  if (bytes.size() < ContainerHeader::kSize + h.adapter_bytes) {
    throw FormatError("stream truncated in adapter payload");
  }
  const ModelWeights<float>* coding_weights = &weights;
  ModelWeights<float> merged;
  if (h.flags & kFlagAdapters) {
    const AdapterSet quant = DecodeAdapters(
        bytes.subspan(ContainerHeader::kSize, h.adapter_bytes), cfg);
    merged = MergeAdapters(weights, quant);
    coding_weights = &merged;
  }
  return DecodePixels(bytes.subspan(ContainerHeader::kSize + h.adapter_bytes),
                      h.width, h.height, h.channels, h.bit_depth,
                      *coding_weights, h.window);
}

}  // namespace hpac
