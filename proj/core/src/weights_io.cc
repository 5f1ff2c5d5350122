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

#include "hpac/weights_io.h"

#include <cmath>

#include "hpac/bytes.h"
#include "hpac/image.h"

namespace hpac {
namespace {

constexpr uint32_t kWeightsVersion = 1;

int32_t ToFixed(double v) { return static_cast<int32_t>(std::lround(v * 65536.0)); }
double FromFixed(int32_t v) { return v / 65536.0; }

std::vector<uint8_t> ConfigRecord(const ModelConfig& c) {
  std::vector<uint8_t> out;
  for (int32_t v : {c.depth, c.channels, c.mlp_ratio, c.embed_kernel,
                    c.block_kernel, c.spm_kernel, c.mixtures, c.patch, c.delta,
                    c.bit_depth, ToFixed(c.v_min), ToFixed(c.v_max),
                    c.channels_in}) {
    AppendLe<int32_t>(&out, v);
  }
  return out;
}

std::vector<uint8_t> Blob(const ModelWeights<float>& w) {
  std::vector<uint8_t> out;
  out.reserve(w.NumParams() * 4);
  w.ForEach([&out](const std::string&, const Tensor& t) {
    const auto* p = reinterpret_cast<const uint8_t*>(t.data());
    out.insert(out.end(), p, p + t.size() * sizeof(float));
  });
  return out;
}

}  // namespace

uint64_t WeightsHash(const ModelWeights<float>& w) {
  return Fnv1a64(Blob(w), Fnv1a64(ConfigRecord(w.config)));
}

std::vector<uint8_t> SerializeWeights(const ModelWeights<float>& w) {
  std::vector<uint8_t> out = {'H', 'P', 'W', 'T'};
  AppendLe<uint32_t>(&out, kWeightsVersion);
  const auto rec = ConfigRecord(w.config);
  out.insert(out.end(), rec.begin(), rec.end());
  const auto blob = Blob(w);
  AppendLe<uint64_t>(&out, Fnv1a64(blob, Fnv1a64(rec)));
  AppendLe<uint64_t>(&out, static_cast<uint64_t>(w.NumParams()));
  out.insert(out.end(), blob.begin(), blob.end());
  return out;
}

ModelWeights<float> DeserializeWeights(std::span<const uint8_t> bytes) {
  ByteReader in(bytes);
  auto magic = in.Take(4);
  if (std::string(magic.begin(), magic.end()) != "HPWT") {
    throw FormatError("not a weight file (bad magic)");
  }
  if (in.Read<uint32_t>() != kWeightsVersion) {
    throw FormatError("unsupported weight file version");
  }
  ModelConfig c;
  c.depth = in.Read<int32_t>();
  c.channels = in.Read<int32_t>();
  c.mlp_ratio = in.Read<int32_t>();
  c.embed_kernel = in.Read<int32_t>();
  c.block_kernel = in.Read<int32_t>();
  c.spm_kernel = in.Read<int32_t>();
  c.mixtures = in.Read<int32_t>();
  c.patch = in.Read<int32_t>();
  c.delta = in.Read<int32_t>();
  c.bit_depth = in.Read<int32_t>();
  c.v_min = FromFixed(in.Read<int32_t>());
  c.v_max = FromFixed(in.Read<int32_t>());
  c.channels_in = in.Read<int32_t>();
  c.Validate();
  const uint64_t hash = in.Read<uint64_t>();
  const uint64_t count = in.Read<uint64_t>();
  ModelWeights<float> w = AllocateWeights<float>(c);
  if (count != static_cast<uint64_t>(w.NumParams())) {
    throw FormatError("weight count does not match config");
  }
  auto blob = in.Take(count * sizeof(float));
  size_t off = 0;
  w.ForEach([&](const std::string& name, Tensor& t) {
    std::memcpy(t.data(), blob.data() + off, t.size() * sizeof(float));
    off += t.size() * sizeof(float);
    CheckFinite(t, name.c_str());
  });
  if (WeightsHash(w) != hash) throw FormatError("weight file hash mismatch");
  return w;
}

void SaveWeights(const std::string& path, const ModelWeights<float>& w) {
  WriteFileBytes(path, SerializeWeights(w));
}

ModelWeights<float> LoadWeights(const std::string& path) {
  return DeserializeWeights(ReadFileBytes(path));
}

}  // namespace hpac
