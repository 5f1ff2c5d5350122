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

#ifndef HPAC_WEIGHTS_IO_H_
#define HPAC_WEIGHTS_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hpac/model.h"

namespace hpac {

// File layout (little-endian):
//   "HPWT" | u32 version | config record (13 x i32; v_min and v_max in
//   16.16 fixed point) | u64 hash | u64 float count | f32 blob.
// The hash is FNV-1a over the config record and the blob, in parameter
// visiting order.
std::vector<uint8_t> SerializeWeights(const ModelWeights<float>& w);
ModelWeights<float> DeserializeWeights(std::span<const uint8_t> bytes);

uint64_t WeightsHash(const ModelWeights<float>& w);

void SaveWeights(const std::string& path, const ModelWeights<float>& w);
ModelWeights<float> LoadWeights(const std::string& path);

}  // namespace hpac

#endif  // HPAC_WEIGHTS_IO_H_
