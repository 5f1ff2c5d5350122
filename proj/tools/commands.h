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


#ifndef HPAC_TOOLS_COMMANDS_H_
#define HPAC_TOOLS_COMMANDS_H_

#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hpac/image.h"
#include "hpac/model.h"

namespace hpac::cli {

// Seed of the built-in (untrained) model used when no weight file is given.
// It codes losslessly but not compactly; pass --model for real use.
inline constexpr uint64_t kBuiltinSeed = 2026;

struct ModelChoice {
  std::string path;             // weight file; falls back to $HPAC_MODEL
  std::string config = "default";  // built-in config: default, fast, tiny
};

void AddModelOptions(CLI::App* cmd, ModelChoice* m);
ModelConfig ConfigByName(const std::string& name, int channels);
ModelWeights<float> ResolveModel(const ModelChoice& m, int channels);

// Images named on the command line, or a synthetic set when none are.
std::vector<ImageBuffer> LoadOrSynthesize(const std::vector<std::string>& paths,
                                          int count, int size, int channels,
                                          int bit_depth, bool ood, uint64_t seed);

// Each registers a subcommand on `app`.
void RegisterCodec(CLI::App& app);
void RegisterTrain(CLI::App& app);
void RegisterBench(CLI::App& app);
void RegisterVerify(CLI::App& app);

}  // namespace hpac::cli

#endif  // HPAC_TOOLS_COMMANDS_H_
