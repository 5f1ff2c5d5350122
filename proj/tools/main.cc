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


#include <cstdio>
#include <exception>

#include "commands.h"
#include "hpac/parallel.h"

int main(int argc, char** argv) {
  CLI::App app{"hpac: learned lossless image codec"};
  app.require_subcommand(1);
  app.add_option_function<int>("--threads", [](int n) { hpac::SetNumThreads(n); },
                               "Worker threads (default: $HPAC_THREADS or 1)")
      ->check(CLI::Range(1, 256));
  hpac::cli::RegisterCodec(app);
  hpac::cli::RegisterTrain(app);
  hpac::cli::RegisterBench(app);
  hpac::cli::RegisterVerify(app);
  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hpac: %s\n", e.what());
    return 1;
  }
  return 0;
}
