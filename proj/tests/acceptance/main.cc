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


// Runs the ten acceptance criteria and prints one PASS/FAIL line each.
// Exit status is nonzero if any selected criterion fails.

#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acceptance.h"

namespace {

using hpac::acceptance::Result;
using hpac::acceptance::Settings;
using hpac::acceptance::TrainedModel;

struct Criterion {
  int id;
  const char* name;
  std::function<Result()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HPAC acceptance suite"};
  Settings s;
  std::vector<int> only;
  app.add_option("--only", only, "Run just these criteria (1-10)")
      ->check(CLI::Range(1, 10));
  app.add_option("--weights-cache", s.weights_cache,
                 "Load the desk model from this file if present, else train "
                 "and save it there");
  app.add_option("--train-steps", s.train_steps, "Desk training steps")
      ->check(CLI::PositiveNumber);
  app.add_option("--ood-images", s.ood_images, "Fine-tuning image count")
      ->check(CLI::Range(1, 1000));
  CLI11_PARSE(app, argc, argv);

  TrainedModel model(s);
  using namespace hpac::acceptance;
  const std::vector<Criterion> all = {
      {1, "lossless roundtrip", [&] { return LosslessRoundtrip(s, model); }},
      {2, "scan correctness", [&] { return ScanCorrectness(s); }},
      {3, "CSI equals parallel forward", [&] { return CsiMatchesParallel(s); }},
      {4, "range coder", [&] { return CoderBounds(s); }},
      {5, "adaptive focus coding", [&] { return AdaptiveFocusCoding(s, model); }},
      {6, "gradients", [&] { return Gradients(s); }},
      {7, "adapters", [&] { return Adapters(s); }},
      {8, "SARP-FT", [&] { return SarpFineTuning(s, model); }},
      {9, "desk training", [&] { return DeskTraining(s, model); }},
      {10, "determinism", [&] { return Determinism(s, model); }},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0, ran = 0;
  std::vector<std::string> summary;
  for (const Criterion& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.Check(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const std::string& n : r.notes()) std::printf("    [%d] %s\n", c.id, n.c_str());
    char line[256];
    std::snprintf(line, sizeof line, "%s criterion %2d: %-28s (%d checks, %d failed, %.1f s)",
                  r.ok() ? "PASS" : "FAIL", c.id, c.name, r.checks(), r.failures(), secs);
    std::printf("%s\n", line);
    std::fflush(stdout);
    summary.push_back(line);
    if (!r.ok()) ++failed;
  }
  std::printf("\n== summary ==\n");
  for (const auto& l : summary) std::printf("%s\n", l.c_str());
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
