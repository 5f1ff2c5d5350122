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

#ifndef HPAC_PARALLEL_H_
#define HPAC_PARALLEL_H_

#include <cstdint>
#include <functional>

namespace hpac {

// Worker count, read once from HPAC_THREADS (default 1).
int NumThreads();
void SetNumThreads(int n);

// Runs fn(begin, end) over [0, n) in contiguous chunks. Chunk boundaries
// depend only on n and the grain, never on the thread count, so callers that
// reduce per-chunk results in chunk order stay deterministic.
void ParallelFor(int64_t n, int64_t grain,
                 const std::function<void(int64_t, int64_t)>& fn);

}  // namespace hpac

#endif  // HPAC_PARALLEL_H_
