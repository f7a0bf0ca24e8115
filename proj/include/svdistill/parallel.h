// svdistill/parallel.h

// Copyright 2026  The svdistill authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SVDISTILL_PARALLEL_H_
#define SVDISTILL_PARALLEL_H_

#include <thread>
#include <vector>

namespace svdistill {

// Runs fn(i) for i in [0, n) on up to `threads` workers with static
// striding. Each index must write only its own outputs, which keeps
// results identical for any thread count.
template <typename Fn>
void ParallelFor(size_t n, int threads, Fn fn) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; i++) fn(i);
    return;
  }
  const size_t workers =
      std::min(static_cast<size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; w++) {
    pool.emplace_back([w, workers, n, &fn] {
      for (size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (std::thread &t : pool) t.join();
}

}  // namespace svdistill

#endif  // SVDISTILL_PARALLEL_H_
