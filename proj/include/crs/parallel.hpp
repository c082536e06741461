// Copyright 2026 The crs-matching Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace crs {

inline unsigned default_workers() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs body(trial, acc) for trial in [0, trials) on `workers` threads, each
// with its own copy of `init`, then folds the copies with acc.merge(other).
// The accumulator must merge associatively and commutatively (integer counts).
template <class Acc, class Body>
Acc run_trials(std::uint64_t trials, unsigned workers, const Acc& init, Body body) {
  workers = std::max(1u, workers);
  if (workers == 1 || trials < 2) {
    Acc acc = init;
    for (std::uint64_t t = 0; t < trials; ++t) body(t, acc);
    return acc;
  }
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, trials));
  std::vector<Acc> parts(workers, init);
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mu;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint64_t t = w; t < trials; t += workers) body(t, parts[w]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  Acc acc = init;
  for (auto& p : parts) acc.merge(p);
  return acc;
}

}  // namespace crs
