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

#include <cstdint>
#include <random>

namespace crs {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

// Independent stream for one trial. Keyed by (master, trial, salt) only, so
// results never depend on how trials are distributed over workers.
inline Rng trial_stream(std::uint64_t master, std::uint64_t trial, std::uint64_t salt = 0) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s ^= trial * 0xD1B54A32D192ED03ULL + salt * 0x8CB92BA72F3D8DD7ULL;
  std::uint64_t b = splitmix64(s);
  // A single mixed word; seed_seq over the full state costs several
  // microseconds per trial.
  std::uint64_t mix = a ^ (b * 0x9E3779B97F4A7C15ULL);
  return Rng(splitmix64(mix));
}

// Uniform on [0,1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace crs
