// Copyright 2026 The oppdrive Authors
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

#ifndef OPPDRIVE__RANDOM_HPP_
#define OPPDRIVE__RANDOM_HPP_

#include <cstddef>
#include <cstdint>
#include <random>

namespace oppdrive
{

using Rng = std::mt19937_64;

// The std:: distributions are implementation-defined; these helpers keep
// seeded runs bit-identical across standard libraries.
inline double uniform01(Rng & rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng & rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline std::size_t uniform_index(Rng & rng, std::size_t n)
{
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

// Derive an independent stream seed (splitmix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace oppdrive

#endif  // OPPDRIVE__RANDOM_HPP_
