// Copyright 2026 The idbn Authors
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

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace idbn {

using Rng = std::mt19937_64;

/// What a random stream is used for. Each (layer, purpose, epoch) triple gets
/// its own stream so schemes that visit a layer in a different order still
/// consume identical randomness there.
enum class StreamPurpose : std::uint64_t {
  kInit = 1,
  kSampling = 2,
  kDropout = 3,
  kOrder = 4,
  kNoise = 5,
  kSplit = 6,
  kReplica = 7,
  kGeneration = 8,
  kSelection = 9,
};

/// Mixes a base seed with a list of integers into a new 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);

Rng make_stream(std::uint64_t base, StreamPurpose purpose, std::uint64_t index = 0,
                std::uint64_t epoch = 0);

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace idbn
