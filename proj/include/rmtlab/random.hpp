// Copyright 2026 The rmtlab Authors.
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

// Counter-based random numbers. Every sampler in the library is a pure
// function of (arguments, seed): a seed keys a Philox4x32-10 stream and
// independent streams are obtained by mixing, never by sharing state.

#include <array>
#include <cstdint>
#include <limits>

namespace rmtlab {

struct RandomSeed {
  std::uint64_t value = 0;

  friend bool operator==(RandomSeed, RandomSeed) = default;
};

// One application of the Philox4x32 bijection with 10 rounds.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

// Bijective 64-bit finalizer (splitmix64 output stage).
std::uint64_t mix64(std::uint64_t x) noexcept;

// Seed of trial `index` under `master`. Injective in `index` for a fixed
// master, and platform independent.
RandomSeed derive_trial_seed(RandomSeed master, std::uint64_t index) noexcept;

// Philox engine keyed by a 64-bit seed. Satisfies UniformRandomBitGenerator;
// normal() and uniform() use fixed algorithms so streams are reproducible
// across standard library implementations.
class Philox {
 public:
  using result_type = std::uint64_t;

  explicit Philox(RandomSeed seed, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  // Uniform on the open interval (0, 1), 53 random bits.
  double uniform() noexcept;

  // Standard normal via Box-Muller; values come in cached pairs.
  double normal() noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t block_ = 0;
  std::uint64_t stream_;
  std::array<std::uint32_t, 4> out_{};
  int used_ = 4;  // 32-bit words of out_ already consumed
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rmtlab
