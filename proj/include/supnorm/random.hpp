// Copyright 2026 The supnorm Authors
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
#include <initializer_list>
#include <limits>

namespace supnorm {

/// Purposes of the independent random streams. Each (purpose, indices...)
/// path maps to its own seed, so results never depend on execution order.
enum class Stream : std::uint64_t {
    Truth = 0x7472757468ULL,
    Data = 0x64617461ULL,
    Posterior = 0x706f7374ULL,
    Mcmc = 0x6d636d63ULL,
    Noise = 0x6e6f697365ULL,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for the stream at `path` below `master`. Distinct paths give
/// statistically independent seeds; the mapping is platform independent.
std::uint64_t derive_seed(std::uint64_t master, Stream purpose, std::initializer_list<std::uint64_t> path = {}) noexcept;

/// xoshiro256** generator with the distributions the samplers need.
/// Distributions are implemented here rather than taken from <random> so
/// that streams are bit-identical across standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept;

    /// Uniform on the open interval (0,1).
    double uniform() noexcept;
    double normal() noexcept;
    /// Gamma(shape, 1). Marsaglia-Tsang squeeze for shape >= 1; for shape < 1
    /// a Gamma(shape + 1) draw is boosted by U^{1/shape}.
    double gamma(double shape);
    /// Logarithm of a Gamma(shape, 1) draw; finite even when the draw itself
    /// underflows (tiny shapes).
    double log_gamma(double shape);

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace supnorm
