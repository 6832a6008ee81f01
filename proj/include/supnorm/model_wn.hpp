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
#include <vector>

#include "supnorm/grid.hpp"
#include "supnorm/random.hpp"
#include "supnorm/wavelet.hpp"

namespace supnorm {

enum class ProductPriorKind {
    /// phi = uniform density on [-B, B], sigma_l = 2^{-l(1/2+alpha)}.
    Uniform,
    /// phi(x) = c_delta exp(-|x|^{1+delta}), sigma_l = 2^{-l(1/2+alpha)} / (l+1)^{1/(1+delta)}.
    ExponentialPower,
};

/// Independent product prior on wavelet coefficients, theta_{lk} ~ sigma_l^{-1} phi(. / sigma_l),
/// truncated at max_level (coefficients above are zero). The scaling
/// coefficient gets the level-0 scale.
struct ProductPriorSpec {
    ProductPriorKind kind = ProductPriorKind::Uniform;
    double bound = 2.0;  // B
    double delta = 1.0;
    double alpha = 1.0;
    int max_level = 0;

    double scale(int level) const;
    /// log phi(u) up to an additive constant; -inf outside the support.
    double log_phi(double u) const;
    /// Half-width of the support in units of sigma_l; +inf when unbounded.
    double support_half_width() const;
    /// Throws ConfigError on B <= R (uniform), delta <= 0, alpha <= 0 or a negative level.
    void validate(double truth_radius) const;
};

/// x_{lk} = f_{lk} + eps_{lk} / sqrt(n), for l <= observations.max_level().
struct WhiteNoiseData {
    int n = 1;
    CoefficientTree observations{0};
    std::uint64_t seed = 0;
};

enum class NoiseMode { Gaussian, Zero };

/// Noise for coordinate (l,k) comes from its own stream, so the data do not
/// depend on the order coordinates are generated in.
WhiteNoiseData simulate_wn(const CoefficientTree& truth, int n, int max_level, std::uint64_t seed,
                           NoiseMode noise = NoiseMode::Gaussian);
WhiteNoiseData simulate_wn(const GridFunction& truth, int n, const WaveletBasis& basis, std::uint64_t seed,
                           NoiseMode noise = NoiseMode::Gaussian);

/// Posterior of one coefficient, density proportional to exp(-n (x - theta)^2 / 2) phi(theta / sigma_l),
/// tabulated on kTableSize points covering all but ~e^-40 of the mass.
class CoordPosterior {
public:
    static constexpr std::size_t kTableSize = 4096;

    static CoordPosterior compute(double x, int level, const ProductPriorSpec& prior, int n);

    double observation() const noexcept { return x_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return variance_; }
    double lower() const noexcept { return theta_.front(); }
    double upper() const noexcept { return theta_.back(); }
    const std::vector<double>& nodes() const noexcept { return theta_; }
    const std::vector<double>& density() const noexcept { return density_; }
    const std::vector<double>& cdf() const noexcept { return cdf_; }

    /// Inverse CDF with linear interpolation in the table.
    double quantile(double u) const noexcept;
    double sample(Rng& rng) const noexcept { return quantile(rng.uniform()); }

    /// E[exp(t sqrt(n) (theta - x))] under this posterior.
    double laplace(double t) const;

private:
    double x_ = 0.0;
    int n_ = 1;
    double mean_ = 0.0;
    double variance_ = 0.0;
    std::vector<double> theta_;
    std::vector<double> density_;  // normalised
    std::vector<double> cdf_;
};

/// All coordinate posteriors for a data set, scaling coefficient included.
class ProductPosterior {
public:
    ProductPosterior(const WhiteNoiseData& data, const ProductPriorSpec& prior);

    int max_level() const noexcept { return max_level_; }
    const CoordPosterior& scaling() const noexcept { return scaling_; }
    const CoordPosterior& coordinate(int level, int position) const;
    CoefficientTree mean() const;

    /// Fills `out` with one joint draw; coordinate (l,k) reads only from rngs[flat index + 1],
    /// rngs[0] drives the scaling coefficient.
    void draw(std::vector<Rng>& rngs, CoefficientTree& out) const;
    /// One generator per coordinate, derived from `seed`.
    std::vector<Rng> make_streams(std::uint64_t seed) const;

private:
    int max_level_;
    CoordPosterior scaling_;
    std::vector<CoordPosterior> coords_;  // level-major
};

/// m posterior draws synthesised on the basis grid.
std::vector<GridFunction> draw_posterior_function(const WhiteNoiseData& data, const ProductPriorSpec& prior,
                                                  const WaveletBasis& basis, int draws, std::uint64_t seed);

/// E^Pi[exp(t sqrt(n)(theta_{lk} - x_{lk})) | data] for one data set (uniform prior, |t| <= 3).
double laplace_check(const WhiteNoiseData& data, const ProductPriorSpec& prior, int level, int position, double t);

/// The same transform averaged over `replications` data sets drawn around the
/// true coefficient. With `flip_noise` each replication uses the negated noise.
double laplace_average(double true_coeff, int level, int position, const ProductPriorSpec& prior, int n, double t,
                       int replications, std::uint64_t seed, bool flip_noise = false);

}  // namespace supnorm
