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

#include <cstddef>
#include <span>
#include <vector>

#include "supnorm/grid.hpp"

namespace supnorm {

enum class WaveletKind { Haar, BoundarySmooth };

/// (level, position) of a wavelet; 0 <= position < 2^level.
struct WaveletIndex {
    int level;
    int position;

    bool valid() const noexcept { return level >= 0 && position >= 0 && position < (1 << level); }
};

/// Haar wavelet 2^{l/2} psi(2^l x - k) with psi = -1 on [0,1/2], +1 on (1/2,1].
/// Supports are the intervals (k 2^-l, (k+1) 2^-l], closed on the left for k = 0.
double eval_haar(WaveletIndex idx, double x) noexcept;

/// Scaling coefficient plus wavelet coefficients theta_{lk} for 0 <= l <= max_level.
class CoefficientTree {
public:
    explicit CoefficientTree(int max_level);

    int max_level() const noexcept { return max_level_; }
    /// Number of wavelet coefficients (scaling coefficient excluded).
    std::size_t wavelet_count() const noexcept { return coeffs_.size(); }

    double scaling() const noexcept { return scaling_; }
    double& scaling() noexcept { return scaling_; }

    double operator()(int level, int position) const;
    double& operator()(int level, int position);

    std::span<const double> level(int l) const;
    std::span<double> level(int l);

    /// Wavelet coefficients in level-major order, level l starting at 2^l - 1.
    std::span<const double> flat() const noexcept { return coeffs_; }
    std::span<double> flat() noexcept { return coeffs_; }

    /// Copy keeping only levels <= new_max_level (zero-padded if larger).
    CoefficientTree resized(int new_max_level) const;

    friend bool operator==(const CoefficientTree&, const CoefficientTree&) = default;

private:
    int max_level_;
    double scaling_ = 0.0;
    std::vector<double> coeffs_;
};

/// Grid samples of a basis function, stored over [offset, offset + values.size()).
struct SampledFunction {
    std::size_t offset = 0;
    std::vector<double> values;
};

/// Orthonormal wavelet basis of a subspace of grid functions, truncated at
/// `max_level`. Inner products are midpoint quadratures on the grid.
///
/// The boundary-corrected kind is built by cascade: starting from the
/// grid's cell indicators, each level applies a two-scale step whose
/// interior rows are the Daubechies filter with `order` vanishing moments
/// and whose boundary rows are orthonormal completions chosen so that
/// polynomials of degree < order stay in every scaling space. Levels too
/// coarse to fit the filter use orthonormalised polynomials instead.
///
/// Immutable once built; safe to share between threads.
class WaveletBasis {
public:
    static WaveletBasis build(WaveletKind kind, int max_level, int resolution, int order = 4);

    WaveletKind kind() const noexcept { return kind_; }
    int max_level() const noexcept { return max_level_; }
    int order() const noexcept { return order_; }
    const DyadicGrid& grid() const noexcept { return grid_; }

    const SampledFunction& scaling_function() const noexcept { return scaling_; }
    const SampledFunction& wavelet(WaveletIndex idx) const;
    GridFunction wavelet_function(WaveletIndex idx) const;

    CoefficientTree analyze(const GridFunction& f) const;
    GridFunction synthesize(const CoefficientTree& coeffs) const;

    /// Projection onto the scaling function and levels <= level.
    GridFunction project_low(const GridFunction& f, int level) const;
    /// Projection onto levels level+1 .. max_level.
    GridFunction project_high(const GridFunction& f, int level) const;

    /// max over the grid of sum_k |psi_{lk}(x)|.
    double localisation_sum(int level) const;
    /// Length of the smallest interval holding every grid cell where psi_{lk} != 0.
    double support_diameter(WaveletIndex idx) const;
    /// Quadrature of psi_{lk} over [0,1].
    double integral(WaveletIndex idx) const;

    /// max |<b_i, b_j> - delta_ij| over all basis functions, scaling function included.
    double max_gram_deviation() const;

private:
    WaveletBasis(WaveletKind kind, int max_level, int order, DyadicGrid grid);

    double inner(const SampledFunction& b, std::span<const double> f) const noexcept;

    WaveletKind kind_;
    int max_level_;
    int order_;
    DyadicGrid grid_;
    SampledFunction scaling_;
    std::vector<SampledFunction> wavelets_;  // level-major, like CoefficientTree::flat
};

/// Default grid resolution for a basis truncated at `max_level`.
int default_resolution(int max_level) noexcept;

/// Low-pass Daubechies filter with `vanishing_moments` in [1, 6], normalised to sum sqrt(2).
std::span<const double> daubechies_filter(int vanishing_moments);

}  // namespace supnorm
