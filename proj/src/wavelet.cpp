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

#include "supnorm/wavelet.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "supnorm/errors.hpp"

namespace supnorm {

namespace {

// Daubechies low-pass filters, 20 significant digits, from spectral factorisation.
constexpr std::array<double, 2> kDb1 = {0.70710678118654752440, 0.70710678118654752440};
constexpr std::array<double, 4> kDb2 = {0.48296291314453414337, 0.83651630373780790558, 0.22414386804201338103,
                                        -0.12940952255126038117};
constexpr std::array<double, 6> kDb3 = {0.332670552950082616,    0.80689150931109257649, 0.4598775021184915701,
                                        -0.1350110200102545887,  -0.085441273882026661693,
                                        0.035226291885709536603};
constexpr std::array<double, 8> kDb4 = {0.23037781330889650086,  0.71484657055291564709,  0.63088076792985890788,
                                        -0.027983769416859854211, -0.18703481171909308408, 0.030841381835560763627,
                                        0.032883011666885199735,  -0.010597401785069032105};
constexpr std::array<double, 10> kDb5 = {0.16010239797419291448,  0.60382926979718967054,  0.72430852843777292773,
                                         0.13842814590132073151,  -0.24229488706638203186, -0.032244869584638374648,
                                         0.077571493840045713523, -0.0062414902127982742742,
                                         -0.012580751999081999469, 0.003335725285473771278};
constexpr std::array<double, 12> kDb6 = {0.11154074335010946362,   0.49462389039845308568,  0.75113390802109535068,
                                         0.31525035170919762909,   -0.22626469396543982008, -0.12976686756726193556,
                                         0.097501605587323049102,  0.027522865530305728626, -0.031582039317486029565,
                                         0.00055384220116149613925, 0.0047772575109455106396,
                                         -0.0010773010853084795649};

std::size_t flat_index(int level, int position) noexcept {
    return (std::size_t{1} << level) - 1 + static_cast<std::size_t>(position);
}

// Sparse vector in the coordinates of one scaling space.
struct SparseVec {
    std::size_t start = 0;
    std::vector<double> v;
};

using Eigen::MatrixXd;
using Eigen::VectorXd;

SparseVec to_sparse(const VectorXd& dense, std::size_t start) {
    std::size_t lo = 0;
    std::size_t hi = static_cast<std::size_t>(dense.size());
    while (lo < hi && dense(static_cast<Eigen::Index>(lo)) == 0.0) ++lo;
    while (hi > lo && dense(static_cast<Eigen::Index>(hi - 1)) == 0.0) --hi;
    SparseVec out;
    out.start = start + lo;
    out.v.assign(dense.data() + lo, dense.data() + hi);
    return out;
}

// One two-scale step V_{j+1} -> V_j + W_j, as rows in V_{j+1} coordinates.
struct LevelStep {
    std::vector<SparseVec> low;
    std::vector<SparseVec> high;
};

// Orthonormal basis of {v supported in [band_start, band_start+width) : v _|_ rows}.
MatrixXd band_null_space(const std::vector<SparseVec>& rows, std::size_t band_start, std::size_t width) {
    std::vector<const SparseVec*> touching;
    for (const auto& r : rows) {
        const std::size_t end = r.start + r.v.size();
        if (end > band_start && r.start < band_start + width) touching.push_back(&r);
    }
    MatrixXd k = MatrixXd::Zero(static_cast<Eigen::Index>(std::max<std::size_t>(touching.size(), 1)),
                                static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < touching.size(); ++i) {
        const SparseVec& r = *touching[i];
        for (std::size_t t = 0; t < r.v.size(); ++t) {
            const std::size_t col = r.start + t;
            if (col >= band_start && col < band_start + width) {
                k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col - band_start)) = r.v[t];
            }
        }
    }
    Eigen::JacobiSVD<MatrixXd> svd(k, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > 1e-9) ++rank;
    }
    return svd.matrixV().rightCols(static_cast<Eigen::Index>(width) - rank);
}

// Splits the boundary complement into N low-pass vectors (spanning the
// polynomial residuals) and the remaining high-pass vectors.
void split_boundary(const MatrixXd& complement, const MatrixXd& poly_band, int vanishing, MatrixXd& low,
                    MatrixXd& high) {
    const Eigen::Index dim = complement.cols();
    if (dim < vanishing) throw NumericalError("boundary complement smaller than the number of vanishing moments");
    // Only the span of the polynomials matters; a local orthonormal basis of
    // it keeps the residuals well scaled at fine levels.
    Eigen::HouseholderQR<MatrixXd> local(poly_band);
    const MatrixXd local_poly = local.householderQ() * MatrixXd::Identity(poly_band.rows(), vanishing);
    const MatrixXd y = complement.transpose() * local_poly;  // dim x N
    Eigen::JacobiSVD<MatrixXd> check(y);
    if (check.singularValues()(vanishing - 1) < 1e-8) {
        throw NumericalError("boundary polynomial residuals are rank deficient");
    }
    Eigen::HouseholderQR<MatrixXd> qr(y);
    const MatrixXd q = qr.householderQ();
    low = complement * q.leftCols(vanishing);
    high = complement * q.rightCols(dim - vanishing);
}

LevelStep fine_step(std::size_t m, std::span<const double> h, int vanishing, const MatrixXd& poly) {
    const std::size_t taps = h.size();
    const std::size_t n = static_cast<std::size_t>(vanishing);
    const std::size_t half = m / 2;
    const std::size_t a = (n + 1) / 2;
    const std::size_t b = n + 1 - a;
    const std::size_t first = a;
    const std::size_t last = half - n - b;  // inclusive

    std::vector<double> g(taps);
    for (std::size_t t = 0; t < taps; ++t) g[t] = ((t % 2 == 0) ? 1.0 : -1.0) * h[taps - 1 - t];

    std::vector<SparseVec> interior_low;
    std::vector<SparseVec> interior_high;
    for (std::size_t i = first; i <= last; ++i) {
        interior_low.push_back({2 * i, std::vector<double>(h.begin(), h.end())});
        interior_high.push_back({2 * i, g});
    }
    std::vector<SparseVec> interior = interior_low;
    interior.insert(interior.end(), interior_high.begin(), interior_high.end());

    const std::size_t left_width = 2 * a + 2 * n;
    const std::size_t right_width = 2 * b + 2 * n;
    const std::size_t right_start = m - right_width;
    const Eigen::Index nv = vanishing;

    MatrixXd left_low, left_high, right_low, right_high;
    const MatrixXd left_c = band_null_space(interior, 0, left_width);
    split_boundary(left_c, poly.block(0, 0, static_cast<Eigen::Index>(left_width), nv), vanishing, left_low,
                   left_high);
    const MatrixXd right_c = band_null_space(interior, right_start, right_width);
    split_boundary(right_c, poly.block(static_cast<Eigen::Index>(right_start), 0,
                                       static_cast<Eigen::Index>(right_width), nv),
                   vanishing, right_low, right_high);

    if (static_cast<std::size_t>(left_c.cols() + right_c.cols()) != 4 * n) {
        throw NumericalError("boundary complement has unexpected dimension");
    }

    LevelStep step;
    for (Eigen::Index c = 0; c < left_low.cols(); ++c) step.low.push_back(to_sparse(left_low.col(c), 0));
    for (auto& r : interior_low) step.low.push_back(std::move(r));
    for (Eigen::Index c = 0; c < right_low.cols(); ++c) step.low.push_back(to_sparse(right_low.col(c), right_start));

    for (Eigen::Index c = 0; c < left_high.cols(); ++c) step.high.push_back(to_sparse(left_high.col(c), 0));
    for (auto& r : interior_high) step.high.push_back(std::move(r));
    for (Eigen::Index c = 0; c < right_high.cols(); ++c) {
        step.high.push_back(to_sparse(right_high.col(c), right_start));
    }
    if (step.low.size() != half || step.high.size() != half) {
        throw NumericalError("two-scale step produced the wrong number of rows");
    }
    return step;
}

// Coarse levels: V_j is spanned by the first 2^j polynomial coordinate vectors.
LevelStep coarse_step(std::size_t m, const MatrixXd& poly) {
    const std::size_t half = m / 2;
    const MatrixXd p = poly.leftCols(static_cast<Eigen::Index>(half));
    Eigen::JacobiSVD<MatrixXd> check(p);
    if (check.singularValues()(static_cast<Eigen::Index>(half) - 1) < 1e-10 * check.singularValues()(0)) {
        throw NumericalError("polynomial coordinates are rank deficient at a coarse level");
    }
    Eigen::HouseholderQR<MatrixXd> qr(p);
    const MatrixXd q = qr.householderQ();
    LevelStep step;
    for (std::size_t c = 0; c < m; ++c) {
        auto row = to_sparse(q.col(static_cast<Eigen::Index>(c)), 0);
        (c < half ? step.low : step.high).push_back(std::move(row));
    }
    return step;
}

MatrixXd apply_low(const std::vector<SparseVec>& low, const MatrixXd& x) {
    MatrixXd out = MatrixXd::Zero(static_cast<Eigen::Index>(low.size()), x.cols());
    for (std::size_t q = 0; q < low.size(); ++q) {
        const auto& r = low[q];
        for (std::size_t t = 0; t < r.v.size(); ++t) {
            out.row(static_cast<Eigen::Index>(q)) += r.v[t] * x.row(static_cast<Eigen::Index>(r.start + t));
        }
    }
    return out;
}

// Expresses a vector given in V_{from} coordinates in V_J (cell) coordinates.
SparseVec lift(SparseVec v, int from, const std::vector<LevelStep>& steps, int resolution) {
    for (int lev = from; lev < resolution; ++lev) {
        const auto& low = steps[static_cast<std::size_t>(lev)].low;
        std::size_t lo = SIZE_MAX;
        std::size_t hi = 0;
        for (std::size_t t = 0; t < v.v.size(); ++t) {
            const auto& r = low[v.start + t];
            lo = std::min(lo, r.start);
            hi = std::max(hi, r.start + r.v.size());
        }
        SparseVec next{lo, std::vector<double>(hi - lo, 0.0)};
        for (std::size_t t = 0; t < v.v.size(); ++t) {
            const double c = v.v[t];
            if (c == 0.0) continue;
            const auto& r = low[v.start + t];
            for (std::size_t s = 0; s < r.v.size(); ++s) next.v[r.start - lo + s] += c * r.v[s];
        }
        v = std::move(next);
    }
    return v;
}

SampledFunction to_samples(SparseVec cell_coords, int resolution) {
    const double scale = std::ldexp(1.0, resolution);
    const double amp = std::sqrt(scale);
    for (double& x : cell_coords.v) x *= amp;
    return {cell_coords.start, std::move(cell_coords.v)};
}

// Shifted Legendre polynomial P_d(2x - 1) for d = 0..count-1.
template <class Row>
void legendre_row(double x, Eigen::Index count, Row&& out) {
    const double t = 2.0 * x - 1.0;
    if (count > 0) out(0) = 1.0;
    if (count > 1) out(1) = t;
    for (Eigen::Index d = 2; d < count; ++d) {
        out(d) = ((2.0 * static_cast<double>(d) - 1.0) * t * out(d - 1) - (static_cast<double>(d) - 1.0) * out(d - 2)) /
                 static_cast<double>(d);
    }
}

}  // namespace

std::span<const double> daubechies_filter(int vanishing_moments) {
    switch (vanishing_moments) {
        case 1: return kDb1;
        case 2: return kDb2;
        case 3: return kDb3;
        case 4: return kDb4;
        case 5: return kDb5;
        case 6: return kDb6;
        default: throw DomainError("daubechies_filter: vanishing moments must lie in [1, 6]");
    }
}

double eval_haar(WaveletIndex idx, double x) noexcept {
    if (!idx.valid() || x < 0.0 || x > 1.0) return 0.0;
    const double scale = std::ldexp(1.0, idx.level);
    const double u = scale * x - static_cast<double>(idx.position);
    const bool inside = idx.position == 0 ? (u >= 0.0 && u <= 1.0) : (u > 0.0 && u <= 1.0);
    if (!inside) return 0.0;
    const double amp = std::sqrt(scale);
    return u <= 0.5 ? -amp : amp;
}

int default_resolution(int max_level) noexcept { return std::max(12, max_level + 4); }

// ---------------------------------------------------------------------------
// CoefficientTree

CoefficientTree::CoefficientTree(int max_level) : max_level_(max_level) {
    if (max_level < 0 || max_level > 24) throw DomainError("CoefficientTree: max level must lie in [0, 24]");
    coeffs_.assign((std::size_t{1} << (max_level + 1)) - 1, 0.0);
}

double CoefficientTree::operator()(int level, int position) const {
    if (level < 0 || level > max_level_ || !WaveletIndex{level, position}.valid()) {
        throw std::out_of_range("CoefficientTree: index out of range");
    }
    return coeffs_[flat_index(level, position)];
}

double& CoefficientTree::operator()(int level, int position) {
    if (level < 0 || level > max_level_ || !WaveletIndex{level, position}.valid()) {
        throw std::out_of_range("CoefficientTree: index out of range");
    }
    return coeffs_[flat_index(level, position)];
}

std::span<const double> CoefficientTree::level(int l) const {
    if (l < 0 || l > max_level_) throw std::out_of_range("CoefficientTree: level out of range");
    return std::span<const double>(coeffs_).subspan(flat_index(l, 0), std::size_t{1} << l);
}

std::span<double> CoefficientTree::level(int l) {
    if (l < 0 || l > max_level_) throw std::out_of_range("CoefficientTree: level out of range");
    return std::span<double>(coeffs_).subspan(flat_index(l, 0), std::size_t{1} << l);
}

CoefficientTree CoefficientTree::resized(int new_max_level) const {
    CoefficientTree out(new_max_level);
    out.scaling_ = scaling_;
    const std::size_t n = std::min(out.coeffs_.size(), coeffs_.size());
    std::copy_n(coeffs_.begin(), n, out.coeffs_.begin());
    return out;
}

// ---------------------------------------------------------------------------
// WaveletBasis

WaveletBasis::WaveletBasis(WaveletKind kind, int max_level, int order, DyadicGrid grid)
    : kind_(kind), max_level_(max_level), order_(order), grid_(grid) {}

WaveletBasis WaveletBasis::build(WaveletKind kind, int max_level, int resolution, int order) {
    if (max_level < 0) throw DomainError("build_basis: max level must be nonnegative");
    if (resolution < max_level + 2) {
        throw ResolutionError("build_basis: resolution " + std::to_string(resolution) + " is too coarse for max level " +
                              std::to_string(max_level) + " (need J >= L_max + 2)");
    }
    const DyadicGrid grid(resolution);
    const std::size_t n_cells = grid.size();

    if (kind == WaveletKind::Haar) {
        WaveletBasis basis(kind, max_level, 1, grid);
        basis.scaling_ = {0, std::vector<double>(n_cells, 1.0)};
        basis.wavelets_.reserve((std::size_t{1} << (max_level + 1)) - 1);
        for (int l = 0; l <= max_level; ++l) {
            const std::size_t width = n_cells >> l;
            const double amp = std::sqrt(std::ldexp(1.0, l));
            for (int k = 0; k < (1 << l); ++k) {
                SampledFunction f{static_cast<std::size_t>(k) * width, std::vector<double>(width, amp)};
                std::fill_n(f.values.begin(), width / 2, -amp);
                basis.wavelets_.push_back(std::move(f));
            }
        }
        return basis;
    }

    if (order < 2 || order > 6) throw DomainError("build_basis: boundary-corrected order must lie in [2, 6]");
    const auto h = daubechies_filter(order);
    const std::size_t vanishing = static_cast<std::size_t>(order);

    // Level j is built by the fine (filter) step when 2^{j+1} >= 8N; coarser
    // levels use polynomial spaces, which need 2^{j_coarse} polynomial degrees.
    int coarse_top = -1;
    for (int j = 0; j < resolution; ++j) {
        if ((std::size_t{1} << (j + 1)) < 8 * vanishing) coarse_top = j;
    }
    const std::size_t degrees = std::max<std::size_t>(vanishing, coarse_top >= 0 ? (std::size_t{1} << coarse_top) : 0);

    // Coordinates of the polynomials in the cell basis 2^{J/2} 1_cell.
    MatrixXd poly(static_cast<Eigen::Index>(n_cells), static_cast<Eigen::Index>(degrees));
    const double cell_scale = std::ldexp(1.0, -resolution);
    for (std::size_t i = 0; i < n_cells; ++i) {
        legendre_row(grid.midpoint(i), static_cast<Eigen::Index>(degrees), poly.row(static_cast<Eigen::Index>(i)));
    }
    poly *= std::sqrt(cell_scale);

    std::vector<LevelStep> steps(static_cast<std::size_t>(resolution));
    for (int j = resolution - 1; j >= 0; --j) {
        const std::size_t m = std::size_t{1} << (j + 1);
        LevelStep step = j > coarse_top ? fine_step(m, h, order, poly) : coarse_step(m, poly);
        poly = apply_low(step.low, poly);
        steps[static_cast<std::size_t>(j)] = std::move(step);
    }

    WaveletBasis basis(kind, max_level, order, grid);
    basis.scaling_ = to_samples(lift(steps[0].low[0], 1, steps, resolution), resolution);
    // Fix the sign so the scaling function is the constant +1.
    if (basis.scaling_.values.front() < 0.0) {
        for (double& x : basis.scaling_.values) x = -x;
    }
    basis.wavelets_.reserve((std::size_t{1} << (max_level + 1)) - 1);
    for (int l = 0; l <= max_level; ++l) {
        for (const auto& row : steps[static_cast<std::size_t>(l)].high) {
            basis.wavelets_.push_back(to_samples(lift(row, l + 1, steps, resolution), resolution));
        }
    }
    return basis;
}

const SampledFunction& WaveletBasis::wavelet(WaveletIndex idx) const {
    if (!idx.valid() || idx.level > max_level_) throw std::out_of_range("WaveletBasis: index out of range");
    return wavelets_[flat_index(idx.level, idx.position)];
}

GridFunction WaveletBasis::wavelet_function(WaveletIndex idx) const {
    const auto& w = wavelet(idx);
    std::vector<double> v(grid_.size(), 0.0);
    std::copy(w.values.begin(), w.values.end(), v.begin() + static_cast<std::ptrdiff_t>(w.offset));
    return GridFunction(grid_, std::move(v));
}

double WaveletBasis::inner(const SampledFunction& b, std::span<const double> f) const noexcept {
    double s = 0.0;
    for (std::size_t t = 0; t < b.values.size(); ++t) s += b.values[t] * f[b.offset + t];
    return s * grid_.cell_width();
}

CoefficientTree WaveletBasis::analyze(const GridFunction& f) const {
    require_same_grid(grid_, f.grid(), "analyze");
    CoefficientTree out(max_level_);
    out.scaling() = inner(scaling_, f.values());
    auto flat = out.flat();
    for (std::size_t i = 0; i < wavelets_.size(); ++i) flat[i] = inner(wavelets_[i], f.values());
    return out;
}

GridFunction WaveletBasis::synthesize(const CoefficientTree& coeffs) const {
    if (coeffs.max_level() > max_level_) {
        throw std::out_of_range("synthesize: coefficient level " + std::to_string(coeffs.max_level()) +
                                " exceeds basis max level " + std::to_string(max_level_));
    }
    std::vector<double> v(grid_.size(), 0.0);
    auto add = [&v](const SampledFunction& b, double c) {
        if (c == 0.0) return;
        for (std::size_t t = 0; t < b.values.size(); ++t) v[b.offset + t] += c * b.values[t];
    };
    add(scaling_, coeffs.scaling());
    const auto flat = coeffs.flat();
    for (std::size_t i = 0; i < flat.size(); ++i) add(wavelets_[i], flat[i]);
    return GridFunction(grid_, std::move(v));
}

GridFunction WaveletBasis::project_low(const GridFunction& f, int level) const {
    if (level < 0 || level > max_level_) throw std::out_of_range("project_low: level out of range");
    return synthesize(analyze(f).resized(level));
}

GridFunction WaveletBasis::project_high(const GridFunction& f, int level) const {
    if (level < 0 || level > max_level_) throw std::out_of_range("project_high: level out of range");
    CoefficientTree c = analyze(f);
    c.scaling() = 0.0;
    for (int l = 0; l <= level; ++l) std::ranges::fill(c.level(l), 0.0);
    return synthesize(c);
}

double WaveletBasis::localisation_sum(int level) const {
    if (level < 0 || level > max_level_) throw std::out_of_range("localisation_sum: level out of range");
    std::vector<double> acc(grid_.size(), 0.0);
    for (int k = 0; k < (1 << level); ++k) {
        const auto& b = wavelet({level, k});
        for (std::size_t t = 0; t < b.values.size(); ++t) acc[b.offset + t] += std::abs(b.values[t]);
    }
    return *std::max_element(acc.begin(), acc.end());
}

double WaveletBasis::support_diameter(WaveletIndex idx) const {
    const auto& b = wavelet(idx);
    double peak = 0.0;
    for (double x : b.values) peak = std::max(peak, std::abs(x));
    const double cut = 1e-12 * peak;
    std::size_t first = b.values.size();
    std::size_t last = 0;
    for (std::size_t t = 0; t < b.values.size(); ++t) {
        if (std::abs(b.values[t]) > cut) {
            first = std::min(first, t);
            last = t;
        }
    }
    if (first > last) return 0.0;
    return static_cast<double>(last - first + 1) * grid_.cell_width();
}

double WaveletBasis::integral(WaveletIndex idx) const {
    const auto& b = wavelet(idx);
    double s = 0.0;
    for (double x : b.values) s += x;
    return s * grid_.cell_width();
}

double WaveletBasis::max_gram_deviation() const {
    const auto count = static_cast<Eigen::Index>(wavelets_.size() + 1);
    MatrixXd samples = MatrixXd::Zero(count, static_cast<Eigen::Index>(grid_.size()));
    auto put = [&samples](Eigen::Index row, const SampledFunction& b) {
        for (std::size_t t = 0; t < b.values.size(); ++t) {
            samples(row, static_cast<Eigen::Index>(b.offset + t)) = b.values[t];
        }
    };
    put(0, scaling_);
    for (std::size_t i = 0; i < wavelets_.size(); ++i) put(static_cast<Eigen::Index>(i + 1), wavelets_[i]);
    MatrixXd gram = samples * samples.transpose() * grid_.cell_width();
    gram -= MatrixXd::Identity(count, count);
    return gram.cwiseAbs().maxCoeff();
}

}  // namespace supnorm
