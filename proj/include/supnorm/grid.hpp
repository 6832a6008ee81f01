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
#include <iosfwd>
#include <span>
#include <vector>

namespace supnorm {

/// Midpoint grid of 2^J equal cells on [0,1]. All quadratures in the library
/// are midpoint rules on one of these.
class DyadicGrid {
public:
    explicit DyadicGrid(int resolution);

    int resolution() const noexcept { return resolution_; }
    std::size_t size() const noexcept { return std::size_t{1} << resolution_; }
    double cell_width() const noexcept { return width_; }
    double midpoint(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * width_; }

    /// Index of the cell containing x, with cells (i h, (i+1) h] and the first cell closed on the left.
    std::size_t cell_of(double x) const noexcept;

    friend bool operator==(const DyadicGrid&, const DyadicGrid&) = default;

private:
    int resolution_;
    double width_;
};

/// Real function on [0,1] sampled at the midpoints of a DyadicGrid.
class GridFunction {
public:
    explicit GridFunction(DyadicGrid grid);  // zero function
    GridFunction(DyadicGrid grid, std::vector<double> values);

    template <class F>
    static GridFunction from_callable(DyadicGrid grid, F&& f) {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.midpoint(i));
        return GridFunction(grid, std::move(v));
    }

    static GridFunction constant(DyadicGrid grid, double c);

    const DyadicGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    /// Value at x by cell lookup (piecewise constant interpretation).
    double at(double x) const noexcept { return values_[grid_.cell_of(x)]; }

    /// Midpoint-rule integral.
    double integral() const noexcept;
    double min() const noexcept;
    double max() const noexcept;

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator-=(const GridFunction& other);
    GridFunction& operator*=(double c) noexcept;

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(double c, GridFunction a) { return a *= c; }

    /// Two columns, `midpoint,value`, with a header line.
    void write_csv(std::ostream& os) const;

private:
    DyadicGrid grid_;
    std::vector<double> values_;
};

/// Throws GridMismatchError unless both grids agree.
void require_same_grid(const DyadicGrid& a, const DyadicGrid& b, const char* context);

}  // namespace supnorm
