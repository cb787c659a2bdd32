// Copyright 2026 The hmflow Authors
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

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace hmflow {

/// Periodic square grid of N x N nodes on [-L/2, L/2)^2.  Node (i, j) sits
/// at x = ((i - N/2) dx, (j - N/2) dx); i runs along the first axis.
struct Grid2 {
    int n = 128;
    double length = 16.0;

    Grid2() = default;
    Grid2(int n_, double length_);

    double dx() const {
        return length / n;
    }
    std::size_t nodes() const {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
    }
    double coord(int i) const {
        return (i - n / 2) * dx();
    }
    int wrap(int i) const {
        return ((i % n) + n) % n;
    }

    bool operator==(const Grid2& other) const {
        return n == other.n && length == other.length;
    }
};

/// Field of `components` real values per node, stored component-major so
/// that each component is one contiguous row-major plane.
class Field {
public:
    Field() = default;
    explicit Field(const Grid2& grid, int components = 1, double fill = 0.0);

    const Grid2& grid() const {
        return grid_;
    }
    int components() const {
        return components_;
    }
    std::size_t plane_size() const {
        return grid_.nodes();
    }

    std::span<double> plane(int c) {
        return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
    }
    std::span<const double> plane(int c) const {
        return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
    }
    double& at(int c, std::size_t node) {
        return data_[static_cast<std::size_t>(c) * plane_size() + node];
    }
    double at(int c, std::size_t node) const {
        return data_[static_cast<std::size_t>(c) * plane_size() + node];
    }
    double& at(int c, int i, int j) {
        return at(c, grid_.index(i, j));
    }
    double at(int c, int i, int j) const {
        return at(c, grid_.index(i, j));
    }

    std::vector<double>& data() {
        return data_;
    }
    const std::vector<double>& data() const {
        return data_;
    }

    bool all_finite() const;

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(double c);

private:
    Grid2 grid_;
    int components_ = 0;
    std::vector<double> data_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double c, Field a);

/// Pointwise Euclidean norm over components, as a scalar field.
Field pointwise_norm(const Field& f);
/// Maximum over nodes and components of |a - b|.
double max_abs_difference(const Field& a, const Field& b);

Field laplacian(const Field& f);
Field central_difference(const Field& f, int axis);
Field forward_difference(const Field& f, int axis);
Field backward_difference(const Field& f, int axis);
std::array<Field, 2> gradient(const Field& f);
/// Sum of central differences of (fx, fy); the composition with gradient is
/// a wide-stencil Laplacian.
Field divergence(const Field& fx, const Field& fy);

/// dx^2 times the sum over nodes; scalar fields only.
double integrate(const Field& f);
/// Discrete L^p norm of the pointwise Euclidean norm; p = infinity allowed.
double lp_norm(const Field& f, double p);
double sup_norm(const Field& f);

/// Periodic lattice shift: out(i, j) = f(i - di, j - dj).
Field shift(const Field& f, int di, int dj);

/// Exact exponential of the 5-point stencil symbol, applied in Fourier space.
class HeatSemigroup {
public:
    explicit HeatSemigroup(const Grid2& grid);
    ~HeatSemigroup();
    HeatSemigroup(const HeatSemigroup&) = delete;
    HeatSemigroup& operator=(const HeatSemigroup&) = delete;

    Field apply(const Field& u, double s) const;

    /// Stencil symbol (non-positive) for every retained half-spectrum mode.
    const std::vector<double>& symbol() const;

    struct Spectrum;
    /// Forward transform of one plane; reuse with `evaluate` for many s.
    Spectrum transform(std::span<const double> plane) const;
    void evaluate(const Spectrum& spec, double s, std::span<double> out) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct HeatSemigroup::Spectrum {
    std::vector<double> re;
    std::vector<double> im;
};

Field heat_semigroup(const Field& u, double s);

struct StrichartzOptions {
    int s_points = 64;
    double decay_floor = 1e-12;
};

/// Quotient of int_0^inf s^{-2/p} ||e^{s Delta} u||_p^2 ds by ||u||_2^2 for
/// a scalar field.  p must lie in (2, infinity].
double strichartz_ratio(const Field& u, double p, const StrichartzOptions& options = {});

/// Header "N,L,components", one line of values, then "i,j,v0,..." rows in
/// row-major node order.
void write_field_csv(std::ostream& out, const Field& f);
Field read_field_csv(std::istream& in);

} // namespace hmflow
