#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <type_traits>
#include <vector>

#include "decaylab/domain/grid.hpp"
#include "decaylab/error.hpp"

namespace decaylab {

using Complex = std::complex<double>;

template <class T>
inline constexpr bool is_complex_v = false;
template <class T>
inline constexpr bool is_complex_v<std::complex<T>> = true;

enum class ScalarKind { real, complex };

/// Samples of u(., t) on the interior nodes of a grid. Values outside the
/// domain are never stored: they are zero by construction.
template <class T>
class BasicField {
public:
    using value_type = T;

    explicit BasicField(Grid grid) : grid_(std::move(grid)), values_(static_cast<std::size_t>(grid_.size()), T{}) {}

    BasicField(Grid grid, std::vector<T> values) : grid_(std::move(grid)), values_(std::move(values)) {
        require(static_cast<int>(values_.size()) == grid_.size(),
                "field has " + std::to_string(values_.size()) + " values but grid has " +
                    std::to_string(grid_.size()) + " interior nodes");
    }

    /// Sample f at every interior node; f receives (x) on intervals, (x, y) on boxes.
    template <class F>
    static BasicField sample(const Grid& grid, F&& f) {
        std::vector<T> v(static_cast<std::size_t>(grid.size()));
        if constexpr (std::is_invocable_v<F, double>) {
            require(grid.kind() == GridKind::interval, "sample: f(x) needs an interval grid");
            for (int i = 0; i < grid.axis(0).points; ++i) v[i] = static_cast<T>(f(grid.axis(0).node(i)));
        } else {
            require(grid.kind() == GridKind::box, "sample: f(x, y) needs a box grid");
            const auto& ax = grid.axis(0);
            const auto& ay = grid.axis(1);
            for (int j = 0; j < ay.points; ++j)
                for (int i = 0; i < ax.points; ++i) v[i + ax.points * j] = static_cast<T>(f(ax.node(i), ay.node(j)));
        }
        return BasicField(grid, std::move(v));
    }

    static constexpr ScalarKind scalar_kind() { return is_complex_v<T> ? ScalarKind::complex : ScalarKind::real; }

    const Grid& grid() const { return grid_; }
    std::span<const T> values() const { return values_; }
    const std::vector<T>& data() const { return values_; }
    int size() const { return static_cast<int>(values_.size()); }
    const T& operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }

    /// Point evaluation with the exterior-zero convention. Inside the domain
    /// the piecewise-linear interpolant through the nodes (and the zero
    /// boundary values) is returned.
    T value_at(double x) const {
        require(grid_.kind() == GridKind::interval, "value_at(x) needs an interval grid");
        const auto& ax = grid_.axis(0);
        if (!(x > ax.a && x < ax.b)) return T{};
        const double pos = (x - ax.a) / ax.h - 1.0;  // fractional node index
        const int left = static_cast<int>(std::floor(pos));
        const double w = pos - left;
        auto node = [&](int i) { return (i < 0 || i >= ax.points) ? T{} : values_[static_cast<std::size_t>(i)]; };
        return (1.0 - w) * node(left) + w * node(left + 1);
    }

    bool operator==(const BasicField&) const = default;

private:
    Grid grid_;
    std::vector<T> values_;
};

using Field = BasicField<double>;
using ComplexField = BasicField<Complex>;

/// Embed real data as a complex field (imaginary part zero).
inline ComplexField to_complex(const Field& f) {
    std::vector<Complex> v(f.data().begin(), f.data().end());
    return ComplexField(f.grid(), std::move(v));
}

template <class T>
BasicField<T> scaled(const BasicField<T>& f, T c) {
    std::vector<T> v = f.data();
    for (auto& x : v) x *= c;
    return BasicField<T>(f.grid(), std::move(v));
}

/// a*u + b*v on the same grid.
template <class T>
BasicField<T> combine(T a, const BasicField<T>& u, T b, const BasicField<T>& v) {
    require(u.grid() == v.grid(), "combine: fields live on different grids");
    std::vector<T> out(u.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * u.data()[i] + b * v.data()[i];
    return BasicField<T>(u.grid(), std::move(out));
}

/// Spatial reflection x -> a + b - x along every axis.
template <class T>
BasicField<T> reflect(const BasicField<T>& f) {
    std::vector<T> v = f.data();
    const Grid& g = f.grid();
    if (g.kind() == GridKind::interval) {
        std::reverse(v.begin(), v.end());
    } else {
        const int nx = g.axis(0).points, ny = g.axis(1).points;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) v[i + nx * j] = f[(nx - 1 - i) + nx * (ny - 1 - j)];
    }
    return BasicField<T>(g, std::move(v));
}

template <class T>
double max_abs(const BasicField<T>& f) {
    double m = 0.0;
    for (const auto& x : f.values()) m = std::max(m, static_cast<double>(std::abs(x)));
    return m;
}

}  // namespace decaylab
