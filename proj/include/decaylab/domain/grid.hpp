#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "decaylab/error.hpp"

namespace decaylab {

enum class GridKind { interval, box };

inline const char* to_string(GridKind kind) { return kind == GridKind::interval ? "interval" : "box"; }

/// One uniformly partitioned axis. Only interior nodes are stored: node i sits
/// at a + (i+1)h, and the endpoints a, b carry the (implicit) zero exterior datum.
struct Axis {
    double a = 0.0;
    double b = 1.0;
    int points = 0;
    double h = 0.0;

    double node(int i) const { return a + (i + 1) * h; }
    bool operator==(const Axis&) const = default;
};

class Grid {
public:
    Grid() = default;

    GridKind kind() const { return kind_; }
    int dim() const { return static_cast<int>(axes_.size()); }
    const Axis& axis(int k = 0) const { return axes_.at(static_cast<std::size_t>(k)); }
    std::span<const Axis> axes() const { return axes_; }

    /// Total number of interior nodes. Box nodes are stored x-fastest.
    int size() const {
        int n = 1;
        for (const auto& ax : axes_) n *= ax.points;
        return n;
    }

    /// Cell volume h^n used by midpoint quadrature.
    double cell_volume() const {
        double v = 1.0;
        for (const auto& ax : axes_) v *= ax.h;
        return v;
    }

    bool operator==(const Grid&) const = default;

    friend Grid make_grid(GridKind, std::span<const std::pair<double, double>>, std::span<const int>);

private:
    GridKind kind_ = GridKind::interval;
    std::vector<Axis> axes_;
};

inline Grid make_grid(GridKind kind, std::span<const std::pair<double, double>> endpoints,
                      std::span<const int> points_per_axis) {
    const std::size_t want = kind == GridKind::interval ? 1 : 2;
    require(endpoints.size() == want && points_per_axis.size() == want,
            std::string(to_string(kind)) + " grid needs exactly " + std::to_string(want) + " axis/axes");
    Grid g;
    g.kind_ = kind;
    for (std::size_t k = 0; k < want; ++k) {
        const auto [a, b] = endpoints[k];
        const int n = points_per_axis[k];
        require(std::isfinite(a) && std::isfinite(b), "grid endpoints must be finite");
        require(a < b, "grid endpoints must satisfy a < b");
        require(n >= 3, "grid needs at least 3 interior points per axis (got " + std::to_string(n) + ")");
        g.axes_.push_back(Axis{a, b, n, (b - a) / (n + 1)});
    }
    return g;
}

inline Grid make_interval(double a, double b, int points) {
    const std::pair<double, double> e[] = {{a, b}};
    const int n[] = {points};
    return make_grid(GridKind::interval, e, n);
}

inline Grid make_box(std::pair<double, double> x, std::pair<double, double> y, int nx, int ny) {
    const std::pair<double, double> e[] = {x, y};
    const int n[] = {nx, ny};
    return make_grid(GridKind::box, e, n);
}

}  // namespace decaylab
