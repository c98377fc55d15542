#pragma once

#include <cmath>
#include <stdexcept>

namespace circlechaos {

enum class DomainKind { Circle, Interval };

// Arc distance on R/Z: min_k |x - y + k|, always in [0, 1/2].
inline double circle_distance(double x, double y) {
    double d = std::fabs(x - y);
    d -= std::floor(d);
    return d > 0.5 ? 1.0 - d : d;
}

// Equispaced grid x_i = i/m on the circle R/Z or on [0,1).
// Cells are left-endpoint Riemann cells of width 1/m.
struct GridDomain {
    DomainKind kind = DomainKind::Circle;
    int m = 2;

    static GridDomain circle(int m) { return make(DomainKind::Circle, m); }
    static GridDomain interval(int m) { return make(DomainKind::Interval, m); }

    double point(int i) const { return static_cast<double>(i) / m; }
    double cell_width() const { return 1.0 / m; }
    int size() const { return m; }

    double distance(int i, int j) const {
        if (kind == DomainKind::Circle) {
            int d = i > j ? i - j : j - i;
            if (2 * d > m) d = m - d;
            return static_cast<double>(d) / m;
        }
        return std::fabs(point(i) - point(j));
    }

    bool operator==(const GridDomain&) const = default;

  private:
    static GridDomain make(DomainKind k, int m) {
        if (m < 2) throw std::invalid_argument("GridDomain: m must be >= 2");
        return GridDomain{k, m};
    }
};

}  // namespace circlechaos
