#pragma once

#include <array>
#include <vector>

namespace dln {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Interval in 1D, axis-aligned rectangle in 2D.
struct Domain {
    int dimension = 1;
    Point lo;
    Point hi;

    static Domain interval(double a, double b) { return {1, {a, 0.0}, {b, 0.0}}; }
    static Domain rectangle(Point lo, Point hi) { return {2, lo, hi}; }
};

/// Conforming mesh: n equal intervals in 1D, or an n-by-n grid of squares each
/// split along the bottom-left/top-right diagonal (2n^2 triangles) in 2D.
struct Mesh {
    int dimension = 1;
    Domain domain;
    int n_per_side = 0;
    double hx = 0.0;  ///< cell edge length in x
    double hy = 0.0;  ///< cell edge length in y (2D only)

    std::vector<Point> vertices;
    std::vector<std::array<int, 2>> intervals;  ///< 1D cells (vertex indices)
    std::vector<std::array<int, 3>> triangles;  ///< 2D cells (vertex indices, ccw)

    int cell_count() const {
        return dimension == 1 ? static_cast<int>(intervals.size())
                              : static_cast<int>(triangles.size());
    }
};

Mesh build_mesh(const Domain& domain, int n_per_side);

}  // namespace dln
