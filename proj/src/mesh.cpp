#include "dln/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace dln {

Mesh build_mesh(const Domain& domain, int n_per_side) {
    if (n_per_side < 1) throw std::invalid_argument("build_mesh: need n >= 1");
    Mesh mesh;
    mesh.dimension = domain.dimension;
    mesh.domain = domain;
    mesh.n_per_side = n_per_side;

    if (domain.dimension == 1) {
        const double a = domain.lo.x, b = domain.hi.x;
        if (!(b > a)) throw std::invalid_argument("build_mesh: degenerate interval");
        const int n = n_per_side;
        mesh.hx = (b - a) / n;
        mesh.vertices.resize(n + 1);
        for (int i = 0; i <= n; ++i) mesh.vertices[i] = {a + i * mesh.hx, 0.0};
        mesh.intervals.resize(n);
        for (int i = 0; i < n; ++i) mesh.intervals[i] = {i, i + 1};
        return mesh;
    }

    if (domain.dimension != 2) throw std::invalid_argument("build_mesh: dimension must be 1 or 2");
    const double ax = domain.lo.x, bx = domain.hi.x;
    const double ay = domain.lo.y, by = domain.hi.y;
    if (!(bx > ax && by > ay)) throw std::invalid_argument("build_mesh: degenerate rectangle");
    const int n = n_per_side;
    mesh.hx = (bx - ax) / n;
    mesh.hy = (by - ay) / n;

    mesh.vertices.resize((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            mesh.vertices[j * (n + 1) + i] = {ax + i * mesh.hx, ay + j * mesh.hy};
        }
    }
    mesh.triangles.reserve(2 * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = j * (n + 1) + i;
            const int v10 = v00 + 1;
            const int v01 = v00 + (n + 1);
            const int v11 = v01 + 1;
            // diagonal from (i,j) to (i+1,j+1)
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }
    }
    return mesh;
}

}  // namespace dln
