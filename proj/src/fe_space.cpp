#include "dln/fe_space.hpp"

#include <stdexcept>

namespace dln {

namespace {

// Periodic lattice lines are numbered in folded order so that wrap-around
// neighbours sit next to each other and the assembled operators keep the
// bandwidth of the non-periodic case.
int fold(int x, int span) {
    const int half = span / 2;
    return x < half ? 2 * x : 2 * (span - 1 - x) + 1;
}

}  // namespace

int FeSpace::lattice_dof(int i, int j) const {
    const int n = mesh_.n_per_side;
    const bool periodic = (bc_ == BoundaryKind::Periodic);
    if (mesh_.dimension == 1) {
        if (!periodic) return i;
        const int wrap = 2 * n;
        return fold(((i % wrap) + wrap) % wrap, wrap);
    }
    const int width = 2 * n + 1;
    if (!periodic) return j * width + i;
    const int wrap = 2 * n;
    const int im = ((i % wrap) + wrap) % wrap;
    const int jm = ((j % wrap) + wrap) % wrap;
    return fold(jm, wrap) * wrap + fold(im, wrap);
}

FeSpace::FeSpace(Mesh mesh, BoundaryKind bc) : mesh_(std::move(mesh)), bc_(bc) {
    const int n = mesh_.n_per_side;
    const bool periodic = (bc == BoundaryKind::Periodic);

    if (mesh_.dimension == 1) {
        if (periodic && n < 2) {
            throw std::invalid_argument("periodic space needs at least 2 cells");
        }
        const int width = 2 * n + 1;
        n_dofs_ = periodic ? 2 * n : width;

        cell_dofs_.resize(3 * n);
        for (int a = 0; a < n; ++a) {
            cell_dofs_[3 * a + 0] = lattice_dof(2 * a);
            cell_dofs_[3 * a + 1] = lattice_dof(2 * a + 1);
            cell_dofs_[3 * a + 2] = lattice_dof(2 * a + 2);
        }
        const int span = periodic ? 2 * n : width;
        dof_points_.resize(n_dofs_);
        for (int i = 0; i < span; ++i) {
            dof_points_[lattice_dof(i)] = {mesh_.domain.lo.x + 0.5 * i * mesh_.hx, 0.0};
        }
        if (bc == BoundaryKind::Dirichlet) boundary_dofs_ = {0, width - 1};
        return;
    }

    if (periodic && n < 2) throw std::invalid_argument("periodic space needs at least 2 cells per side");
    const int width = 2 * n + 1;
    const int wrap = 2 * n;
    n_dofs_ = periodic ? wrap * wrap : width * width;

    cell_dofs_.resize(6 * mesh_.cell_count());
    int c = 0;
    for (int b = 0; b < n; ++b) {
        for (int a = 0; a < n; ++a) {
            const int i = 2 * a, j = 2 * b;
            // lower triangle (v00, v10, v11)
            int* lower = cell_dofs_.data() + 6 * c;
            lower[0] = lattice_dof(i, j);
            lower[1] = lattice_dof(i + 2, j);
            lower[2] = lattice_dof(i + 2, j + 2);
            lower[3] = lattice_dof(i + 1, j);
            lower[4] = lattice_dof(i + 2, j + 1);
            lower[5] = lattice_dof(i + 1, j + 1);
            // upper triangle (v00, v11, v01)
            int* upper = cell_dofs_.data() + 6 * (c + 1);
            upper[0] = lattice_dof(i, j);
            upper[1] = lattice_dof(i + 2, j + 2);
            upper[2] = lattice_dof(i, j + 2);
            upper[3] = lattice_dof(i + 1, j + 1);
            upper[4] = lattice_dof(i + 1, j + 2);
            upper[5] = lattice_dof(i, j + 1);
            c += 2;
        }
    }

    dof_points_.resize(n_dofs_);
    const int span = periodic ? wrap : width;
    for (int j = 0; j < span; ++j) {
        for (int i = 0; i < span; ++i) {
            dof_points_[lattice_dof(i, j)] = {mesh_.domain.lo.x + 0.5 * i * mesh_.hx,
                                              mesh_.domain.lo.y + 0.5 * j * mesh_.hy};
        }
    }

    if (bc == BoundaryKind::Dirichlet) {
        for (int j = 0; j < width; ++j) {
            for (int i = 0; i < width; ++i) {
                if (i == 0 || i == width - 1 || j == 0 || j == width - 1) {
                    boundary_dofs_.push_back(lattice_dof(i, j));
                }
            }
        }
    }
}

std::array<Point, 3> FeSpace::cell_vertices(int cell) const {
    if (mesh_.dimension == 1) {
        const auto& iv = mesh_.intervals[cell];
        return {mesh_.vertices[iv[0]], mesh_.vertices[iv[1]], Point{}};
    }
    const auto& tri = mesh_.triangles[cell];
    return {mesh_.vertices[tri[0]], mesh_.vertices[tri[1]], mesh_.vertices[tri[2]]};
}

}  // namespace dln
