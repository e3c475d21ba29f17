#pragma once

#include <array>
#include <vector>

#include "dln/mesh.hpp"

namespace dln {

enum class BoundaryKind { Natural, Dirichlet, Periodic };

/// P2 Lagrange space on a structured mesh.
///
/// Degrees of freedom live on the half-step lattice: in 1D the 2n+1 points at
/// spacing h/2, in 2D the (2n+1)^2 points at spacing (hx/2, hy/2). Vertices sit
/// at even lattice indices, edge midpoints at the remaining ones, so lattice
/// order doubles as a bandwidth-friendly dof numbering. Periodic spaces
/// identify the wrap-around lattice lines, leaving (2n)^d dofs.
class FeSpace {
public:
    FeSpace(Mesh mesh, BoundaryKind bc);

    const Mesh& mesh() const { return mesh_; }
    BoundaryKind boundary() const { return bc_; }
    int dof_count() const { return n_dofs_; }
    int cell_count() const { return mesh_.cell_count(); }
    int dofs_per_cell() const { return mesh_.dimension == 1 ? 3 : 6; }

    /// Global dof ids of one cell, local order (v0, v1, v2, m01, m12, m20)
    /// in 2D and (v_left, midpoint, v_right) in 1D.
    const int* cell_dofs(int cell) const { return cell_dofs_.data() + cell * dofs_per_cell(); }

    /// Vertex coordinates of one cell (2 points in 1D, 3 in 2D).
    std::array<Point, 3> cell_vertices(int cell) const;

    /// Geometric location of a dof (master copy for periodic spaces).
    Point dof_point(int dof) const { return dof_points_[dof]; }

    /// Constrained dofs: lattice boundary for Dirichlet, empty otherwise.
    const std::vector<int>& boundary_dofs() const { return boundary_dofs_; }

    /// Global dof id of the half-step lattice node (i, j); j is ignored in 1D.
    int lattice_dof(int i, int j = 0) const;

private:
    Mesh mesh_;
    BoundaryKind bc_;
    int n_dofs_ = 0;
    std::vector<int> cell_dofs_;
    std::vector<Point> dof_points_;
    std::vector<int> boundary_dofs_;
};

}  // namespace dln
