#include "dln/assembly.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dln {

namespace {

// P2 shape functions on the reference interval [0,1], nodes (0, 1/2, 1).
void shape_1d(double xi, double* n, double* dn) {
    n[0] = (1.0 - xi) * (1.0 - 2.0 * xi);
    n[1] = 4.0 * xi * (1.0 - xi);
    n[2] = xi * (2.0 * xi - 1.0);
    dn[0] = 4.0 * xi - 3.0;
    dn[1] = 4.0 - 8.0 * xi;
    dn[2] = 4.0 * xi - 1.0;
}

// P2 shape functions on the reference triangle, local order
// (v0, v1, v2, m01, m12, m20).
void shape_2d(double xi, double eta, double* n, double* dxi, double* deta) {
    const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
    n[0] = l0 * (2.0 * l0 - 1.0);
    n[1] = l1 * (2.0 * l1 - 1.0);
    n[2] = l2 * (2.0 * l2 - 1.0);
    n[3] = 4.0 * l0 * l1;
    n[4] = 4.0 * l1 * l2;
    n[5] = 4.0 * l2 * l0;
    dxi[0] = 1.0 - 4.0 * l0;
    dxi[1] = 4.0 * l1 - 1.0;
    dxi[2] = 0.0;
    dxi[3] = 4.0 * (l0 - l1);
    dxi[4] = 4.0 * l2;
    dxi[5] = -4.0 * l2;
    deta[0] = 1.0 - 4.0 * l0;
    deta[1] = 0.0;
    deta[2] = 4.0 * l2 - 1.0;
    deta[3] = -4.0 * l1;
    deta[4] = 4.0 * l1;
    deta[5] = 4.0 * (l0 - l2);
}

struct ShapeTable {
    int n_qp = 0;
    int n_shape = 0;
    std::vector<double> weight;         // reference weights
    std::vector<double> value;          // [qp * n_shape + i]
    std::vector<double> grad_xi;        // [qp * n_shape + i]
    std::vector<double> grad_eta;       // 2D only
    std::vector<QuadPoint> ref_points;  // for mapping to physical coordinates
};

ShapeTable build_table(int dimension, const QuadratureRule& rule) {
    ShapeTable t;
    t.n_qp = static_cast<int>(rule.points.size());
    t.n_shape = dimension == 1 ? 3 : 6;
    t.ref_points = rule.points;
    t.weight.resize(t.n_qp);
    t.value.resize(t.n_qp * t.n_shape);
    t.grad_xi.resize(t.n_qp * t.n_shape);
    if (dimension == 2) t.grad_eta.resize(t.n_qp * t.n_shape);
    for (int q = 0; q < t.n_qp; ++q) {
        const auto& p = rule.points[q];
        t.weight[q] = p.w;
        if (dimension == 1) {
            shape_1d(p.x, &t.value[q * 3], &t.grad_xi[q * 3]);
        } else {
            shape_2d(p.x, p.y, &t.value[q * 6], &t.grad_xi[q * 6], &t.grad_eta[q * 6]);
        }
    }
    return t;
}

struct CellGeometry {
    Point origin;
    double j00, j01, j10, j11;  // columns are the edge vectors (2D)
    double det;                 // h in 1D, Jacobian determinant in 2D
    double inv00, inv01, inv10, inv11;
};

CellGeometry cell_geometry(const FeSpace& space, int cell) {
    CellGeometry g{};
    const auto v = space.cell_vertices(cell);
    g.origin = v[0];
    if (space.mesh().dimension == 1) {
        g.det = v[1].x - v[0].x;
        return g;
    }
    g.j00 = v[1].x - v[0].x;
    g.j10 = v[1].y - v[0].y;
    g.j01 = v[2].x - v[0].x;
    g.j11 = v[2].y - v[0].y;
    g.det = g.j00 * g.j11 - g.j01 * g.j10;
    const double inv_det = 1.0 / g.det;
    g.inv00 = g.j11 * inv_det;
    g.inv01 = -g.j01 * inv_det;
    g.inv10 = -g.j10 * inv_det;
    g.inv11 = g.j00 * inv_det;
    return g;
}

Point map_point(const CellGeometry& g, int dimension, const QuadPoint& ref) {
    if (dimension == 1) return {g.origin.x + ref.x * g.det, 0.0};
    return {g.origin.x + g.j00 * ref.x + g.j01 * ref.y, g.origin.y + g.j10 * ref.x + g.j11 * ref.y};
}

}  // namespace

QuadratureRule default_rule(const FeSpace& space) {
    return space.mesh().dimension == 1 ? interval_rule(9) : triangle_rule(8);
}

QuadratureRule elevated_rule(const FeSpace& space) {
    return space.mesh().dimension == 1 ? interval_rule(11) : triangle_rule(10);
}

SparseMatrix assemble_mass(const FeSpace& space, const QuadratureRule* rule) {
    const QuadratureRule r = rule ? *rule : default_rule(space);
    const int dim = space.mesh().dimension;
    const ShapeTable t = build_table(dim, r);
    const int nd = space.dofs_per_cell();

    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(space.cell_count()) * nd * nd);
    for (int c = 0; c < space.cell_count(); ++c) {
        const CellGeometry g = cell_geometry(space, c);
        const double scale = std::abs(g.det);
        const int* dofs = space.cell_dofs(c);
        for (int q = 0; q < t.n_qp; ++q) {
            const double w = t.weight[q] * scale;
            const double* n = &t.value[q * nd];
            for (int i = 0; i < nd; ++i) {
                for (int j = 0; j < nd; ++j) {
                    trip.push_back({dofs[i], dofs[j], w * (n[i] * n[j])});
                }
            }
        }
    }
    return SparseMatrix::from_triplets(space.dof_count(), space.dof_count(), std::move(trip));
}

SparseMatrix assemble_stiffness(const FeSpace& space, const QuadratureRule* rule) {
    const QuadratureRule r = rule ? *rule : default_rule(space);
    const int dim = space.mesh().dimension;
    const ShapeTable t = build_table(dim, r);
    const int nd = space.dofs_per_cell();

    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(space.cell_count()) * nd * nd);
    std::array<double, 6> gx{}, gy{};
    for (int c = 0; c < space.cell_count(); ++c) {
        const CellGeometry g = cell_geometry(space, c);
        const double scale = std::abs(g.det);
        const int* dofs = space.cell_dofs(c);
        for (int q = 0; q < t.n_qp; ++q) {
            const double w = t.weight[q] * scale;
            if (dim == 1) {
                const double inv_h = 1.0 / g.det;
                for (int i = 0; i < 3; ++i) gx[i] = t.grad_xi[q * 3 + i] * inv_h;
                for (int i = 0; i < 3; ++i) {
                    for (int j = 0; j < 3; ++j) {
                        trip.push_back({dofs[i], dofs[j], w * (gx[i] * gx[j])});
                    }
                }
            } else {
                for (int i = 0; i < 6; ++i) {
                    const double dxi = t.grad_xi[q * 6 + i], deta = t.grad_eta[q * 6 + i];
                    gx[i] = g.inv00 * dxi + g.inv10 * deta;
                    gy[i] = g.inv01 * dxi + g.inv11 * deta;
                }
                for (int i = 0; i < 6; ++i) {
                    for (int j = 0; j < 6; ++j) {
                        trip.push_back({dofs[i], dofs[j], w * (gx[i] * gx[j] + gy[i] * gy[j])});
                    }
                }
            }
        }
    }
    return SparseMatrix::from_triplets(space.dof_count(), space.dof_count(), std::move(trip));
}

namespace {

void check_finite(double value, int cell, Point p) {
    if (!std::isfinite(value)) {
        throw std::runtime_error("assemble_load: non-finite integrand in cell " +
                                 std::to_string(cell) + " at (" + std::to_string(p.x) + ", " +
                                 std::to_string(p.y) + ")");
    }
}

template <class Evaluate>
FieldVector assemble_load_impl(const FeSpace& space, const QuadratureRule* rule, Evaluate&& eval) {
    const QuadratureRule r = rule ? *rule : default_rule(space);
    const int dim = space.mesh().dimension;
    const ShapeTable t = build_table(dim, r);
    const int nd = space.dofs_per_cell();

    FieldVector load(space.dof_count(), 0.0);
    for (int c = 0; c < space.cell_count(); ++c) {
        const CellGeometry g = cell_geometry(space, c);
        const double scale = std::abs(g.det);
        const int* dofs = space.cell_dofs(c);
        for (int q = 0; q < t.n_qp; ++q) {
            const double* n = &t.value[q * nd];
            const double value = eval(c, q, n, dofs, g, t);
            check_finite(value, c, map_point(g, dim, t.ref_points[q]));
            const double w = t.weight[q] * scale * value;
            for (int i = 0; i < nd; ++i) load[dofs[i]] += w * n[i];
        }
    }
    return load;
}

double eval_field(const double* n, const int* dofs, int nd, const FieldVector& u) {
    double s = 0.0;
    for (int i = 0; i < nd; ++i) s += n[i] * u[dofs[i]];
    return s;
}

}  // namespace

FieldVector assemble_load(const FeSpace& space, const PointFn& g, const QuadratureRule* rule) {
    const int dim = space.mesh().dimension;
    return assemble_load_impl(space, rule,
                              [&](int, int q, const double*, const int*, const CellGeometry& geo,
                                  const ShapeTable& t) { return g(map_point(geo, dim, t.ref_points[q])); });
}

FieldVector assemble_load(const FeSpace& space, const ScalarFn& fn, const FieldVector& u,
                          const QuadratureRule* rule) {
    if (static_cast<int>(u.size()) != space.dof_count()) {
        throw std::invalid_argument("assemble_load: field not in this space");
    }
    const int nd = space.dofs_per_cell();
    return assemble_load_impl(space, rule,
                              [&](int, int, const double* n, const int* dofs, const CellGeometry&,
                                  const ShapeTable&) { return fn(eval_field(n, dofs, nd, u)); });
}

FieldVector assemble_load(const FeSpace& space, const BinaryFn& fn, const FieldVector& u,
                          const FieldVector& v, const QuadratureRule* rule) {
    check_same_size(u, v, "assemble_load");
    if (static_cast<int>(u.size()) != space.dof_count()) {
        throw std::invalid_argument("assemble_load: fields not in this space");
    }
    const int nd = space.dofs_per_cell();
    return assemble_load_impl(
        space, rule,
        [&](int, int, const double* n, const int* dofs, const CellGeometry&, const ShapeTable&) {
            return fn(eval_field(n, dofs, nd, u), eval_field(n, dofs, nd, v));
        });
}

double integrate(const FeSpace& space, const ScalarFn& fn, const FieldVector& u,
                 const QuadratureRule* rule) {
    const QuadratureRule r = rule ? *rule : default_rule(space);
    const int dim = space.mesh().dimension;
    const ShapeTable t = build_table(dim, r);
    const int nd = space.dofs_per_cell();

    double total = 0.0;
    for (int c = 0; c < space.cell_count(); ++c) {
        const CellGeometry g = cell_geometry(space, c);
        const double scale = std::abs(g.det);
        const int* dofs = space.cell_dofs(c);
        for (int q = 0; q < t.n_qp; ++q) {
            total += t.weight[q] * scale * fn(eval_field(&t.value[q * nd], dofs, nd, u));
        }
    }
    return total;
}

FieldVector interpolate(const FeSpace& space, const PointFn& fn) {
    FieldVector u(space.dof_count());
    for (int i = 0; i < space.dof_count(); ++i) u[i] = fn(space.dof_point(i));
    return u;
}

double error_norm(const FeSpace& space, const FieldVector& u, const PointFn& exact, NormKind kind,
                  const PointGradFn& exact_grad) {
    if (kind == NormKind::H1 && !exact_grad) {
        throw std::invalid_argument("error_norm: H1 norm needs the exact gradient");
    }
    const QuadratureRule r = default_rule(space);
    const int dim = space.mesh().dimension;
    const ShapeTable t = build_table(dim, r);
    const int nd = space.dofs_per_cell();

    double total = 0.0;
    for (int c = 0; c < space.cell_count(); ++c) {
        const CellGeometry g = cell_geometry(space, c);
        const double scale = std::abs(g.det);
        const int* dofs = space.cell_dofs(c);
        for (int q = 0; q < t.n_qp; ++q) {
            const Point p = map_point(g, dim, t.ref_points[q]);
            const double* n = &t.value[q * nd];
            const double diff = eval_field(n, dofs, nd, u) - exact(p);
            double cell_term = diff * diff;
            if (kind == NormKind::H1) {
                double ghx = 0.0, ghy = 0.0;
                if (dim == 1) {
                    const double inv_h = 1.0 / g.det;
                    for (int i = 0; i < 3; ++i) ghx += t.grad_xi[q * 3 + i] * inv_h * u[dofs[i]];
                } else {
                    for (int i = 0; i < 6; ++i) {
                        const double dxi = t.grad_xi[q * 6 + i], deta = t.grad_eta[q * 6 + i];
                        ghx += (g.inv00 * dxi + g.inv10 * deta) * u[dofs[i]];
                        ghy += (g.inv01 * dxi + g.inv11 * deta) * u[dofs[i]];
                    }
                }
                const Point eg = exact_grad(p);
                cell_term += (ghx - eg.x) * (ghx - eg.x);
                if (dim == 2) cell_term += (ghy - eg.y) * (ghy - eg.y);
            }
            total += t.weight[q] * scale * cell_term;
        }
    }
    return std::sqrt(total);
}

double discrete_time_norm(const std::vector<double>& per_step_errors,
                          const std::vector<double>& steps, TimeNormKind kind) {
    if (kind == TimeNormKind::LInf) {
        double m = 0.0;
        for (double e : per_step_errors) m = std::max(m, std::abs(e));
        return m;
    }
    if (per_step_errors.size() != steps.size()) {
        throw std::invalid_argument("discrete_time_norm: lists must be aligned");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        s += steps[i] * per_step_errors[i] * per_step_errors[i];
    }
    return std::sqrt(s);
}

FieldVector boundary_values(const FeSpace& space, const PointFn& fn) {
    const auto& bdy = space.boundary_dofs();
    FieldVector g(bdy.size());
    for (std::size_t i = 0; i < bdy.size(); ++i) g[i] = fn(space.dof_point(bdy[i]));
    return g;
}

SparseMatrix apply_boundary(const FeSpace& space, const SparseMatrix& a, FieldVector& rhs,
                            const PointFn& value_fn) {
    if (space.boundary() != BoundaryKind::Dirichlet) return a;
    const FieldVector g = boundary_values(space, value_fn);
    a.dirichlet_rhs(rhs, space.boundary_dofs(), g);
    return a.with_dirichlet(space.boundary_dofs());
}

}  // namespace dln
