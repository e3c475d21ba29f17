#pragma once

#include <functional>

#include "dln/fe_space.hpp"
#include "dln/field.hpp"
#include "dln/quadrature.hpp"
#include "dln/sparse.hpp"

namespace dln {

using ScalarFn = std::function<double(double)>;
using BinaryFn = std::function<double(double, double)>;
using PointFn = std::function<double(Point)>;
using PointGradFn = std::function<Point(Point)>;

/// Default assembly rules: degree 9 on intervals, degree 8 on triangles, so
/// cubic nonlinearities of P2 fields against P2 test functions integrate
/// exactly.
QuadratureRule default_rule(const FeSpace& space);
QuadratureRule elevated_rule(const FeSpace& space);  ///< two degrees higher, for checks

SparseMatrix assemble_mass(const FeSpace& space, const QuadratureRule* rule = nullptr);
SparseMatrix assemble_stiffness(const FeSpace& space, const QuadratureRule* rule = nullptr);

/// Load vector (g, psi_i) for a spatial function g.
FieldVector assemble_load(const FeSpace& space, const PointFn& g,
                          const QuadratureRule* rule = nullptr);

/// Load vector (fn(u), psi_i); fn is applied pointwise to the FE function u
/// at quadrature points.
FieldVector assemble_load(const FeSpace& space, const ScalarFn& fn, const FieldVector& u,
                          const QuadratureRule* rule = nullptr);

/// Load vector (fn(u, v), psi_i) for two FE functions in the same space.
FieldVector assemble_load(const FeSpace& space, const BinaryFn& fn, const FieldVector& u,
                          const FieldVector& v, const QuadratureRule* rule = nullptr);

/// Integral of fn(u) over the domain.
double integrate(const FeSpace& space, const ScalarFn& fn, const FieldVector& u,
                 const QuadratureRule* rule = nullptr);

/// Nodal P2 interpolant of a point function.
FieldVector interpolate(const FeSpace& space, const PointFn& fn);

enum class NormKind { L2, H1 };

/// Quadrature norm of (u_h - exact); H1 adds the gradient misfit and needs
/// the exact gradient.
double error_norm(const FeSpace& space, const FieldVector& u, const PointFn& exact, NormKind kind,
                  const PointGradFn& exact_grad = nullptr);

enum class TimeNormKind { LInf, L2 };

/// Time-aggregated norms: LInf ignores steps, L2 gives sqrt(sum k_i e_i^2)
/// over aligned lists.
double discrete_time_norm(const std::vector<double>& per_step_errors,
                          const std::vector<double>& steps, TimeNormKind kind);

/// Values of fn at the constrained dofs, aligned with space.boundary_dofs().
FieldVector boundary_values(const FeSpace& space, const PointFn& fn);

/// Row/column elimination of the Dirichlet dofs of `space` in system form:
/// folds boundary values into rhs using the unconstrained matrix, then
/// returns the constrained operator. Natural and periodic spaces pass through.
SparseMatrix apply_boundary(const FeSpace& space, const SparseMatrix& a, FieldVector& rhs,
                            const PointFn& value_fn);

}  // namespace dln
