#pragma once

#include <vector>

namespace dln {

struct QuadPoint {
    double x;  ///< first reference coordinate
    double y;  ///< second reference coordinate (unused in 1D)
    double w;  ///< weight, includes the reference cell measure
};

/// Quadrature rule on the reference cell: the unit interval [0,1] in 1D,
/// the unit triangle {x,y >= 0, x+y <= 1} in 2D. Weights sum to the cell
/// measure (1 resp. 1/2) and the rule is exact for polynomials up to `degree`.
struct QuadratureRule {
    int degree = 0;
    std::vector<QuadPoint> points;
};

/// Gauss-Legendre nodes and weights on [0,1], exact to degree 2m-1.
/// Computed by Newton iteration on the Legendre recurrence.
void gauss_legendre_01(int m, std::vector<double>& nodes, std::vector<double>& weights);

/// Rule on [0,1] exact at least to the requested polynomial degree.
QuadratureRule interval_rule(int degree);

/// Rule on the unit triangle exact at least to the requested degree, built as
/// a collapsed (Duffy) tensor product of Gauss-Legendre rules. The extra power
/// of the Jacobian is absorbed by one more point in the collapsed direction.
QuadratureRule triangle_rule(int degree);

}  // namespace dln
