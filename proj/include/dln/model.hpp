#pragma once

#include <functional>
#include <optional>

#include "dln/mesh.hpp"

namespace dln {

/// Double-well potential F(u) = 1/4 (u^2 - 1)^2 and its derivative f = F'.
inline double potential(double u) {
    const double w = u * u - 1.0;
    return 0.25 * w * w;
}

inline double potential_derivative(double u) { return u * u * u - u; }

/// Secant quotient of F: (F(a) - F(b))/(a - b), with the equal-argument limit
/// f((a+b)/2). The factored polynomial 1/4 (a+b)(a^2+b^2-2) is both branches
/// at once and is free of cancellation, so no branch is needed.
inline double f_tilde(double a, double b) {
    return 0.25 * (a + b) * (a * a + b * b - 2.0);
}

/// Convex-splitting counterpart: F = F1 - F2 with F1 = (u^4+1)/4 implicit and
/// F2 = u^2/2 explicit. Arguments are the implicit, the extrapolated, and the
/// trailing theta-average. Factored secants again avoid the equal-argument branch:
/// (F1(a)-F1(b))/(a-b) = 1/4 (a+b)(a^2+b^2), (F2(c)-F2(b))/(c-b) = (c+b)/2.
inline double f_hat_css(double u_impl, double u_expl, double u_old) {
    return 0.25 * (u_impl + u_old) * (u_impl * u_impl + u_old * u_old) - 0.5 * (u_expl + u_old);
}

/// Interfacial parameter and optional source term g(x, t).
struct ModelParams {
    double epsilon = 0.01;
    std::optional<std::function<double(Point, double)>> forcing;
};

}  // namespace dln
