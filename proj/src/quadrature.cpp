#include "dln/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace dln {

namespace {

// Legendre P_m and its derivative at x via the three-term recurrence.
void legendre_eval(int m, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= m; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
    }
    p = p1;
    dp = m * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

void gauss_legendre_01(int m, std::vector<double>& nodes, std::vector<double>& weights) {
    if (m < 1) throw std::invalid_argument("gauss_legendre_01: need m >= 1");
    nodes.assign(m, 0.0);
    weights.assign(m, 0.0);
    for (int i = 0; i < (m + 1) / 2; ++i) {
        // Chebyshev-like initial guess, then Newton to machine precision.
        double x = std::cos(M_PI * (4.0 * i + 3.0) / (4.0 * m + 2.0));
        double p = 0.0, dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            legendre_eval(m, x, p, dp);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        legendre_eval(m, x, p, dp);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1,1] -> [0,1]
        nodes[m - 1 - i] = 0.5 * (1.0 + x);
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 0.5 * w;
        weights[m - 1 - i] = 0.5 * w;
    }
    if (m % 2 == 1) {
        nodes[m / 2] = 0.5;
        double p, dp;
        legendre_eval(m, 0.0, p, dp);
        weights[m / 2] = 1.0 / (dp * dp);
    }
    return;
}

QuadratureRule interval_rule(int degree) {
    const int m = degree / 2 + 1;  // 2m-1 >= degree
    std::vector<double> x, w;
    gauss_legendre_01(m, x, w);
    QuadratureRule rule;
    rule.degree = 2 * m - 1;
    rule.points.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) rule.points.push_back({x[i], 0.0, w[i]});
    return rule;
}

QuadratureRule triangle_rule(int degree) {
    // Duffy map (xi, eta) in [0,1]^2 -> (xi*(1-eta), eta) with Jacobian (1-eta).
    // A degree-d polynomial pulls back to degree d in xi and d+1 in eta.
    const int mx = degree / 2 + 1;
    const int my = (degree + 1) / 2 + 1;
    std::vector<double> xs, wx, ys, wy;
    gauss_legendre_01(mx, xs, wx);
    gauss_legendre_01(my, ys, wy);

    QuadratureRule rule;
    rule.degree = degree;
    rule.points.reserve(xs.size() * ys.size());
    for (std::size_t j = 0; j < ys.size(); ++j) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double eta = ys[j];
            const double xi = xs[i];
            rule.points.push_back({xi * (1.0 - eta), eta, wx[i] * wy[j] * (1.0 - eta)});
        }
    }
    return rule;
}

}  // namespace dln
