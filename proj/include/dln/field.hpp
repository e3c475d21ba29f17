#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dln {

/// Nodal coefficient vector of a finite element function.
using FieldVector = std::vector<double>;

inline void check_same_size(const FieldVector& a, const FieldVector& b, const char* where) {
    if (a.size() != b.size()) {
        throw std::invalid_argument(std::string(where) + ": size mismatch (" +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
}

inline double dot(const FieldVector& a, const FieldVector& b) {
    check_same_size(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const FieldVector& a) { return std::sqrt(dot(a, a)); }

/// y += c * x
inline void axpy(double c, const FieldVector& x, FieldVector& y) {
    check_same_size(x, y, "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline FieldVector scaled(double c, const FieldVector& x) {
    FieldVector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = c * x[i];
    return y;
}

/// c0*x0 + c1*x1
inline FieldVector lin2(double c0, const FieldVector& x0, double c1, const FieldVector& x1) {
    check_same_size(x0, x1, "lin2");
    FieldVector y(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) y[i] = c0 * x0[i] + c1 * x1[i];
    return y;
}

/// c0*x0 + c1*x1 + c2*x2
inline FieldVector lin3(double c0, const FieldVector& x0, double c1, const FieldVector& x1,
                        double c2, const FieldVector& x2) {
    check_same_size(x0, x1, "lin3");
    check_same_size(x0, x2, "lin3");
    FieldVector y(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) y[i] = c0 * x0[i] + c1 * x1[i] + c2 * x2[i];
    return y;
}

inline bool all_finite(const FieldVector& a) {
    for (double v : a) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

/// Weighted sums usable for both scalars and coefficient vectors; the window
/// combinators in coefficients.hpp dispatch through these.
template <class T>
T weighted2(double c0, const T& x0, double c1, const T& x1) {
    return c0 * x0 + c1 * x1;
}

inline FieldVector weighted2(double c0, const FieldVector& x0, double c1, const FieldVector& x1) {
    return lin2(c0, x0, c1, x1);
}

template <class T>
T weighted3(double c0, const T& x0, double c1, const T& x1, double c2, const T& x2) {
    return c0 * x0 + c1 * x1 + c2 * x2;
}

inline FieldVector weighted3(double c0, const FieldVector& x0, double c1, const FieldVector& x1,
                             double c2, const FieldVector& x2) {
    return lin3(c0, x0, c1, x1, c2, x2);
}

}  // namespace dln
