#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dln/field.hpp"

namespace dln {

/// Two consecutive time step sizes, current step first.
struct StepPair {
    double k_n;     ///< current step t_{n+1} - t_n
    double k_prev;  ///< previous step t_n - t_{n-1}
};

/// Admissible ratio of consecutive steps. The stability theory assumes bounded
/// ratios and the adaptive controller clamps its factor to [0.2, 1.5]; anything
/// outside this window is a usage error, not a borderline case.
inline constexpr double kMinStepRatio = 1e-3;
inline constexpr double kMaxStepRatio = 1e3;

inline void validate_theta(double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw std::invalid_argument("theta must lie in [0,1], got " + std::to_string(theta));
    }
}

inline void validate_steps(const StepPair& steps) {
    if (!(std::isfinite(steps.k_n) && steps.k_n > 0.0) ||
        !(std::isfinite(steps.k_prev) && steps.k_prev > 0.0)) {
        throw std::invalid_argument("step sizes must be positive and finite");
    }
    const double ratio = steps.k_n / steps.k_prev;
    if (ratio < kMinStepRatio || ratio > kMaxStepRatio) {
        throw std::invalid_argument("step ratio " + std::to_string(ratio) +
                                    " outside admissible range [1e-3, 1e3]");
    }
}

/// Normalized difference of consecutive step sizes,
/// eps_n = (k_n - k_{n-1}) / (k_n + k_{n-1}), always in (-1, 1).
inline double step_variability(const StepPair& steps) {
    validate_steps(steps);
    return (steps.k_n - steps.k_prev) / (steps.k_n + steps.k_prev);
}

/// Per-step coefficient bundle of the two-step theta family.
///
/// Index convention is the time level offset: coefficient [l] multiplies the
/// value at t_{n-1+l}, so [2] belongs to the new unknown. Invariants:
/// sum(alpha) = 0, sum(beta) = 1, k_hat = alpha2*k_n - alpha0*k_{n-1} > 0, and
/// the gamma values satisfy gamma2 = -(1-eps)/2*gamma1, gamma0 = -(1+eps)/2*gamma1.
struct DlnCoefficients {
    std::array<double, 3> alpha;
    std::array<double, 3> beta;
    std::array<double, 3> gamma;
    double eps_n;  ///< step variability
    double k_hat;  ///< average step multiplying the right-hand side
};

/// Evaluate the theta-scheme coefficients for one step pair.
///
/// alpha = [ (theta-1)/2, -theta, (theta+1)/2 ], and with
/// D = (1+eps*theta)^2 the beta values are used in the factored form
///   beta2 = (1+theta)/4 * (1 + (1-theta)(1+eps^2 theta)/D),
///   beta1 = theta (theta + 2 eps + eps^2 theta) / (2D),
///   beta0 = (1-theta)/4 * (1 + (1+theta)(1-eps^2 theta)/D),
/// which is free of the cancellation the expanded form suffers near theta = 1.
/// On uniform grids beta reduces to 1/4*[2-theta-theta^2, 2theta^2, 2+theta-theta^2].
inline DlnCoefficients dln_coefficients(double theta, const StepPair& steps) {
    validate_theta(theta);
    const double eps = step_variability(steps);

    DlnCoefficients c{};
    c.eps_n = eps;
    c.alpha = {0.5 * (theta - 1.0), -theta, 0.5 * (theta + 1.0)};

    if (theta == 1.0) {
        c.beta = {0.0, 0.5, 0.5};  // midpoint rule, exactly
    } else {
        const double denom = (1.0 + eps * theta) * (1.0 + eps * theta);
        c.beta = {0.25 * (1.0 - theta) * (1.0 + (1.0 + theta) * (1.0 - eps * eps * theta) / denom),
                  0.5 * theta * (theta + 2.0 * eps + eps * eps * theta) / denom,
                  0.25 * (1.0 + theta) * (1.0 + (1.0 - theta) * (1.0 + eps * eps * theta) / denom)};
    }

    // theta*(1-theta^2) is exactly 0 at theta in {0,1}; max() absorbs the
    // -1e-17 style values rounding can produce in between.
    const double root = std::sqrt(std::max(theta * (1.0 - theta * theta), 0.0));
    const double g1 = -root / (std::sqrt(2.0) * (1.0 + eps * theta));
    c.gamma = {-0.5 * (1.0 + eps) * g1, g1, -0.5 * (1.0 - eps) * g1};

    c.k_hat = c.alpha[2] * steps.k_n - c.alpha[0] * steps.k_prev;
    return c;
}

/// Coefficients that express one theta-family step as
/// pre-process -> backward Euler substep -> post-process.
///
/// Pre-process mixes the two trailing states (a1, a0) and rescales the step
/// (k_be = b * k_hat); post-process recovers the new state via (c2, c1, c0).
struct RefactorCoefficients {
    double a1, a0;
    double b;
    double c2, c1, c0;
};

inline RefactorCoefficients refactor_coefficients(const DlnCoefficients& c) {
    const double beta2 = c.beta[2];
    if (beta2 == 0.0) {
        throw std::domain_error("degenerate coefficients: beta2 = 0");
    }
    RefactorCoefficients r{};
    r.a1 = c.beta[1] - c.alpha[1] * beta2 / c.alpha[2];
    r.a0 = c.beta[0] - c.alpha[0] * beta2 / c.alpha[2];
    r.b = beta2 / c.alpha[2];
    r.c2 = 1.0 / beta2;
    r.c1 = -c.beta[1] / beta2;
    r.c0 = -c.beta[0] / beta2;
    return r;
}

enum class CombineKind {
    Alpha,     ///< sum alpha_l * z_{n-1+l}
    Beta,      ///< sum beta_l * z_{n-1+l}
    ThetaAvg,  ///< (1+theta)/2 * z_n + (1-theta)/2 * z_{n-1}
    Star,      ///< explicit second-order combination of z_n, z_{n-1}
};

/// Window-combination operators over an ordered triple (z_{n-1}, z_n, z_{n+1}).
/// ThetaAvg and Star ignore z_{n+1}. Works for any linear space with
/// scalar*value and value+value; theta is only needed by ThetaAvg.
template <class T>
T combine(const std::array<T, 3>& window, CombineKind kind, const DlnCoefficients& c,
          const StepPair& steps, double theta = -1.0) {
    switch (kind) {
        case CombineKind::Alpha:
            return weighted3(c.alpha[0], window[0], c.alpha[1], window[1], c.alpha[2], window[2]);
        case CombineKind::Beta:
            return weighted3(c.beta[0], window[0], c.beta[1], window[1], c.beta[2], window[2]);
        case CombineKind::ThetaAvg: {
            validate_theta(theta);
            return weighted2(0.5 * (1.0 - theta), window[0], 0.5 * (1.0 + theta), window[1]);
        }
        case CombineKind::Star: {
            const double rho = steps.k_n / steps.k_prev;
            return weighted2(-c.beta[2] * rho + c.beta[0], window[0],
                             c.beta[2] * (1.0 + rho) + c.beta[1], window[1]);
        }
    }
    throw std::invalid_argument("unknown combine kind");
}

/// Scalar combination helpers used when the window lives in coefficient space.
inline double star_weight_curr(const DlnCoefficients& c, const StepPair& steps) {
    const double rho = steps.k_n / steps.k_prev;
    return c.beta[2] * (1.0 + rho) + c.beta[1];
}
inline double star_weight_prev(const DlnCoefficients& c, const StepPair& steps) {
    const double rho = steps.k_n / steps.k_prev;
    return -c.beta[2] * rho + c.beta[0];
}

/// The combined evaluation time t_{n,beta} = sum beta_l * t_{n-1+l}.
inline double t_beta(const std::array<double, 3>& times, const DlnCoefficients& c) {
    if (!(times[0] < times[1] && times[1] < times[2])) {
        throw std::invalid_argument("times must be strictly increasing");
    }
    return c.beta[0] * times[0] + c.beta[1] * times[1] + c.beta[2] * times[2];
}

/// Squared G-norm of a state pair: 1/4(1+theta)|u_new|^2 + 1/4(1-theta)|u_old|^2.
/// `inner` supplies the inner product of the underlying space.
template <class Vec, class Inner>
double g_norm_sq(const Vec& u_new, const Vec& u_old, double theta, Inner&& inner) {
    validate_theta(theta);
    return 0.25 * (1.0 + theta) * inner(u_new, u_new) + 0.25 * (1.0 - theta) * inner(u_old, u_old);
}

/// Left-minus-right of the G-stability identity
///   (y_{n,alpha}, y_{n,beta}) = |(y_{n+1},y_n)|_G^2 - |(y_n,y_{n-1})|_G^2 + |sum gamma_l y|^2
/// evaluated through the Gram matrix of the window; zero up to rounding.
template <class Vec, class Inner>
double g_identity_residual(const std::array<Vec, 3>& window, double theta, const StepPair& steps,
                           Inner&& inner) {
    const DlnCoefficients c = dln_coefficients(theta, steps);
    double gram[3][3];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j <= i; ++j) {
            gram[i][j] = inner(window[i], window[j]);
            gram[j][i] = gram[i][j];
        }
    }
    double lhs = 0.0;
    double gamma_term = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            lhs += c.alpha[i] * c.beta[j] * gram[i][j];
            gamma_term += c.gamma[i] * c.gamma[j] * gram[i][j];
        }
    }
    const double g_new = 0.25 * (1.0 + theta) * gram[2][2] + 0.25 * (1.0 - theta) * gram[1][1];
    const double g_old = 0.25 * (1.0 + theta) * gram[1][1] + 0.25 * (1.0 - theta) * gram[0][0];
    return lhs - (g_new - g_old + gamma_term);
}

}  // namespace dln
