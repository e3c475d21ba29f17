#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "dln/assembly.hpp"
#include "dln/cholesky.hpp"
#include "dln/coefficients.hpp"
#include "dln/model.hpp"

namespace dln {

/// Two trailing solution snapshots plus their times.
struct SchemeState {
    FieldVector u_prev;
    FieldVector u_curr;
    double t_prev = 0.0;
    double t_curr = 0.0;

    double k_prev() const { return t_curr - t_prev; }
};

struct FixedPointConfig {
    double tol = 1e-8;  ///< L2 norm of the iterate increment
    int max_iter = 100;
};

struct FixedPointError : std::runtime_error {
    FixedPointError(const std::string& msg, FieldVector iterate, int iters, double increment)
        : std::runtime_error(msg),
          last_iterate(std::move(iterate)),
          iterations(iters),
          last_increment(increment) {}
    FieldVector last_iterate;
    int iterations;
    double last_increment;
};

struct StepDiagnostics {
    int iterations = 0;
    double final_increment = 0.0;
};

enum class NonlinearVariant { Secant, ConvexSplit };

/// Boundary data for Dirichlet runs: exact trace evaluated at a given time.
using BoundaryValueFn = std::function<double(Point, double)>;

/// Partially implicit two-step stepper for the Allen-Cahn equation. The new
/// state solves
///   (u_alpha/k_hat, v) + eps^2 (grad u_beta, grad v) + (f~(u_{n+1,theta}, u_{n,theta}), v)
///     = (g(t_beta), v)
/// by fixed-point iteration with the step-constant SPD operator
/// (alpha2/k_hat) M + eps^2 beta2 K kept on the left and everything else
/// lagged. The factorization is cached while the step size repeats.
class ModifiedStepper {
public:
    using State = SchemeState;

    ModifiedStepper(std::shared_ptr<const FeSpace> space, double theta, ModelParams params,
                    FixedPointConfig fp = {}, NonlinearVariant variant = NonlinearVariant::Secant,
                    BoundaryValueFn dirichlet = nullptr);

    /// Advance one step of size k_n. Throws FixedPointError if the iteration
    /// does not converge; the caller may shrink the step and retry.
    State step(const State& state, double k_n, StepDiagnostics* diag = nullptr);

    const FeSpace& space() const { return *space_; }
    std::shared_ptr<const FeSpace> space_ptr() const { return space_; }
    const SparseMatrix& mass() const { return mass_; }
    const SparseMatrix& stiffness() const { return stiffness_; }
    const ModelParams& params() const { return params_; }
    double theta() const { return theta_; }

    /// FE L2 norm sqrt(u^T M u).
    double l2_norm(const FieldVector& u) const;

    /// Discrete model energy at the state's current level:
    /// eps^2 |(grad u_n, grad u_{n-1})|_G^2 + integral F(u_{n,theta}).
    double energy(const State& state) const;

    /// Residual of the per-step energy identity
    ///   E_{n+1} - E_n + k_hat^{-1} |u_alpha|^2 + eps^2 |grad(sum gamma u)|^2 = 0
    /// for one accepted, forcing-free step; bounded by the solver tolerance.
    double dissipation_residual(const State& before, const State& after, double k_n) const;

private:
    std::shared_ptr<const FeSpace> space_;
    double theta_;
    ModelParams params_;
    FixedPointConfig fp_;
    NonlinearVariant variant_;
    BoundaryValueFn dirichlet_;

    SparseMatrix mass_;
    SparseMatrix stiffness_;

    // Factorizations are cached per (k_n, k_prev); a short LRU keeps the step
    // sizes an adaptive run bounces between.
    struct CachedOperator {
        double k_n;
        double k_prev;
        std::unique_ptr<SparseCholesky> chol;
    };
    std::vector<CachedOperator> cache_;

    const SparseCholesky& operator_for(double k_n, double k_prev, const DlnCoefficients& c);
};

/// One implicit-midpoint step of size k0 from a single initial value; the
/// theta = 1 degeneration of the scheme, used to bootstrap runs that have no
/// second starting level.
FieldVector midpoint_bootstrap_step(std::shared_ptr<const FeSpace> space, const ModelParams& params,
                                    const FixedPointConfig& fp, const BoundaryValueFn& dirichlet,
                                    const FieldVector& u0, double t0, double k0);

}  // namespace dln
