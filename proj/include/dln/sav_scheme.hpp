#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "dln/assembly.hpp"
#include "dln/cholesky.hpp"
#include "dln/coefficients.hpp"
#include "dln/model.hpp"
#include "dln/modified_scheme.hpp"

namespace dln {

/// Two trailing solutions plus the auxiliary scalar pair.
struct SavState {
    FieldVector u_prev;
    FieldVector u_curr;
    double r_prev = 0.0;
    double r_curr = 0.0;
    double t_prev = 0.0;
    double t_curr = 0.0;

    double k_prev() const { return t_curr - t_prev; }
};

struct SavParams {
    double epsilon = 0.01;
    double c0 = 0.0;  ///< energy shift inside r = sqrt(E + c0)
    std::optional<std::function<double(Point, double)>> forcing;
};

struct SavStepDiagnostics {
    int linear_solves = 0;  ///< always 2: one per Helmholtz solve
    double denom = 0.0;     ///< sqrt(E(u_star) + c0) used in this step
};

/// Potential energy E(u) = integral of F(u).
double potential_energy(const FeSpace& space, const FieldVector& u);

struct PhiField {
    FieldVector phi;  ///< P2 interpolant of f(u_star)/denom (diagnostic view)
    double denom;     ///< sqrt(E(u_star) + c0)
};

PhiField phi_field(const FeSpace& space, const FieldVector& u_star, double c0);

struct PhiLoad {
    FieldVector b;  ///< load vector (f(u_star)/denom, psi_i), quadrature-exact
    double denom;   ///< sqrt(E(u_star) + c0)
};

/// The rank-one direction enters the algebra only through inner products with
/// test and trial functions, so the stepper carries it as this load vector,
/// integrated at quadrature points rather than interpolated.
PhiLoad phi_load(const FeSpace& space, const FieldVector& u_star, double c0);

/// Linear stepper for the scalar-auxiliary-variable form of the Allen-Cahn
/// flow. One step is a pre-process mixing of the trailing pair, one backward
/// Euler substep solved through two Helmholtz solves plus a rank-one
/// correction, and a post-process mixing; no nonlinear iteration anywhere.
class SavStepper {
public:
    using State = SavState;

    SavStepper(std::shared_ptr<const FeSpace> space, double theta, SavParams params,
               BoundaryValueFn dirichlet = nullptr);

    State step(const State& state, double k_n, SavStepDiagnostics* diag = nullptr);

    /// The backward Euler substep: from (u_old, r_old) over k_be with the
    /// rank-one direction built at u_star. `boundary_time_value` supplies the
    /// Dirichlet trace for the substep unknown (already beta-combined by the
    /// caller); `extra_load` is an optional pre-assembled forcing load.
    std::pair<FieldVector, double> be_substep(const FieldVector& u_old, double r_old, double k_be,
                                              const FieldVector& u_star,
                                              const FieldVector* boundary_vals = nullptr,
                                              const FieldVector* extra_load = nullptr,
                                              SavStepDiagnostics* diag = nullptr);

    const FeSpace& space() const { return *space_; }
    std::shared_ptr<const FeSpace> space_ptr() const { return space_; }
    const SparseMatrix& mass() const { return mass_; }
    const SparseMatrix& stiffness() const { return stiffness_; }
    const SavParams& params() const { return params_; }
    double theta() const { return theta_; }

    double l2_norm(const FieldVector& u) const;

    /// r consistent with its continuous definition at the given field.
    double initial_r(const FieldVector& u) const;

    /// eps^2 |(grad u_n, grad u_{n-1})|_G^2 + (1+theta)/2 r_n^2 + (1-theta)/2 r_{n-1}^2.
    double energy(const State& state) const;

    /// Residual of k_hat^{-1}|u_alpha|^2 + dE + eps^2|grad(sum gamma u)|^2
    ///   + 2 (sum gamma_l r_l)^2 = 0 over one forcing-free step.
    double dissipation_residual(const State& before, const State& after, double k_n) const;

private:
    std::shared_ptr<const FeSpace> space_;
    double theta_;
    SavParams params_;
    BoundaryValueFn dirichlet_;

    SparseMatrix mass_;
    SparseMatrix stiffness_;

    // LRU of factorizations keyed on the substep size.
    struct CachedOperator {
        double k_be;
        SparseMatrix unconstrained;
        std::unique_ptr<SparseCholesky> chol;
    };
    std::vector<CachedOperator> cache_;

    const CachedOperator& operator_for(double k_be);
};

}  // namespace dln
