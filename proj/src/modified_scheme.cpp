#include "dln/modified_scheme.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dln {

ModifiedStepper::ModifiedStepper(std::shared_ptr<const FeSpace> space, double theta,
                                 ModelParams params, FixedPointConfig fp, NonlinearVariant variant,
                                 BoundaryValueFn dirichlet)
    : space_(std::move(space)),
      theta_(theta),
      params_(std::move(params)),
      fp_(fp),
      variant_(variant),
      dirichlet_(std::move(dirichlet)) {
    validate_theta(theta_);
    if (space_->boundary() == BoundaryKind::Dirichlet && !dirichlet_) {
        throw std::invalid_argument("ModifiedStepper: Dirichlet space needs boundary data");
    }
    mass_ = assemble_mass(*space_);
    stiffness_ = assemble_stiffness(*space_);
}

double ModifiedStepper::l2_norm(const FieldVector& u) const {
    return std::sqrt(std::max(0.0, dot(u, mass_ * u)));
}

const SparseCholesky& ModifiedStepper::operator_for(double k_n, double k_prev,
                                                    const DlnCoefficients& c) {
    for (std::size_t i = 0; i < cache_.size(); ++i) {
        if (cache_[i].k_n == k_n && cache_[i].k_prev == k_prev) {
            if (i > 0) std::rotate(cache_.begin(), cache_.begin() + i, cache_.begin() + i + 1);
            return *cache_.front().chol;
        }
    }
    SparseMatrix a = SparseMatrix::linear_combination(c.alpha[2] / c.k_hat, mass_,
                                                      params_.epsilon * params_.epsilon * c.beta[2],
                                                      stiffness_);
    if (space_->boundary() == BoundaryKind::Dirichlet) {
        a = a.with_dirichlet(space_->boundary_dofs());
    }
    cache_.insert(cache_.begin(), CachedOperator{k_n, k_prev, std::make_unique<SparseCholesky>(a)});
    if (cache_.size() > 6) cache_.pop_back();
    return *cache_.front().chol;
}

ModifiedStepper::State ModifiedStepper::step(const State& state, double k_n,
                                             StepDiagnostics* diag) {
    const double k_prev = state.k_prev();
    const StepPair steps{k_n, k_prev};
    const DlnCoefficients c = dln_coefficients(theta_, steps);
    const double eps2 = params_.epsilon * params_.epsilon;
    const double t_next = state.t_curr + k_n;

    const SparseCholesky& chol = operator_for(k_n, k_prev, c);

    // Step-constant part of the right-hand side.
    FieldVector rhs_fixed(space_->dof_count(), 0.0);
    {
        const FieldVector mu = mass_ * lin2(c.alpha[1] / c.k_hat, state.u_curr,
                                            c.alpha[0] / c.k_hat, state.u_prev);
        const FieldVector ku = stiffness_ * lin2(eps2 * c.beta[1], state.u_curr,
                                                 eps2 * c.beta[0], state.u_prev);
        for (int i = 0; i < space_->dof_count(); ++i) rhs_fixed[i] = -mu[i] - ku[i];
        if (params_.forcing) {
            const double tb = t_beta({state.t_prev, state.t_curr, t_next}, c);
            const auto& g = *params_.forcing;
            axpy(1.0, assemble_load(*space_, [&](Point p) { return g(p, tb); }), rhs_fixed);
        }
    }

    const FieldVector u_old_theta =
        lin2(0.5 * (1.0 + theta_), state.u_curr, 0.5 * (1.0 - theta_), state.u_prev);
    // Explicit extrapolant feeding the convex-splitting variant.
    FieldVector u_expl_theta;
    if (variant_ == NonlinearVariant::ConvexSplit) {
        const double rho = k_n / k_prev;
        const FieldVector u_star = lin2(1.0 + rho, state.u_curr, -rho, state.u_prev);
        u_expl_theta = lin2(0.5 * (1.0 + theta_), u_star, 0.5 * (1.0 - theta_), state.u_curr);
    }

    // Dirichlet data is pinned at t_{n+1}, so the boundary-column fold of the
    // unconstrained operator is step-constant too.
    FieldVector dirichlet_shift;
    FieldVector dirichlet_values;
    if (space_->boundary() == BoundaryKind::Dirichlet) {
        const auto& bdy = space_->boundary_dofs();
        dirichlet_values.resize(bdy.size());
        for (std::size_t i = 0; i < bdy.size(); ++i) {
            dirichlet_values[i] = dirichlet_(space_->dof_point(bdy[i]), t_next);
        }
        dirichlet_shift.assign(space_->dof_count(), 0.0);
        const SparseMatrix a_unc = SparseMatrix::linear_combination(
            c.alpha[2] / c.k_hat, mass_, eps2 * c.beta[2], stiffness_);
        a_unc.dirichlet_rhs(dirichlet_shift, bdy, dirichlet_values);
    }

    // Initial guess: linear extrapolation in time.
    FieldVector u_next = lin2(1.0 + k_n / k_prev, state.u_curr, -k_n / k_prev, state.u_prev);

    int iter = 0;
    double increment = 0.0;
    for (;;) {
        if (iter >= fp_.max_iter) {
            throw FixedPointError("fixed-point iteration failed to reach " +
                                      std::to_string(fp_.tol) + " within " +
                                      std::to_string(fp_.max_iter) + " iterations",
                                  std::move(u_next), iter, increment);
        }
        const FieldVector u_new_theta =
            lin2(0.5 * (1.0 + theta_), u_next, 0.5 * (1.0 - theta_), state.u_curr);

        FieldVector rhs = rhs_fixed;
        if (variant_ == NonlinearVariant::Secant) {
            axpy(-1.0, assemble_load(*space_, BinaryFn(f_tilde), u_new_theta, u_old_theta), rhs);
        } else {
            // F1 secant (implicit) minus F2 secant (explicit), assembled as
            // two binary loads.
            axpy(-1.0,
                 assemble_load(
                     *space_,
                     [](double a, double b) { return 0.25 * (a + b) * (a * a + b * b); },
                     u_new_theta, u_old_theta),
                 rhs);
            axpy(1.0,
                 assemble_load(
                     *space_, [](double c2, double b) { return 0.5 * (c2 + b); }, u_expl_theta,
                     u_old_theta),
                 rhs);
        }
        if (!dirichlet_shift.empty()) {
            axpy(1.0, dirichlet_shift, rhs);
            const auto& bdy = space_->boundary_dofs();
            for (std::size_t i = 0; i < bdy.size(); ++i) rhs[bdy[i]] = dirichlet_values[i];
        }

        FieldVector u_candidate = chol.solve(rhs);
        increment = l2_norm(lin2(1.0, u_candidate, -1.0, u_next));
        u_next = std::move(u_candidate);
        ++iter;
        if (increment <= fp_.tol) break;
    }

    if (diag) {
        diag->iterations = iter;
        diag->final_increment = increment;
    }
    return State{state.u_curr, std::move(u_next), state.t_curr, t_next};
}

double ModifiedStepper::energy(const State& state) const {
    const double eps2 = params_.epsilon * params_.epsilon;
    const double grad_curr = dot(state.u_curr, stiffness_ * state.u_curr);
    const double grad_prev = dot(state.u_prev, stiffness_ * state.u_prev);
    const double g_term =
        0.25 * (1.0 + theta_) * grad_curr + 0.25 * (1.0 - theta_) * grad_prev;
    const FieldVector u_theta =
        lin2(0.5 * (1.0 + theta_), state.u_curr, 0.5 * (1.0 - theta_), state.u_prev);
    return eps2 * g_term + integrate(*space_, potential, u_theta);
}

double ModifiedStepper::dissipation_residual(const State& before, const State& after,
                                             double k_n) const {
    const DlnCoefficients c = dln_coefficients(theta_, {k_n, before.k_prev()});
    const double eps2 = params_.epsilon * params_.epsilon;
    const FieldVector u_alpha =
        lin3(c.alpha[0], before.u_prev, c.alpha[1], before.u_curr, c.alpha[2], after.u_curr);
    const FieldVector u_gamma =
        lin3(c.gamma[0], before.u_prev, c.gamma[1], before.u_curr, c.gamma[2], after.u_curr);
    const double pump = dot(u_alpha, mass_ * u_alpha) / c.k_hat;
    const double gamma_term = eps2 * dot(u_gamma, stiffness_ * u_gamma);
    return energy(after) - energy(before) + pump + gamma_term;
}

FieldVector midpoint_bootstrap_step(std::shared_ptr<const FeSpace> space, const ModelParams& params,
                                    const FixedPointConfig& fp, const BoundaryValueFn& dirichlet,
                                    const FieldVector& u0, double t0, double k0) {
    // At theta = 1 the previous level carries exactly zero weight, so a dummy
    // copy of u0 serves as the missing second level.
    ModifiedStepper stepper(std::move(space), 1.0, params, fp, NonlinearVariant::Secant, dirichlet);
    SchemeState seed{u0, u0, t0 - k0, t0};
    return stepper.step(seed, k0).u_curr;
}

}  // namespace dln
