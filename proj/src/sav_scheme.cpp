#include "dln/sav_scheme.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dln {

double potential_energy(const FeSpace& space, const FieldVector& u) {
    return integrate(space, potential, u);
}

namespace {
double shifted_energy(const FeSpace& space, const FieldVector& u_star, double c0) {
    const double shifted = potential_energy(space, u_star) + c0;
    if (shifted < 1e-14) {
        throw std::runtime_error(
            "sav: E(u*) + c0 = " + std::to_string(shifted) +
            " is numerically zero; rerun with a positive energy shift c0");
    }
    return shifted;
}
}  // namespace

PhiField phi_field(const FeSpace& space, const FieldVector& u_star, double c0) {
    PhiField out;
    out.denom = std::sqrt(shifted_energy(space, u_star, c0));
    out.phi.resize(u_star.size());
    for (std::size_t i = 0; i < u_star.size(); ++i) {
        out.phi[i] = potential_derivative(u_star[i]) / out.denom;
    }
    return out;
}

PhiLoad phi_load(const FeSpace& space, const FieldVector& u_star, double c0) {
    PhiLoad out;
    out.denom = std::sqrt(shifted_energy(space, u_star, c0));
    const double denom = out.denom;
    out.b = assemble_load(
        space, [denom](double v) { return potential_derivative(v) / denom; }, u_star);
    return out;
}

SavStepper::SavStepper(std::shared_ptr<const FeSpace> space, double theta, SavParams params,
                       BoundaryValueFn dirichlet)
    : space_(std::move(space)),
      theta_(theta),
      params_(std::move(params)),
      dirichlet_(std::move(dirichlet)) {
    validate_theta(theta_);
    if (params_.c0 < 0.0) throw std::invalid_argument("SavStepper: c0 must be nonnegative");
    if (space_->boundary() == BoundaryKind::Dirichlet && !dirichlet_) {
        throw std::invalid_argument("SavStepper: Dirichlet space needs boundary data");
    }
    mass_ = assemble_mass(*space_);
    stiffness_ = assemble_stiffness(*space_);
}

double SavStepper::l2_norm(const FieldVector& u) const {
    return std::sqrt(std::max(0.0, dot(u, mass_ * u)));
}

double SavStepper::initial_r(const FieldVector& u) const {
    return std::sqrt(potential_energy(*space_, u) + params_.c0);
}

const SavStepper::CachedOperator& SavStepper::operator_for(double k_be) {
    for (std::size_t i = 0; i < cache_.size(); ++i) {
        if (cache_[i].k_be == k_be) {
            if (i > 0) std::rotate(cache_.begin(), cache_.begin() + i, cache_.begin() + i + 1);
            return cache_.front();
        }
    }
    const double eps2 = params_.epsilon * params_.epsilon;
    SparseMatrix a = SparseMatrix::linear_combination(1.0, mass_, eps2 * k_be, stiffness_);
    SparseMatrix a_solve = a;
    if (space_->boundary() == BoundaryKind::Dirichlet) {
        a_solve = a.with_dirichlet(space_->boundary_dofs());
    }
    cache_.insert(cache_.begin(),
                  CachedOperator{k_be, std::move(a), std::make_unique<SparseCholesky>(a_solve)});
    if (cache_.size() > 6) cache_.pop_back();
    return cache_.front();
}

std::pair<FieldVector, double> SavStepper::be_substep(const FieldVector& u_old, double r_old,
                                                      double k_be, const FieldVector& u_star,
                                                      const FieldVector* boundary_vals,
                                                      const FieldVector* extra_load,
                                                      SavStepDiagnostics* diag) {
    if (!(k_be > 0.0)) throw std::invalid_argument("be_substep: k_be must be positive");
    const PhiLoad pf = phi_load(*space_, u_star, params_.c0);
    const CachedOperator& op = operator_for(k_be);
    const bool dirichlet = space_->boundary() == BoundaryKind::Dirichlet;
    const auto& bdy = space_->boundary_dofs();

    const FieldVector& b_phi = pf.b;

    // z1 = A^{-1} phi with homogeneous trace.
    FieldVector rhs1 = b_phi;
    if (dirichlet) {
        const FieldVector zeros(bdy.size(), 0.0);
        op.unconstrained.dirichlet_rhs(rhs1, bdy, zeros);
    }
    const FieldVector z1 = op.chol->solve(rhs1);

    // w = u_old + [(k/2)(u_old, phi) - k r_old] phi enters only through its
    // load vector: M u_old plus multiples of the phi load.
    const double u_old_phi = dot(u_old, b_phi);
    FieldVector rhs2 = mass_ * u_old;
    axpy(0.5 * k_be * u_old_phi - k_be * r_old, b_phi, rhs2);
    if (extra_load) axpy(k_be, *extra_load, rhs2);
    if (dirichlet) {
        if (!boundary_vals) throw std::invalid_argument("be_substep: boundary values required");
        op.unconstrained.dirichlet_rhs(rhs2, bdy, *boundary_vals);
    }
    const FieldVector z2 = op.chol->solve(rhs2);

    // rank-one correction scalar s = (u_temp, phi)
    const double z1_phi = dot(z1, b_phi);
    const double denom = 1.0 + 0.5 * k_be * z1_phi;
    if (!(denom > 0.0)) {
        throw std::runtime_error("be_substep: rank-one denominator " + std::to_string(denom) +
                                 " is not positive; (A^-1 phi, phi) should be nonnegative");
    }
    const double s = dot(z2, b_phi) / denom;

    FieldVector u_temp = z2;
    axpy(-0.5 * k_be * s, z1, u_temp);

    const double r_temp = r_old + 0.5 * (dot(u_temp, b_phi) - u_old_phi);

    if (diag) {
        diag->linear_solves = 2;
        diag->denom = pf.denom;
    }
    return {std::move(u_temp), r_temp};
}

SavStepper::State SavStepper::step(const State& state, double k_n, SavStepDiagnostics* diag) {
    const double k_prev = state.k_prev();
    const StepPair steps{k_n, k_prev};
    const DlnCoefficients c = dln_coefficients(theta_, steps);
    const RefactorCoefficients rc = refactor_coefficients(c);
    const double k_be = rc.b * c.k_hat;
    const double t_next = state.t_curr + k_n;

    // explicit second-order point value
    const FieldVector u_star = lin2(star_weight_prev(c, steps), state.u_prev,
                                    star_weight_curr(c, steps), state.u_curr);

    // pre-process
    const FieldVector u_old = lin2(rc.a0, state.u_prev, rc.a1, state.u_curr);
    const double r_old = rc.a1 * state.r_curr + rc.a0 * state.r_prev;

    // substep boundary trace is the beta combination of the nodal traces
    FieldVector boundary_vals;
    const FieldVector* bv = nullptr;
    if (space_->boundary() == BoundaryKind::Dirichlet) {
        const auto& bdy = space_->boundary_dofs();
        boundary_vals.resize(bdy.size());
        for (std::size_t i = 0; i < bdy.size(); ++i) {
            const Point p = space_->dof_point(bdy[i]);
            boundary_vals[i] = c.beta[2] * dirichlet_(p, t_next) +
                               c.beta[1] * dirichlet_(p, state.t_curr) +
                               c.beta[0] * dirichlet_(p, state.t_prev);
        }
        bv = &boundary_vals;
    }

    FieldVector forcing_load;
    const FieldVector* extra = nullptr;
    if (params_.forcing) {
        const double tb = t_beta({state.t_prev, state.t_curr, t_next}, c);
        const auto& g = *params_.forcing;
        forcing_load = assemble_load(*space_, [&](Point p) { return g(p, tb); });
        extra = &forcing_load;
    }

    auto [u_temp, r_temp] = be_substep(u_old, r_old, k_be, u_star, bv, extra, diag);

    // post-process
    FieldVector u_next = lin3(rc.c0, state.u_prev, rc.c1, state.u_curr, rc.c2, u_temp);
    const double r_next = rc.c2 * r_temp + rc.c1 * state.r_curr + rc.c0 * state.r_prev;

    return State{state.u_curr, std::move(u_next), state.r_curr, r_next, state.t_curr, t_next};
}

double SavStepper::energy(const State& state) const {
    const double eps2 = params_.epsilon * params_.epsilon;
    const double grad_curr = dot(state.u_curr, stiffness_ * state.u_curr);
    const double grad_prev = dot(state.u_prev, stiffness_ * state.u_prev);
    const double g_term = 0.25 * (1.0 + theta_) * grad_curr + 0.25 * (1.0 - theta_) * grad_prev;
    return eps2 * g_term + 0.5 * (1.0 + theta_) * state.r_curr * state.r_curr +
           0.5 * (1.0 - theta_) * state.r_prev * state.r_prev;
}

double SavStepper::dissipation_residual(const State& before, const State& after,
                                        double k_n) const {
    const DlnCoefficients c = dln_coefficients(theta_, {k_n, before.k_prev()});
    const double eps2 = params_.epsilon * params_.epsilon;
    const FieldVector u_alpha =
        lin3(c.alpha[0], before.u_prev, c.alpha[1], before.u_curr, c.alpha[2], after.u_curr);
    const FieldVector u_gamma =
        lin3(c.gamma[0], before.u_prev, c.gamma[1], before.u_curr, c.gamma[2], after.u_curr);
    const double r_gamma =
        c.gamma[0] * before.r_prev + c.gamma[1] * before.r_curr + c.gamma[2] * after.r_curr;
    const double pump = dot(u_alpha, mass_ * u_alpha) / c.k_hat;
    const double gamma_term = eps2 * dot(u_gamma, stiffness_ * u_gamma);
    return energy(after) - energy(before) + pump + gamma_term + 2.0 * r_gamma * r_gamma;
}

}  // namespace dln
