#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dln/sav_scheme.hpp"
#include "support/dense.hpp"

using namespace dln;

namespace {

std::shared_ptr<const FeSpace> interval_space(int n, BoundaryKind bc = BoundaryKind::Natural) {
    return std::make_shared<const FeSpace>(build_mesh(Domain::interval(-2.0, 4.0), n), bc);
}

FieldVector random_field(int n, std::uint64_t seed, double amp = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> val(-amp, amp);
    FieldVector u(n);
    for (double& v : u) v = val(rng);
    return u;
}

/// Dense solve of the eliminated substep system
/// [M + eps^2 k K + (k/2) B B^T] U = W with B the phi load vector and
/// W = M u_old + ((k/2)(u_old, phi) - k r_old) B.
FieldVector dense_substep_oracle(const FeSpace& space, const FieldVector& u_old, double r_old,
                                 double k_be, const FieldVector& u_star, double epsilon,
                                 double c0) {
    const SparseMatrix m = assemble_mass(space);
    const SparseMatrix k = assemble_stiffness(space);
    const PhiLoad pf = phi_load(space, u_star, c0);
    const FieldVector& b = pf.b;

    const int n = space.dof_count();
    testing::DenseMatrix a = testing::densify(
        SparseMatrix::linear_combination(1.0, m, epsilon * epsilon * k_be, k));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a[i][j] += 0.5 * k_be * b[i] * b[j];
    }
    FieldVector w = m * u_old;
    axpy(0.5 * k_be * dot(u_old, b) - k_be * r_old, b, w);
    return testing::dense_solve(a, w);
}

}  // namespace

TEST_CASE("potential energy values") {
    auto space = interval_space(25);
    const FieldVector ones(space->dof_count(), 1.0);
    const FieldVector zeros(space->dof_count(), 0.0);
    CHECK(potential_energy(*space, ones) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(potential_energy(*space, zeros) == doctest::Approx(1.5).epsilon(1e-12));

    const FeSpace square(build_mesh(Domain::rectangle({0, 0}, {2 * M_PI, 2 * M_PI}), 6),
                         BoundaryKind::Natural);
    const FieldVector z2(square.dof_count(), 0.0);
    CHECK(potential_energy(square, z2) == doctest::Approx(M_PI * M_PI).epsilon(1e-10));
}

TEST_CASE("phi field") {
    auto space = interval_space(20);
    SUBCASE("well minimum with a shift") {
        const FieldVector ones(space->dof_count(), 1.0);
        const PhiField pf = phi_field(*space, ones, 1.0);
        CHECK(pf.denom == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(testing::max_abs(pf.phi) <= 1e-13);
    }
    SUBCASE("zero field, no shift") {
        const FieldVector zeros(space->dof_count(), 0.0);
        const PhiField pf = phi_field(*space, zeros, 0.0);
        CHECK(pf.denom == doctest::Approx(std::sqrt(1.5)).epsilon(1e-12));
        CHECK(testing::max_abs(pf.phi) == 0.0);
    }
    SUBCASE("vanishing energy without shift is rejected") {
        const FieldVector ones(space->dof_count(), 1.0);
        CHECK_THROWS_AS((void)phi_field(*space, ones, 0.0), std::runtime_error);
    }
}

TEST_CASE("initial r matches the continuous definition") {
    auto space = interval_space(18);
    SavStepper stepper(space, 0.7, SavParams{0.01, 0.25, std::nullopt});
    const FieldVector zeros(space->dof_count(), 0.0);
    CHECK(stepper.initial_r(zeros) == doctest::Approx(std::sqrt(1.5 + 0.25)).epsilon(1e-12));
}

TEST_CASE("substep with a vanishing rank-one direction is a heat step") {
    auto space = interval_space(32);
    SavStepper stepper(space, 0.6, SavParams{0.05, 1.0, std::nullopt});
    const FieldVector ones(space->dof_count(), 1.0);
    const FieldVector u_old = random_field(space->dof_count(), 5, 0.5);
    const double k_be = 0.02;

    SavStepDiagnostics diag;
    const auto [u_temp, r_temp] = stepper.be_substep(u_old, 2.5, k_be, ones, nullptr, nullptr,
                                                     &diag);
    CHECK(diag.linear_solves == 2);
    CHECK(r_temp == doctest::Approx(2.5).epsilon(1e-12));

    // pure backward Euler heat step
    const SparseMatrix a = SparseMatrix::linear_combination(
        1.0, stepper.mass(), 0.05 * 0.05 * k_be, stepper.stiffness());
    const SparseCholesky chol(a);
    const FieldVector heat = chol.solve(stepper.mass() * u_old);
    CHECK(testing::max_abs_diff(u_temp, heat) <= 1e-11);
}

TEST_CASE("substep k -> 0 limit returns the old state") {
    auto space = interval_space(24);
    SavStepper stepper(space, 0.6, SavParams{0.01, 0.0, std::nullopt});
    const FieldVector u_old = random_field(space->dof_count(), 6, 0.3);
    const auto [u_temp, r_temp] = stepper.be_substep(u_old, 1.0, 1e-10, u_old);
    CHECK(testing::max_abs_diff(u_temp, u_old) <= 1e-7);
}

TEST_CASE("substep matches the dense rank-one oracle") {
    auto space = interval_space(40);  // 81 dofs
    const double epsilon = 0.02, c0 = 0.0, k_be = 0.045;
    SavStepper stepper(space, 0.7, SavParams{epsilon, c0, std::nullopt});

    const FieldVector u_old = random_field(space->dof_count(), 7, 0.8);
    const FieldVector u_star = random_field(space->dof_count(), 8, 0.8);
    const double r_old = 1.3;

    const auto [u_temp, r_temp] = stepper.be_substep(u_old, r_old, k_be, u_star);
    const FieldVector oracle =
        dense_substep_oracle(*space, u_old, r_old, k_be, u_star, epsilon, c0);

    const double scale = std::max(1.0, testing::max_abs(oracle));
    CHECK(testing::max_abs_diff(u_temp, oracle) <= 1e-10 * scale);

    // r update consistent with the eliminated equation
    const PhiLoad pf = phi_load(*space, u_star, c0);
    const double r_expect = r_old + 0.5 * (dot(oracle, pf.b) - dot(u_old, pf.b));
    CHECK(r_temp == doctest::Approx(r_expect).epsilon(1e-9));
}

TEST_CASE("full step matches a dense monolithic solve of the coupled system") {
    auto space = interval_space(30);  // 61 dofs
    const double epsilon = 0.03, c0 = 0.1, theta = 2.0 / 3.0;
    SavStepper stepper(space, theta, SavParams{epsilon, c0, std::nullopt});

    FieldVector u_prev = random_field(space->dof_count(), 9, 0.6);
    FieldVector u_curr = random_field(space->dof_count(), 10, 0.6);
    const double k_prev = 0.04, k_n = 0.05;
    SavState state{u_prev, u_curr, stepper.initial_r(u_prev), stepper.initial_r(u_curr), 0.0,
                   k_prev};

    const auto next = stepper.step(state, k_n);

    // monolithic assembly of the coupled (U, r) system
    const StepPair steps{k_n, k_prev};
    const DlnCoefficients c = dln_coefficients(theta, steps);
    const FieldVector u_star = lin2(star_weight_prev(c, steps), u_prev,
                                    star_weight_curr(c, steps), u_curr);
    const PhiLoad pf = phi_load(*space, u_star, c0);
    const SparseMatrix m = assemble_mass(*space);
    const SparseMatrix kk = assemble_stiffness(*space);
    const FieldVector& b = pf.b;

    const int n = space->dof_count();
    testing::DenseMatrix a(n + 1, std::vector<double>(n + 1, 0.0));
    std::vector<double> rhs(n + 1, 0.0);
    const auto md = testing::densify(m);
    const auto kd = testing::densify(kk);
    const double eps2 = epsilon * epsilon;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            a[i][j] = c.alpha[2] / c.k_hat * md[i][j] + eps2 * c.beta[2] * kd[i][j];
        }
        a[i][n] = c.beta[2] * b[i];
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            s -= (c.alpha[1] * u_curr[j] + c.alpha[0] * u_prev[j]) / c.k_hat * md[i][j];
            s -= eps2 * (c.beta[1] * u_curr[j] + c.beta[0] * u_prev[j]) * kd[i][j];
        }
        s -= (c.beta[1] * state.r_curr + c.beta[0] * state.r_prev) * b[i];
        rhs[i] = s;
    }
    // r equation: alpha2 r - (1/2)(phi, alpha2 u) = -alpha1 r_n - alpha0 r_{n-1}
    //             + (1/2)(phi, alpha1 u_n + alpha0 u_{n-1})
    for (int j = 0; j < n; ++j) a[n][j] = -0.5 * c.alpha[2] * b[j];
    a[n][n] = c.alpha[2];
    rhs[n] = -c.alpha[1] * state.r_curr - c.alpha[0] * state.r_prev;
    for (int j = 0; j < n; ++j) {
        rhs[n] += 0.5 * (c.alpha[1] * u_curr[j] + c.alpha[0] * u_prev[j]) * b[j];
    }

    const std::vector<double> sol = testing::dense_solve(a, rhs);
    const FieldVector u_ref(sol.begin(), sol.begin() + n);
    const double r_ref = sol[n];

    const double scale = std::max(1.0, testing::max_abs(u_ref));
    CHECK(testing::max_abs_diff(next.u_curr, u_ref) <= 1e-10 * scale);
    CHECK(next.r_curr == doctest::Approx(r_ref).epsilon(1e-9));
}

TEST_CASE("steady state is a fixed point of the sav step") {
    auto space = interval_space(20);
    SavStepper stepper(space, 0.8, SavParams{0.01, 0.5, std::nullopt});
    const FieldVector ones(space->dof_count(), 1.0);
    const double r0 = std::sqrt(0.5);
    SavState state{ones, ones, r0, r0, 0.0, 0.03};
    const auto next = stepper.step(state, 0.05);
    CHECK(testing::max_abs_diff(next.u_curr, ones) <= 1e-12);
    CHECK(next.r_curr == doctest::Approx(r0).epsilon(1e-12));
}

TEST_CASE("sav energy values") {
    auto space = interval_space(22);
    const FieldVector ones(space->dof_count(), 1.0);
    const FieldVector zeros(space->dof_count(), 0.0);

    SavStepper s1(space, 1.0, SavParams{0.01, 0.0, std::nullopt});
    CHECK(s1.energy({ones, ones, 0.0, 0.0, 0.0, 0.1}) == doctest::Approx(0.0));
    // theta = 1 ignores r_prev entirely
    CHECK(s1.energy({ones, ones, 123.0, 0.5, 0.0, 0.1}) == doctest::Approx(0.25));

    const double r = std::sqrt(1.5);
    SavStepper s2(space, 2.0 / 3.0, SavParams{0.01, 0.0, std::nullopt});
    CHECK(s2.energy({zeros, zeros, r, r, 0.0, 0.1}) == doctest::Approx(1.5).epsilon(1e-13));
}

TEST_CASE("dissipation identity on a random-ratio run") {
    auto space = interval_space(150, BoundaryKind::Dirichlet);
    const double eps = 0.01;
    const double speed = 3.0 * eps / std::sqrt(2.0);
    const double width = 2.0 * std::sqrt(2.0) * eps;
    const auto wave = [=](Point p, double t) {
        return 0.5 * (1.0 - std::tanh((p.x - speed * t) / width));
    };
    SavStepper stepper(space, 2.0 / 3.0, SavParams{eps, 0.0, std::nullopt}, wave);

    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> uni(1.0, 5.0);
    std::vector<double> steps(24);
    for (double& k : steps) k = 0.004 * uni(rng);

    FieldVector u0 = interpolate(*space, [&](Point p) { return wave(p, 0.0); });
    FieldVector u1 = interpolate(*space, [&](Point p) { return wave(p, steps[0]); });
    SavState state{u0, u1, stepper.initial_r(u0), stepper.initial_r(u1), 0.0, steps[0]};

    double energy_prev = stepper.energy(state);
    const double scale = std::max(1.0, energy_prev);
    for (std::size_t i = 1; i < steps.size(); ++i) {
        const auto next = stepper.step(state, steps[i]);
        CHECK(std::abs(stepper.dissipation_residual(state, next, steps[i])) <= 1e-9 * scale);
        const double energy = stepper.energy(next);
        CHECK(energy <= energy_prev + 1e-9 * scale);
        energy_prev = energy;
        state = next;
    }
}

TEST_CASE("theta = 1 dissipation reduces to the two-term identity") {
    auto space = interval_space(40);
    SavStepper stepper(space, 1.0, SavParams{0.05, 0.2, std::nullopt});
    FieldVector u0 = random_field(space->dof_count(), 12, 0.4);
    FieldVector u1 = random_field(space->dof_count(), 13, 0.4);
    SavState state{u0, u1, stepper.initial_r(u0), stepper.initial_r(u1), 0.0, 0.05};
    const double k = 0.06;
    const auto next = stepper.step(state, k);
    // gamma vanishes at theta = 1: residual is dE + |du|^2/k + 0 + 0
    const FieldVector du = lin2(1.0, next.u_curr, -1.0, state.u_curr);
    const double manual = stepper.energy(next) - stepper.energy(state) +
                          dot(du, stepper.mass() * du) / k;
    CHECK(stepper.dissipation_residual(state, next, k) == doctest::Approx(manual).epsilon(1e-12));
}
