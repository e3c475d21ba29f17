#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dln/modified_scheme.hpp"
#include "support/dense.hpp"

using namespace dln;

namespace {

std::shared_ptr<const FeSpace> interval_space(int n, BoundaryKind bc = BoundaryKind::Natural) {
    return std::make_shared<const FeSpace>(build_mesh(Domain::interval(-2.0, 4.0), n), bc);
}

// Independent implicit-midpoint stepper mirroring the fixed-point path:
// (u_next - u_n)/k in mass form, averaged gradient, secant nonlinearity.
FieldVector midpoint_reference_step(const FeSpace& space, const FieldVector& u_prev,
                                    const FieldVector& u_curr, double k, double k_prev,
                                    double epsilon, const FixedPointConfig& fp) {
    const SparseMatrix m = assemble_mass(space);
    const SparseMatrix kk = assemble_stiffness(space);
    const double eps2 = epsilon * epsilon;
    const SparseMatrix a = SparseMatrix::linear_combination(1.0 / k, m, eps2 * 0.5, kk);
    const SparseCholesky chol(a);

    FieldVector rhs_fixed = m * lin2(1.0 / k, u_curr, 0.0, u_prev);
    axpy(-1.0, kk * lin2(eps2 * 0.5, u_curr, 0.0, u_prev), rhs_fixed);

    FieldVector u_next = lin2(1.0 + k / k_prev, u_curr, -k / k_prev, u_prev);
    for (int iter = 0; iter < fp.max_iter; ++iter) {
        FieldVector rhs = rhs_fixed;
        axpy(-1.0, assemble_load(space, BinaryFn(f_tilde), u_next, u_curr), rhs);
        FieldVector candidate = chol.solve(rhs);
        const FieldVector delta = lin2(1.0, candidate, -1.0, u_next);
        const double inc = std::sqrt(dot(delta, m * delta));
        u_next = std::move(candidate);
        if (inc <= fp.tol) break;
    }
    return u_next;
}

std::vector<double> ratio_bounded_steps(double k_ref, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(1.0, 5.0);
    std::vector<double> steps(count);
    for (double& k : steps) k = k_ref * uni(rng);  // iid in [k, 5k]: ratios within [0.2, 5]
    return steps;
}

}  // namespace

TEST_CASE("secant quotient values") {
    CHECK(f_tilde(2.0, 2.0) == doctest::Approx(6.0));
    CHECK(f_tilde(1.0, -1.0) == doctest::Approx(0.0));
    CHECK(f_tilde(2.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("secant property against the potential") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> val(-3.0, 3.0);
    for (int i = 0; i < 5000; ++i) {
        const double a = val(rng), b = val(rng);
        if (a == b) continue;
        const double lhs = f_tilde(a, b) * (a - b);
        const double rhs = potential(a) - potential(b);
        // the F difference cancels near |a| = |b|, so measure in ulps of F
        const double scale = std::max({potential(a), potential(b), 1.0});
        CHECK(std::abs(lhs - rhs) / scale <= 1e-12);
    }
}

TEST_CASE("convex-splitting quotient values") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        const double u = val(rng);
        CHECK(f_hat_css(u, u, u) ==
              doctest::Approx(potential_derivative(u)).epsilon(1e-13));
    }
    CHECK(f_hat_css(0.0, 0.0, 0.0) == 0.0);
    CHECK(f_hat_css(1.0, 2.0, 0.0) == doctest::Approx(-0.75));
}

TEST_CASE("steady state is preserved") {
    auto space = interval_space(24);
    ModifiedStepper stepper(space, 2.0 / 3.0, ModelParams{0.01, std::nullopt});
    const FieldVector ones(space->dof_count(), 1.0);
    SchemeState state{ones, ones, 0.0, 0.05};
    StepDiagnostics diag;
    const auto next = stepper.step(state, 0.07, &diag);
    for (double v : next.u_curr) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(next.t_curr == doctest::Approx(0.12));
    CHECK(diag.iterations <= 3);
}

TEST_CASE("theta = 1 equals the implicit midpoint scheme") {
    auto space = interval_space(64, BoundaryKind::Natural);
    const FixedPointConfig fp{1e-12, 100};
    ModifiedStepper stepper(space, 1.0, ModelParams{0.05, std::nullopt}, fp);

    const FieldVector u0 = interpolate(*space, [](Point p) { return std::tanh(2.0 * p.x); });
    const FieldVector u1 =
        interpolate(*space, [](Point p) { return std::tanh(2.0 * (p.x - 0.01)); });
    const double k_prev = 0.02, k = 0.03;
    SchemeState state{u0, u1, 0.0, k_prev};

    const auto dln_next = stepper.step(state, k);
    const FieldVector mid_next =
        midpoint_reference_step(*space, u0, u1, k, k_prev, 0.05, fp);

    double scale = testing::max_abs(dln_next.u_curr);
    CHECK(testing::max_abs_diff(dln_next.u_curr, mid_next) <= 1e-13 * std::max(1.0, scale));
}

TEST_CASE("discrete energy values") {
    auto space = interval_space(30);
    ModifiedStepper stepper(space, 2.0 / 3.0, ModelParams{0.01, std::nullopt});
    const FieldVector ones(space->dof_count(), 1.0);
    const FieldVector zeros(space->dof_count(), 0.0);

    CHECK(stepper.energy({ones, ones, 0.0, 0.1}) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(stepper.energy({zeros, zeros, 0.0, 0.1}) == doctest::Approx(1.5).epsilon(1e-12));

    // theta = 1: the gradient term ignores the previous level
    ModifiedStepper mid(space, 1.0, ModelParams{0.1, std::nullopt});
    const FieldVector wavy = interpolate(*space, [](Point p) { return std::sin(p.x); });
    const double e1 = mid.energy({wavy, ones, 0.0, 0.1});
    const double e2 = mid.energy({zeros, ones, 0.0, 0.1});
    CHECK(e1 == doctest::Approx(e2).epsilon(1e-13));
}

TEST_CASE("dissipation identity and energy decay on a random-ratio run") {
    auto space = interval_space(150, BoundaryKind::Dirichlet);
    const double eps = 0.01;
    const double speed = 3.0 * eps / std::sqrt(2.0);
    const double width = 2.0 * std::sqrt(2.0) * eps;
    const auto wave = [=](Point p, double t) {
        return 0.5 * (1.0 - std::tanh((p.x - speed * t) / width));
    };

    const FixedPointConfig fp{1e-10, 200};
    ModifiedStepper stepper(space, 2.0 / 3.0, ModelParams{eps, std::nullopt}, fp,
                            NonlinearVariant::Secant, wave);

    const auto steps = ratio_bounded_steps(0.004, 24, 2024);
    FieldVector u0 = interpolate(*space, [&](Point p) { return wave(p, 0.0); });
    FieldVector u1 = interpolate(*space, [&](Point p) { return wave(p, steps[0]); });
    SchemeState state{u0, u1, 0.0, steps[0]};

    double energy_prev = stepper.energy(state);
    for (std::size_t i = 1; i < steps.size(); ++i) {
        const auto next = stepper.step(state, steps[i]);
        const double resid = stepper.dissipation_residual(state, next, steps[i]);
        CHECK(std::abs(resid) <= 1e-8);
        const double energy = stepper.energy(next);
        CHECK(energy <= energy_prev + 10.0 * fp.tol);
        energy_prev = energy;
        state = next;
    }
}

TEST_CASE("steady state has zero dissipation residual") {
    auto space = interval_space(16);
    ModifiedStepper stepper(space, 0.8, ModelParams{0.01, std::nullopt});
    const FieldVector ones(space->dof_count(), 1.0);
    SchemeState before{ones, ones, 0.0, 0.1};
    const auto after = stepper.step(before, 0.15);
    CHECK(std::abs(stepper.dissipation_residual(before, after, 0.15)) <= 1e-12);
}

TEST_CASE("convex splitting variant also dissipates on the travelling wave") {
    auto space = interval_space(150, BoundaryKind::Dirichlet);
    const double eps = 0.01;
    const double speed = 3.0 * eps / std::sqrt(2.0);
    const double width = 2.0 * std::sqrt(2.0) * eps;
    const auto wave = [=](Point p, double t) {
        return 0.5 * (1.0 - std::tanh((p.x - speed * t) / width));
    };
    ModifiedStepper stepper(space, 2.0 / 3.0, ModelParams{eps, std::nullopt}, {1e-10, 200},
                            NonlinearVariant::ConvexSplit, wave);

    const double k = 0.01;
    FieldVector u0 = interpolate(*space, [&](Point p) { return wave(p, 0.0); });
    FieldVector u1 = interpolate(*space, [&](Point p) { return wave(p, k); });
    SchemeState state{u0, u1, 0.0, k};
    double energy_prev = stepper.energy(state);
    for (int i = 0; i < 20; ++i) {
        state = stepper.step(state, k);
        const double energy = stepper.energy(state);
        CHECK(energy <= energy_prev + 1e-9);
        energy_prev = energy;
    }
    // still tracks the wave
    const double err = error_norm(
        *space, state.u_curr, [&](Point p) { return wave(p, state.t_curr); }, NormKind::L2);
    CHECK(err <= 1e-2);
}

TEST_CASE("fixed point failure carries the last iterate") {
    auto space = interval_space(12);
    ModifiedStepper stepper(space, 0.5, ModelParams{0.01, std::nullopt}, {1e-30, 3});
    const FieldVector bump = interpolate(*space, [](Point p) { return 0.4 * std::sin(p.x); });
    SchemeState state{bump, bump, 0.0, 0.1};
    CHECK_THROWS_AS((void)stepper.step(state, 0.1), FixedPointError);
    try {
        (void)stepper.step(state, 0.1);
    } catch (const FixedPointError& e) {
        CHECK(e.iterations == 3);
        CHECK(e.last_iterate.size() == bump.size());
    }
}

TEST_CASE("midpoint bootstrap ignores the dummy previous level") {
    auto space = interval_space(40);
    const ModelParams params{0.02, std::nullopt};
    const FixedPointConfig fp{1e-11, 100};
    const FieldVector u0 = interpolate(*space, [](Point p) { return 0.3 * std::cos(p.x); });
    const FieldVector u1 = midpoint_bootstrap_step(space, params, fp, nullptr, u0, 0.0, 0.01);
    const FieldVector ref = midpoint_reference_step(*space, u0, u0, 0.01, 0.01, 0.02, fp);
    CHECK(testing::max_abs_diff(u1, ref) <= 1e-12);
}
