#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dln/assembly.hpp"
#include "dln/cholesky.hpp"
#include "support/dense.hpp"

using namespace dln;

namespace {

SparseMatrix from_dense(const testing::DenseMatrix& m) {
    std::vector<Triplet> trip;
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            if (m[i][j] != 0.0) trip.push_back({(int)i, (int)j, m[i][j]});
        }
    }
    return SparseMatrix::from_triplets((int)m.size(), (int)m.size(), std::move(trip));
}

}  // namespace

TEST_CASE("identity and diagonal solves") {
    const SparseMatrix eye = from_dense({{1, 0}, {0, 1}});
    const SparseCholesky ce(eye);
    CHECK(testing::max_abs_diff(ce.solve({3.0, -4.0}), {3.0, -4.0}) == 0.0);

    const SparseMatrix diag = from_dense({{2, 0}, {0, 4}});
    const SparseCholesky cd(diag);
    CHECK(testing::max_abs_diff(cd.solve({2.0, 4.0}), {1.0, 1.0}) <= 1e-15);
}

TEST_CASE("2x2 dense check") {
    const SparseMatrix a = from_dense({{2, 1}, {1, 2}});
    const SparseCholesky chol(a);
    CHECK(testing::max_abs_diff(chol.solve({3.0, 3.0}), {1.0, 1.0}) <= 1e-14);
}

TEST_CASE("zero right-hand side") {
    const SparseMatrix a = from_dense({{2, 1}, {1, 2}});
    const SparseCholesky chol(a);
    CHECK(testing::max_abs(chol.solve({0.0, 0.0})) == 0.0);
}

TEST_CASE("random SPD systems match the dense reference") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 5 + trial % 11;
        testing::DenseMatrix g(n, std::vector<double>(n));
        for (auto& row : g) {
            for (double& v : row) v = val(rng);
        }
        // SPD via G G^T + n I
        testing::DenseMatrix a(n, std::vector<double>(n, 0.0));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                for (int k = 0; k < n; ++k) a[i][j] += g[i][k] * g[j][k];
            }
            a[i][i] += n;
        }
        std::vector<double> b(n);
        for (double& v : b) v = val(rng);

        const SparseMatrix as = from_dense(a);
        const SparseCholesky chol(as);
        const FieldVector x = chol.solve(b);
        const std::vector<double> x_ref = testing::dense_solve(a, b);
        CHECK(testing::max_abs_diff(x, x_ref) <= 1e-10 * std::max(1.0, testing::max_abs(x_ref)));
    }
}

TEST_CASE("rhs = A * ones returns ones") {
    const FeSpace space(build_mesh(Domain::interval(0.0, 1.0), 40), BoundaryKind::Natural);
    const SparseMatrix a = SparseMatrix::linear_combination(1.0, assemble_mass(space), 0.5,
                                                            assemble_stiffness(space));
    const SparseCholesky chol(a);
    const FieldVector ones(space.dof_count(), 1.0);
    const FieldVector x = chol.solve(a * ones);
    CHECK(testing::max_abs_diff(x, ones) <= 1e-12);
}

TEST_CASE("FE operator on a 2D periodic space factorizes and solves") {
    const FeSpace space(build_mesh(Domain::rectangle({0, 0}, {1, 1}), 6), BoundaryKind::Periodic);
    const SparseMatrix a = SparseMatrix::linear_combination(1.0, assemble_mass(space), 1e-2,
                                                            assemble_stiffness(space));
    const SparseCholesky chol(a);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    FieldVector b(space.dof_count());
    for (double& v : b) v = val(rng);
    const FieldVector x = chol.solve(b);
    FieldVector r = a * x;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    CHECK(norm2(r) <= 1e-12 * norm2(b));
}

TEST_CASE("deterministic solves") {
    const FeSpace space(build_mesh(Domain::interval(0.0, 1.0), 25), BoundaryKind::Natural);
    const SparseMatrix a = SparseMatrix::linear_combination(1.0, assemble_mass(space), 2.0,
                                                            assemble_stiffness(space));
    FieldVector b(space.dof_count());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::sin(0.37 * i);

    const SparseCholesky c1(a);
    const SparseCholesky c2(a);
    const FieldVector x1 = c1.solve(b);
    const FieldVector x2 = c2.solve(b);
    CHECK(x1 == x2);
}

TEST_CASE("non-SPD matrices are rejected with pivot diagnostics") {
    SUBCASE("indefinite") {
        const SparseMatrix a = from_dense({{1, 2}, {2, 1}});
        CHECK_THROWS_AS(SparseCholesky{a}, FactorizationError);
        try {
            SparseCholesky chol(a);
        } catch (const FactorizationError& e) {
            CHECK(e.pivot_index == 1);
            CHECK(e.pivot_value < 0.0);
        }
    }
    SUBCASE("asymmetric") {
        const SparseMatrix a = from_dense({{2, 1}, {0.5, 2}});
        CHECK_THROWS_AS(SparseCholesky{a}, std::invalid_argument);
    }
    SUBCASE("dimension mismatch on solve") {
        const SparseMatrix a = from_dense({{2, 1}, {1, 2}});
        const SparseCholesky chol(a);
        CHECK_THROWS_AS((void)chol.solve({1.0, 2.0, 3.0}), std::invalid_argument);
    }
}

TEST_CASE("solve counter increments") {
    const SparseMatrix a = from_dense({{2, 1}, {1, 2}});
    const SparseCholesky chol(a);
    const auto before = SparseCholesky::solve_count();
    (void)chol.solve({1.0, 1.0});
    CHECK(SparseCholesky::solve_count() >= before + 1);
}

TEST_CASE("mass matrices stay positive definite up to n = 64") {
    const FeSpace line(build_mesh(Domain::interval(-2.0, 4.0), 64), BoundaryKind::Natural);
    CHECK_NOTHROW(SparseCholesky{assemble_mass(line)});
    const FeSpace square(build_mesh(Domain::rectangle({0, 0}, {1, 1}), 16), BoundaryKind::Natural);
    CHECK_NOTHROW(SparseCholesky{assemble_mass(square)});
}
