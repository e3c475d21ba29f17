#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "dln/sparse.hpp"

namespace dln {

struct FactorizationError : std::runtime_error {
    FactorizationError(const std::string& msg, int pivot, double value)
        : std::runtime_error(msg), pivot_index(pivot), pivot_value(value) {}
    int pivot_index;
    double pivot_value;
};

/// Sparse Cholesky factorization A = L L^T of a symmetric positive-definite
/// matrix, up-looking with an elimination-tree symbolic pass. Immutable after
/// construction; concurrent solves against one factorization are safe.
class SparseCholesky {
public:
    explicit SparseCholesky(const SparseMatrix& a);

    int size() const { return n_; }

    /// Solve A x = b. Runs one step of iterative refinement if the residual
    /// exceeds 1e-12 * |b|.
    FieldVector solve(const FieldVector& b) const;

    /// Total number of triangular solves performed by this process; used to
    /// verify that predictor paths are solver-free.
    static std::uint64_t solve_count();

private:
    void solve_in_place(FieldVector& x) const;

    int n_ = 0;
    std::vector<int> col_ptr_;
    std::vector<int> row_ind_;
    std::vector<double> values_;
    std::shared_ptr<const SparseMatrix> matrix_;  // kept for residual checks
};

}  // namespace dln
