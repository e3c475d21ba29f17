#pragma once

#include <vector>

#include "dln/field.hpp"

namespace dln {

struct Triplet {
    int row;
    int col;
    double value;
};

/// Compressed-row sparse matrix with sorted column indices. Duplicate triplets
/// are summed on construction; structural zeros are kept so that matrices
/// assembled on the same mesh share one pattern.
class SparseMatrix {
public:
    SparseMatrix() = default;
    static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int nnz() const { return static_cast<int>(values_.size()); }

    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_ind() const { return col_ind_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    void multiply(const FieldVector& x, FieldVector& y) const;
    FieldVector operator*(const FieldVector& x) const;

    bool same_pattern(const SparseMatrix& other) const;
    bool is_symmetric(double tol = 0.0) const;

    /// a*A + b*B for matrices sharing one pattern.
    static SparseMatrix linear_combination(double a, const SparseMatrix& A, double b,
                                           const SparseMatrix& B);

    /// Symmetric Dirichlet elimination: zero the constrained rows and columns,
    /// put 1 on their diagonals. The pattern is preserved.
    SparseMatrix with_dirichlet(const std::vector<int>& constrained) const;

    /// Fold known boundary values into the right-hand side of the original
    /// (unconstrained) operator: rhs_i -= sum_j A_ij g_j over constrained j,
    /// then rhs_j = g_j. Call on the matrix *before* with_dirichlet().
    void dirichlet_rhs(FieldVector& rhs, const std::vector<int>& constrained,
                       const FieldVector& boundary_values) const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> row_ptr_;
    std::vector<int> col_ind_;
    std::vector<double> values_;
};

}  // namespace dln
