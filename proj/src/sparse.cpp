#include "dln/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dln {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> triplets) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("from_triplets: bad dimensions");
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
            throw std::invalid_argument("from_triplets: index out of range");
        }
    }
    // stable: duplicates accumulate in insertion order, so symmetric element
    // contributions sum bit-identically for (i,j) and (j,i)
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_ptr_.assign(rows + 1, 0);
    m.col_ind_.reserve(triplets.size());
    m.values_.reserve(triplets.size());

    std::size_t i = 0;
    for (int r = 0; r < rows; ++r) {
        while (i < triplets.size() && triplets[i].row == r) {
            const int c = triplets[i].col;
            double v = 0.0;
            while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
                v += triplets[i].value;
                ++i;
            }
            m.col_ind_.push_back(c);
            m.values_.push_back(v);
        }
        m.row_ptr_[r + 1] = static_cast<int>(m.col_ind_.size());
    }
    return m;
}

void SparseMatrix::multiply(const FieldVector& x, FieldVector& y) const {
    if (static_cast<int>(x.size()) != cols_) {
        throw std::invalid_argument("multiply: dimension mismatch");
    }
    y.assign(rows_, 0.0);
    for (int r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += values_[p] * x[col_ind_[p]];
        y[r] = s;
    }
}

FieldVector SparseMatrix::operator*(const FieldVector& x) const {
    FieldVector y;
    multiply(x, y);
    return y;
}

bool SparseMatrix::same_pattern(const SparseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && row_ptr_ == other.row_ptr_ &&
           col_ind_ == other.col_ind_;
}

bool SparseMatrix::is_symmetric(double tol) const {
    if (rows_ != cols_) return false;
    for (int r = 0; r < rows_; ++r) {
        for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
            const int c = col_ind_[p];
            if (c < r) continue;
            const int* begin = col_ind_.data() + row_ptr_[c];
            const int* end = col_ind_.data() + row_ptr_[c + 1];
            const int* it = std::lower_bound(begin, end, r);
            if (it == end || *it != r) return false;
            const double v = values_[row_ptr_[c] + (it - begin)];
            if (std::abs(v - values_[p]) > tol * std::max(1.0, std::abs(values_[p]))) return false;
        }
    }
    return true;
}

SparseMatrix SparseMatrix::linear_combination(double a, const SparseMatrix& A, double b,
                                              const SparseMatrix& B) {
    if (!A.same_pattern(B)) {
        throw std::invalid_argument("linear_combination: matrices must share a pattern");
    }
    SparseMatrix m = A;
    for (std::size_t i = 0; i < m.values_.size(); ++i) {
        m.values_[i] = a * A.values_[i] + b * B.values_[i];
    }
    return m;
}

SparseMatrix SparseMatrix::with_dirichlet(const std::vector<int>& constrained) const {
    if (rows_ != cols_) throw std::invalid_argument("with_dirichlet: matrix must be square");
    std::vector<char> is_bdy(rows_, 0);
    for (int d : constrained) is_bdy[d] = 1;
    SparseMatrix m = *this;
    for (int r = 0; r < rows_; ++r) {
        for (int p = m.row_ptr_[r]; p < m.row_ptr_[r + 1]; ++p) {
            const int c = m.col_ind_[p];
            if (is_bdy[r] || is_bdy[c]) m.values_[p] = (r == c) ? 1.0 : 0.0;
        }
    }
    return m;
}

void SparseMatrix::dirichlet_rhs(FieldVector& rhs, const std::vector<int>& constrained,
                                 const FieldVector& boundary_values) const {
    if (constrained.size() != boundary_values.size()) {
        throw std::invalid_argument("dirichlet_rhs: value list mismatch");
    }
    std::vector<double> bval(rows_, 0.0);
    std::vector<char> is_bdy(rows_, 0);
    for (std::size_t i = 0; i < constrained.size(); ++i) {
        is_bdy[constrained[i]] = 1;
        bval[constrained[i]] = boundary_values[i];
    }
    for (int r = 0; r < rows_; ++r) {
        if (is_bdy[r]) continue;
        double s = 0.0;
        for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
            if (is_bdy[col_ind_[p]]) s += values_[p] * bval[col_ind_[p]];
        }
        rhs[r] -= s;
    }
    for (std::size_t i = 0; i < constrained.size(); ++i) rhs[constrained[i]] = boundary_values[i];
}

}  // namespace dln
