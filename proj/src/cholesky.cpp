#include "dln/cholesky.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>

namespace dln {

namespace {
std::atomic<std::uint64_t> g_solve_count{0};
}

std::uint64_t SparseCholesky::solve_count() { return g_solve_count.load(); }

SparseCholesky::SparseCholesky(const SparseMatrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("factorize: matrix must be square");
    if (!a.is_symmetric(1e-12)) throw std::invalid_argument("factorize: matrix must be symmetric");

    n_ = a.rows();
    const auto& ap = a.row_ptr();
    const auto& ai = a.col_ind();
    const auto& ax = a.values();

    // Elimination tree from the strict lower rows (path compression).
    std::vector<int> parent(n_, -1), ancestor(n_, -1);
    for (int k = 0; k < n_; ++k) {
        for (int p = ap[k]; p < ap[k + 1]; ++p) {
            int j = ai[p];
            while (j != -1 && j < k) {
                const int next = ancestor[j];
                ancestor[j] = k;
                if (next == -1) parent[j] = k;
                j = next;
            }
        }
    }

    // Row pattern of L via traversal toward the root, bounded by marks.
    std::vector<int> mark(n_, -1), stack(n_), pattern(n_);
    std::vector<int> count(n_, 1);  // diagonal
    auto row_pattern = [&](int k, std::vector<int>& out) -> int {
        int len = 0;
        mark[k] = k;
        for (int p = ap[k]; p < ap[k + 1]; ++p) {
            int j = ai[p];
            if (j >= k) continue;
            int top = 0;
            while (mark[j] != k) {
                mark[j] = k;
                stack[top++] = j;
                j = parent[j];
            }
            while (top > 0) out[len++] = stack[--top];
        }
        return len;
    };

    for (int k = 0; k < n_; ++k) {
        const int len = row_pattern(k, pattern);
        for (int i = 0; i < len; ++i) ++count[pattern[i]];
    }

    col_ptr_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) col_ptr_[j + 1] = col_ptr_[j] + count[j];
    row_ind_.assign(col_ptr_[n_], 0);
    values_.assign(col_ptr_[n_], 0.0);

    // Numeric pass: row k of L by a sparse lower-triangular solve. Columns
    // receive entries in ascending row order, diagonal first.
    std::vector<int> next(col_ptr_.begin(), col_ptr_.end() - 1);
    std::fill(mark.begin(), mark.end(), -1);
    std::vector<double> x(n_, 0.0);
    for (int k = 0; k < n_; ++k) {
        int len = row_pattern(k, pattern);
        std::sort(pattern.begin(), pattern.begin() + len);

        double dk = 0.0;
        for (int p = ap[k]; p < ap[k + 1]; ++p) {
            const int j = ai[p];
            if (j < k) {
                x[j] = ax[p];
            } else if (j == k) {
                dk = ax[p];
            }
        }

        for (int q = 0; q < len; ++q) {
            const int j = pattern[q];
            const double ljj = values_[col_ptr_[j]];
            const double lkj = x[j] / ljj;
            x[j] = 0.0;
            for (int p = col_ptr_[j] + 1; p < next[j]; ++p) {
                x[row_ind_[p]] -= values_[p] * lkj;
            }
            dk -= lkj * lkj;
            row_ind_[next[j]] = k;
            values_[next[j]] = lkj;
            ++next[j];
        }

        if (!(dk > 0.0) || !std::isfinite(dk)) {
            throw FactorizationError("factorize: non-positive pivot at index " + std::to_string(k) +
                                         " (value " + std::to_string(dk) + ")",
                                     k, dk);
        }
        row_ind_[next[k]] = k;
        values_[next[k]] = std::sqrt(dk);
        ++next[k];
    }

    matrix_ = std::make_shared<const SparseMatrix>(a);
}

void SparseCholesky::solve_in_place(FieldVector& x) const {
    // forward: L z = b
    for (int j = 0; j < n_; ++j) {
        const double xj = x[j] / values_[col_ptr_[j]];
        x[j] = xj;
        for (int p = col_ptr_[j] + 1; p < col_ptr_[j + 1]; ++p) {
            x[row_ind_[p]] -= values_[p] * xj;
        }
    }
    // backward: L^T x = z
    for (int j = n_ - 1; j >= 0; --j) {
        double s = x[j];
        for (int p = col_ptr_[j] + 1; p < col_ptr_[j + 1]; ++p) {
            s -= values_[p] * x[row_ind_[p]];
        }
        x[j] = s / values_[col_ptr_[j]];
    }
}

FieldVector SparseCholesky::solve(const FieldVector& b) const {
    if (static_cast<int>(b.size()) != n_) throw std::invalid_argument("solve: dimension mismatch");
    g_solve_count.fetch_add(1, std::memory_order_relaxed);

    FieldVector x = b;
    solve_in_place(x);

    // Residual guard; one refinement pass is enough at these conditionings.
    FieldVector r;
    matrix_->multiply(x, r);
    double rn = 0.0, bn = 0.0;
    for (int i = 0; i < n_; ++i) {
        rn += (b[i] - r[i]) * (b[i] - r[i]);
        bn += b[i] * b[i];
    }
    if (rn > 1e-24 * bn && bn > 0.0) {
        FieldVector d(n_);
        for (int i = 0; i < n_; ++i) d[i] = b[i] - r[i];
        solve_in_place(d);
        for (int i = 0; i < n_; ++i) x[i] += d[i];
#ifndef NDEBUG
        matrix_->multiply(x, r);
        rn = 0.0;
        for (int i = 0; i < n_; ++i) rn += (b[i] - r[i]) * (b[i] - r[i]);
        assert(rn <= 1e-20 * bn && "solve: residual bound violated after refinement");
#endif
    }
    return x;
}

}  // namespace dln
