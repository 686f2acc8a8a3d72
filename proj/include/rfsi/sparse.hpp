#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rfsi/kernels.hpp"

namespace rfsi {

/// Compressed-row sparse matrix. Column indices are sorted and unique per row
/// and explicit zeros are dropped when built through TripletList::to_csr.
struct SparseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr;  // size rows+1
    std::vector<int> col_idx;
    std::vector<double> values;

    int nnz() const { return static_cast<int>(values.size()); }

    void multiply(std::span<const double> x, std::span<double> y) const {
        kernels::csr_spmv(row_ptr, col_idx, values, x, y);
    }
    std::vector<double> multiply(std::span<const double> x) const {
        std::vector<double> y(rows, 0.0);
        multiply(x, y);
        return y;
    }
    // y += alpha * A * x
    void multiply_add(double alpha, std::span<const double> x, std::span<double> y) const;

    SparseMatrix transposed() const;
    std::vector<double> diagonal() const;

    double coeff(int r, int c) const;  // 0 when absent (linear scan of row)
    bool invariants_ok() const;        // sorted/unique columns, no stored zeros
};

/// Accumulates (row, col, value) contributions in insertion order, then
/// compresses. Duplicate entries are summed; the compression order is fixed
/// so assembly is deterministic regardless of contribution interleaving.
class TripletList {
public:
    TripletList(int rows, int cols) : rows_(rows), cols_(cols) {}

    void add(int r, int c, double v) { entries_.push_back({r, c, v}); }
    void reserve(std::size_t n) { entries_.reserve(n); }
    int rows() const { return rows_; }
    int cols() const { return cols_; }

    SparseMatrix to_csr(bool drop_zeros = true) const;

private:
    struct Entry {
        int r, c;
        double v;
    };
    int rows_, cols_;
    std::vector<Entry> entries_;
};

// S = C + B * diag_inv * B^T (the Schur complement approximation). C may be
// empty (rows == 0) in which case only the product term is formed.
SparseMatrix schur_diag_approx(const SparseMatrix& B, std::span<const double> diag_inv,
                               const SparseMatrix& C);

// Matrix Market coordinate format (general, real).
void write_matrix_market(std::ostream& os, const SparseMatrix& a);
void write_matrix_market_file(const std::string& path, const SparseMatrix& a);
SparseMatrix read_matrix_market(std::istream& is);
SparseMatrix read_matrix_market_file(const std::string& path);

}  // namespace rfsi
