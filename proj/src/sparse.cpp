#include "rfsi/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rfsi/errors.hpp"

namespace rfsi {

void SparseMatrix::multiply_add(double alpha, std::span<const double> x,
                                std::span<double> y) const {
    for (int r = 0; r < rows; ++r) {
        double s = 0.0;
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += values[k] * x[col_idx[k]];
        y[r] += alpha * s;
    }
}

SparseMatrix SparseMatrix::transposed() const {
    SparseMatrix t;
    t.rows = cols;
    t.cols = rows;
    t.row_ptr.assign(cols + 1, 0);
    for (int c : col_idx) ++t.row_ptr[c + 1];
    std::partial_sum(t.row_ptr.begin(), t.row_ptr.end(), t.row_ptr.begin());
    t.col_idx.resize(values.size());
    t.values.resize(values.size());
    std::vector<int> fill(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (int r = 0; r < rows; ++r) {
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            const int pos = fill[col_idx[k]]++;
            t.col_idx[pos] = r;
            t.values[pos] = values[k];
        }
    }
    return t;  // columns sorted because source rows are scanned in order
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(rows, 0.0);
    for (int r = 0; r < rows; ++r)
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
            if (col_idx[k] == r) d[r] = values[k];
    return d;
}

double SparseMatrix::coeff(int r, int c) const {
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
        if (col_idx[k] == c) return values[k];
    return 0.0;
}

bool SparseMatrix::invariants_ok() const {
    if (static_cast<int>(row_ptr.size()) != rows + 1) return false;
    for (int r = 0; r < rows; ++r) {
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            if (col_idx[k] < 0 || col_idx[k] >= cols) return false;
            if (k > row_ptr[r] && col_idx[k] <= col_idx[k - 1]) return false;
            if (values[k] == 0.0) return false;
        }
    }
    return true;
}

SparseMatrix TripletList::to_csr(bool drop_zeros) const {
    std::vector<int> order(entries_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (entries_[a].r != entries_[b].r) return entries_[a].r < entries_[b].r;
        return entries_[a].c < entries_[b].c;
    });

    SparseMatrix m;
    m.rows = rows_;
    m.cols = cols_;
    m.row_ptr.assign(rows_ + 1, 0);
    m.col_idx.reserve(entries_.size());
    m.values.reserve(entries_.size());

    std::size_t i = 0;
    for (int r = 0; r < rows_; ++r) {
        while (i < order.size() && entries_[order[i]].r == r) {
            const int c = entries_[order[i]].c;
            double v = 0.0;
            while (i < order.size() && entries_[order[i]].r == r && entries_[order[i]].c == c) {
                v += entries_[order[i]].v;
                ++i;
            }
            if (!drop_zeros || v != 0.0) {
                m.col_idx.push_back(c);
                m.values.push_back(v);
            }
        }
        m.row_ptr[r + 1] = static_cast<int>(m.col_idx.size());
    }
    return m;
}

SparseMatrix schur_diag_approx(const SparseMatrix& B, std::span<const double> diag_inv,
                               const SparseMatrix& C) {
    // Row-wise sparse product: S_ij = sum_k B_ik d_k B_jk, accumulated through
    // B^T so each row of S merges scaled rows of Bt.
    const SparseMatrix Bt = B.transposed();
    const int n = B.rows;
    TripletList acc(n, n);
    std::vector<double> dense(n, 0.0);
    std::vector<int> touched;
    for (int i = 0; i < n; ++i) {
        touched.clear();
        for (int k = B.row_ptr[i]; k < B.row_ptr[i + 1]; ++k) {
            const int col = B.col_idx[k];
            const double scale = B.values[k] * diag_inv[col];
            for (int t = Bt.row_ptr[col]; t < Bt.row_ptr[col + 1]; ++t) {
                const int j = Bt.col_idx[t];
                if (dense[j] == 0.0) touched.push_back(j);
                dense[j] += scale * Bt.values[t];
            }
        }
        if (C.rows == n) {
            for (int k = C.row_ptr[i]; k < C.row_ptr[i + 1]; ++k) {
                const int j = C.col_idx[k];
                if (dense[j] == 0.0) touched.push_back(j);
                dense[j] += C.values[k];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (int j : touched) {
            if (dense[j] != 0.0) acc.add(i, j, dense[j]);
            dense[j] = 0.0;
        }
    }
    return acc.to_csr();
}

void write_matrix_market(std::ostream& os, const SparseMatrix& a) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << a.rows << " " << a.cols << " " << a.nnz() << "\n";
    char buf[64];
    for (int r = 0; r < a.rows; ++r) {
        for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n", r + 1, a.col_idx[k] + 1, a.values[k]);
            os << buf;
        }
    }
}

void write_matrix_market_file(const std::string& path, const SparseMatrix& a) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_matrix_market(os, a);
}

SparseMatrix read_matrix_market(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("%%MatrixMarket", 0) != 0)
        throw ParseError("not a MatrixMarket stream");
    if (line.find("coordinate") == std::string::npos || line.find("real") == std::string::npos)
        throw ParseError("unsupported MatrixMarket flavor: " + line);
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream hdr(line);
    int rows = 0, cols = 0, nnz = 0;
    if (!(hdr >> rows >> cols >> nnz)) throw ParseError("bad MatrixMarket size line");
    TripletList t(rows, cols);
    for (int i = 0; i < nnz; ++i) {
        int r, c;
        double v;
        if (!(is >> r >> c >> v)) throw ParseError("truncated MatrixMarket data");
        t.add(r - 1, c - 1, v);
    }
    return t.to_csr(false);
}

SparseMatrix read_matrix_market_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    return read_matrix_market(is);
}

}  // namespace rfsi
