#include "tch/sparse.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace tch {

CsrMatrix::CsrMatrix(Index rows, Index cols, std::vector<Index> row_ptr,
                     std::vector<Index> col_idx, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (rows_ < 0 || cols_ < 0) throw std::invalid_argument("CsrMatrix: negative dimension");
  if (row_ptr_.size() != static_cast<std::size_t>(rows_) + 1 || row_ptr_.front() != 0) {
    throw std::invalid_argument("CsrMatrix: row_ptr must have rows+1 entries starting at 0");
  }
  if (col_idx_.size() != values_.size() ||
      static_cast<std::size_t>(row_ptr_.back()) != col_idx_.size()) {
    throw std::invalid_argument("CsrMatrix: row_ptr/col_idx/values size mismatch");
  }
  for (Index i = 0; i < rows_; ++i) {
    if (row_ptr_[i + 1] < row_ptr_[i]) {
      throw std::invalid_argument("CsrMatrix: row_ptr must be non-decreasing");
    }
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      if (col_idx_[p] < 0 || col_idx_[p] >= cols_) {
        throw std::invalid_argument("CsrMatrix: column index out of range");
      }
      if (p > row_ptr_[i] && col_idx_[p] <= col_idx_[p - 1]) {
        throw std::invalid_argument("CsrMatrix: columns must be sorted and unique per row");
      }
    }
  }
}

CsrMatrix CsrMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> triplets) {
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Index> row_ptr(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  col_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  for (std::size_t t = 0; t < triplets.size(); ++t) {
    const auto& tr = triplets[t];
    if (tr.row < 0 || tr.row >= rows || tr.col < 0 || tr.col >= cols) {
      throw std::invalid_argument("from_triplets: index out of range");
    }
    if (t > 0 && triplets[t - 1].row == tr.row && triplets[t - 1].col == tr.col) {
      values.back() += tr.value;
      continue;
    }
    col_idx.push_back(tr.col);
    values.push_back(tr.value);
    ++row_ptr[tr.row + 1];
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  return CsrMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

CsrMatrix CsrMatrix::identity(Index n, double scale) {
  std::vector<double> d(static_cast<std::size_t>(n), scale);
  return diagonal(d);
}

CsrMatrix CsrMatrix::diagonal(std::span<const double> d) {
  const auto n = static_cast<Index>(d.size());
  std::vector<Index> row_ptr(static_cast<std::size_t>(n) + 1);
  std::iota(row_ptr.begin(), row_ptr.end(), 0);
  std::vector<Index> col_idx(static_cast<std::size_t>(n));
  std::iota(col_idx.begin(), col_idx.end(), 0);
  CsrMatrix m(n, n, std::move(row_ptr), std::move(col_idx), {d.begin(), d.end()});
  m.symmetric_ = true;
  return m;
}

CsrMatrix CsrMatrix::from_dense(const Eigen::MatrixXd& a, double drop_tol) {
  std::vector<Triplet> t;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (std::abs(a(i, j)) > drop_tol) t.push_back({i, j, a(i, j)});
    }
  }
  return from_triplets(static_cast<Index>(a.rows()), static_cast<Index>(a.cols()), std::move(t));
}

Index CsrMatrix::find(Index i, Index j) const {
  const auto first = col_idx_.begin() + row_ptr_[i];
  const auto last = col_idx_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return -1;
  return static_cast<Index>(it - col_idx_.begin());
}

double CsrMatrix::at(Index i, Index j) const {
  const Index p = find(i, j);
  return p < 0 ? 0.0 : values_[p];
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  const Index* rp = row_ptr_.data();
  const Index* ci = col_idx_.data();
  const double* v = values_.data();
  for (Index i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (Index p = rp[i]; p < rp[i + 1]; ++p) s += v[p] * x[ci[p]];
    y[i] = s;
  }
}

void CsrMatrix::multiply_add(double alpha, std::span<const double> x, double beta,
                             std::span<double> y) const {
  for (Index i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[col_idx_[p]];
    y[i] = alpha * s + (beta == 0.0 ? 0.0 : beta * y[i]);
  }
}

std::vector<double> CsrMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(static_cast<std::size_t>(rows_));
  multiply(x, y);
  return y;
}

std::vector<double> CsrMatrix::diagonal_values() const {
  std::vector<double> d(static_cast<std::size_t>(std::min(rows_, cols_)), 0.0);
  for (Index i = 0; i < static_cast<Index>(d.size()); ++i) d[i] = at(i, i);
  return d;
}

bool CsrMatrix::is_symmetric(double rel_tol) const {
  if (rows_ != cols_) return false;
  double amax = 0.0;
  for (double v : values_) amax = std::max(amax, std::abs(v));
  for (Index i = 0; i < rows_; ++i) {
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      if (std::abs(values_[p] - at(col_idx_[p], i)) > rel_tol * amax) return false;
    }
  }
  return true;
}

void CsrMatrix::set_symmetric(bool flag, double rel_tol) {
  if (flag && !is_symmetric(rel_tol)) {
    throw std::invalid_argument("CsrMatrix::set_symmetric: matrix is not symmetric");
  }
  symmetric_ = flag;
}

CsrMatrix add(double alpha, const CsrMatrix& a, double beta, const CsrMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("add: dimension mismatch");
  }
  const auto arp = a.row_ptr();
  const auto aci = a.col_idx();
  const auto av = a.values();
  const auto brp = b.row_ptr();
  const auto bci = b.col_idx();
  const auto bv = b.values();
  std::vector<Index> row_ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  col_idx.reserve(static_cast<std::size_t>(std::max(a.nnz(), b.nnz())));
  values.reserve(col_idx.capacity());
  for (Index i = 0; i < a.rows(); ++i) {
    Index p = arp[i];
    Index q = brp[i];
    while (p < arp[i + 1] || q < brp[i + 1]) {
      const Index ca = p < arp[i + 1] ? aci[p] : a.cols();
      const Index cb = q < brp[i + 1] ? bci[q] : b.cols();
      if (ca == cb) {
        col_idx.push_back(ca);
        values.push_back(alpha * av[p++] + beta * bv[q++]);
      } else if (ca < cb) {
        col_idx.push_back(ca);
        values.push_back(alpha * av[p++]);
      } else {
        col_idx.push_back(cb);
        values.push_back(beta * bv[q++]);
      }
    }
    row_ptr[i + 1] = static_cast<Index>(col_idx.size());
  }
  CsrMatrix c(a.rows(), a.cols(), std::move(row_ptr), std::move(col_idx), std::move(values));
  if (a.symmetric() && b.symmetric()) c.set_symmetric(true);
  return c;
}

CsrMatrix transpose(const CsrMatrix& a) {
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  std::vector<Index> row_ptr(static_cast<std::size_t>(a.cols()) + 1, 0);
  for (Index c : ci) ++row_ptr[c + 1];
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  std::vector<Index> next(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<Index> col_idx(ci.size());
  std::vector<double> values(v.size());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index p = rp[i]; p < rp[i + 1]; ++p) {
      const Index dst = next[ci[p]]++;
      col_idx[dst] = i;
      values[dst] = v[p];
    }
  }
  return CsrMatrix(a.cols(), a.rows(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("multiply: dimension mismatch");
  const auto arp = a.row_ptr();
  const auto aci = a.col_idx();
  const auto av = a.values();
  const auto brp = b.row_ptr();
  const auto bci = b.col_idx();
  const auto bv = b.values();
  std::vector<Index> marker(static_cast<std::size_t>(b.cols()), -1);
  std::vector<double> acc(static_cast<std::size_t>(b.cols()), 0.0);
  std::vector<Index> row_ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  std::vector<Index> cols_in_row;
  for (Index i = 0; i < a.rows(); ++i) {
    cols_in_row.clear();
    for (Index p = arp[i]; p < arp[i + 1]; ++p) {
      const double aik = av[p];
      const Index k = aci[p];
      for (Index q = brp[k]; q < brp[k + 1]; ++q) {
        const Index j = bci[q];
        if (marker[j] != i) {
          marker[j] = i;
          acc[j] = 0.0;
          cols_in_row.push_back(j);
        }
        acc[j] += aik * bv[q];
      }
    }
    std::sort(cols_in_row.begin(), cols_in_row.end());
    for (Index j : cols_in_row) {
      col_idx.push_back(j);
      values.push_back(acc[j]);
    }
    row_ptr[i + 1] = static_cast<Index>(col_idx.size());
  }
  return CsrMatrix(a.rows(), b.cols(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

Eigen::MatrixXd to_dense(const CsrMatrix& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
      d(i, a.col_idx()[p]) = a.values()[p];
    }
  }
  return d;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
  for (double& v : x) v *= alpha;
}

namespace {

bool blocks_mirror(const BlockOperator2x2::Block& upper, const BlockOperator2x2::Block& lower) {
  if (upper.matrix == nullptr || lower.matrix == nullptr) {
    return upper.matrix == lower.matrix;
  }
  if (upper.matrix == lower.matrix) {
    return upper.scale == lower.scale && upper.matrix->symmetric();
  }
  const CsrMatrix ut = transpose(*upper.matrix);
  const CsrMatrix diff = add(upper.scale, ut, -lower.scale, *lower.matrix);
  double amax = 0.0;
  for (double v : ut.values()) amax = std::max(amax, std::abs(upper.scale * v));
  for (double v : diff.values()) {
    if (std::abs(v) > 1e-14 * amax) return false;
  }
  return true;
}

}  // namespace

BlockOperator2x2::BlockOperator2x2(Block b11, Block b12, Block b21, Block b22)
    : blocks_{b11, b12, b21, b22} {
  n_ = -1;
  for (const auto& b : blocks_) {
    if (b.matrix == nullptr) continue;
    if (b.matrix->rows() != b.matrix->cols()) {
      throw std::invalid_argument("BlockOperator2x2: blocks must be square");
    }
    if (n_ >= 0 && b.matrix->rows() != n_) {
      throw std::invalid_argument("BlockOperator2x2: blocks are not conformal");
    }
    n_ = b.matrix->rows();
  }
  if (n_ < 0) throw std::invalid_argument("BlockOperator2x2: all blocks are zero");
  for (const auto* d : {&blocks_[0], &blocks_[3]}) {
    if (d->matrix != nullptr && !d->matrix->symmetric()) {
      throw std::invalid_argument("BlockOperator2x2: diagonal blocks must be symmetric");
    }
  }
  if (!blocks_mirror(blocks_[1], blocks_[2])) {
    throw std::invalid_argument("BlockOperator2x2: off-diagonal blocks are not transposes");
  }
}

void BlockOperator2x2::apply(std::span<const double> x, std::span<double> y) const {
  const auto n = static_cast<std::size_t>(n_);
  const auto x1 = x.subspan(0, n);
  const auto x2 = x.subspan(n, n);
  auto y1 = y.subspan(0, n);
  auto y2 = y.subspan(n, n);
  std::fill(y.begin(), y.end(), 0.0);
  const auto acc = [](const Block& b, std::span<const double> in, std::span<double> out) {
    if (b.matrix != nullptr) b.matrix->multiply_add(b.scale, in, 1.0, out);
  };
  acc(blocks_[0], x1, y1);
  acc(blocks_[1], x2, y1);
  acc(blocks_[2], x1, y2);
  acc(blocks_[3], x2, y2);
}

CsrMatrix BlockOperator2x2::to_csr() const {
  std::vector<Triplet> t;
  for (int b = 0; b < 4; ++b) {
    const auto& blk = blocks_[b];
    if (blk.matrix == nullptr) continue;
    const Index ro = (b / 2) * n_;
    const Index co = (b % 2) * n_;
    const auto& m = *blk.matrix;
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p) {
        t.push_back({ro + i, co + m.col_idx()[p], blk.scale * m.values()[p]});
      }
    }
  }
  return CsrMatrix::from_triplets(2 * n_, 2 * n_, std::move(t));
}

}  // namespace tch
