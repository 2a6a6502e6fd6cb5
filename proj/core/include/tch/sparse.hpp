#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

#include "tch/mesh.hpp"

namespace tch {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  /// Takes ownership of the arrays and validates the CSR contract.
  CsrMatrix(Index rows, Index cols, std::vector<Index> row_ptr, std::vector<Index> col_idx,
            std::vector<double> values);

  /// Duplicate entries are summed in input order.
  static CsrMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> triplets);
  static CsrMatrix identity(Index n, double scale = 1.0);
  static CsrMatrix diagonal(std::span<const double> d);
  static CsrMatrix from_dense(const Eigen::MatrixXd& a, double drop_tol = 0.0);

  [[nodiscard]] Index rows() const { return rows_; }
  [[nodiscard]] Index cols() const { return cols_; }
  [[nodiscard]] Index nnz() const { return static_cast<Index>(values_.size()); }
  [[nodiscard]] std::span<const Index> row_ptr() const { return row_ptr_; }
  [[nodiscard]] std::span<const Index> col_idx() const { return col_idx_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<double> values() { return values_; }

  /// Entry (i, j), zero when outside the pattern.
  [[nodiscard]] double at(Index i, Index j) const;
  /// Position of (i, j) in values(), or -1.
  [[nodiscard]] Index find(Index i, Index j) const;

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  /// y = alpha A x + beta y
  void multiply_add(double alpha, std::span<const double> x, double beta,
                    std::span<double> y) const;
  [[nodiscard]] std::vector<double> operator*(std::span<const double> x) const;

  [[nodiscard]] std::vector<double> diagonal_values() const;

  /// Symmetry flag. set_symmetric(true) checks value-level symmetry first.
  [[nodiscard]] bool symmetric() const { return symmetric_; }
  void set_symmetric(bool flag, double rel_tol = 1e-14);
  /// max |a_ij - a_ji| <= rel_tol * max |a_ij|
  [[nodiscard]] bool is_symmetric(double rel_tol = 1e-14) const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
  bool symmetric_ = false;
};

/// alpha A + beta B on the union of both sparsity patterns.
CsrMatrix add(double alpha, const CsrMatrix& a, double beta, const CsrMatrix& b);
CsrMatrix transpose(const CsrMatrix& a);
/// Sparse product A B (row-wise Gustavson accumulation).
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);
Eigen::MatrixXd to_dense(const CsrMatrix& a);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
/// y += alpha x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);

/// Symmetric 2x2 block operator [[a11 A11, a12 A12], [a21 A21, a22 A22]]
/// acting on concatenated vectors [v1; v2] of equal block size.
class BlockOperator2x2 {
 public:
  struct Block {
    const CsrMatrix* matrix = nullptr;  // nullptr is the zero block
    double scale = 1.0;
  };

  /// Throws if the blocks are not conformal, or if the operator is not
  /// symmetric (A12 must equal A21 up to the scalar factors, A11 and A22
  /// must carry the symmetry flag).
  BlockOperator2x2(Block b11, Block b12, Block b21, Block b22);

  [[nodiscard]] Index block_size() const { return n_; }
  [[nodiscard]] Index size() const { return 2 * n_; }
  void apply(std::span<const double> x, std::span<double> y) const;
  /// Assembled monolithic matrix, for tests and small dense studies.
  [[nodiscard]] CsrMatrix to_csr() const;

 private:
  std::array<Block, 4> blocks_;
  Index n_ = 0;
};

}  // namespace tch
