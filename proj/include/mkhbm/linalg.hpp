// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace mkhbm {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Compressed sparse row storage. row_offsets has rows+1 entries.
struct CsrStorage {
  std::vector<std::size_t> row_offsets;
  std::vector<std::size_t> col_indices;
  std::vector<double> values;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// An n x d real matrix held either densely (row-major) or in CSR form.
/// Every consumer goes through the row-oriented accessors below, so the two
/// layouts are interchangeable.
class Matrix {
 public:
  Matrix() = default;

  static Matrix dense(DenseMatrix values);
  static Matrix csr(std::size_t rows, std::size_t cols, CsrStorage storage);
  /// Duplicate (row, col) entries are summed; explicit zeros are dropped.
  static Matrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_dense() const noexcept { return std::holds_alternative<DenseMatrix>(storage_); }
  bool is_csr() const noexcept { return std::holds_alternative<CsrStorage>(storage_); }
  const DenseMatrix& dense_values() const { return std::get<DenseMatrix>(storage_); }
  const CsrStorage& csr_values() const { return std::get<CsrStorage>(storage_); }
  std::size_t stored_values() const;

  Vector multiply(const Vector& x) const;
  Vector multiply_transpose(const Vector& y) const;

  double row_dot(std::size_t i, const Vector& x) const;
  /// out += scale * a_i
  void add_scaled_row(std::size_t i, double scale, Vector& out) const;
  double row_norm_sq(std::size_t i) const;
  std::vector<double> row_norms_sq() const;
  double frobenius_sq() const;

  /// Accumulates scale * a_i a_i^T into a symmetric d x d matrix.
  void add_row_outer(std::size_t i, double scale, DenseMatrix& out) const;
  /// A^T diag(weights) A; rows with zero weight are skipped.
  DenseMatrix weighted_gram(const std::vector<double>& weights) const;
  DenseMatrix gram() const;

  DenseMatrix to_dense() const;
  Matrix to_csr() const;

  template <class Fn>
  void for_each_in_row(std::size_t i, Fn&& fn) const {
    if (const auto* d = std::get_if<DenseMatrix>(&storage_)) {
      for (std::size_t j = 0; j < cols_; ++j) fn(j, (*d)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    } else {
      const auto& s = std::get<CsrStorage>(storage_);
      for (std::size_t k = s.row_offsets[i]; k < s.row_offsets[i + 1]; ++k) fn(s.col_indices[k], s.values[k]);
    }
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::variant<DenseMatrix, CsrStorage> storage_;
};

/// Eigenvalue summary of the Gram matrix A^T A.
struct SpectrumSummary {
  std::vector<double> eigs;  // ascending
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double lambda_ave = 0.0;
  double kappa = 1.0;
  double kappa_bar = 1.0;
  double frob_sq = 0.0;
  double op_sq = 0.0;

  std::size_t dim() const noexcept { return eigs.size(); }
};

/// Builds the summary from raw eigenvalues; frob_sq is their sum.
SpectrumSummary summarize_spectrum(std::vector<double> eigs);

/// Spectrum of the explicitly formed Gram matrix. Rejects n < d and
/// lambda_min <= 1e-12 lambda_max.
SpectrumSummary gram_spectrum(const Matrix& a);

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // column j pairs with values[j]; empty unless requested
};

/// Cyclic Jacobi eigensolver for a symmetric matrix.
SymmetricEigen jacobi_eigen(const DenseMatrix& symmetric, bool want_vectors = false);
std::vector<double> jacobi_eigenvalues(const DenseMatrix& symmetric);
/// max |eigenvalue| of a symmetric matrix, i.e. its spectral norm.
double symmetric_spectral_norm(const DenseMatrix& symmetric);

/// Minimizer of ||Ax - b|| via the normal equations with one refinement step.
Vector least_squares_solution(const Matrix& a, const Vector& b);

Matrix read_matrix_market(std::istream& in);
Matrix read_matrix_market(const std::filesystem::path& path);
void write_matrix_market(std::ostream& out, const Matrix& a);
void write_matrix_market(const std::filesystem::path& path, const Matrix& a);

}  // namespace mkhbm
