// SPDX-License-Identifier: Apache-2.0
#include "mkhbm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mkhbm/error.hpp"

namespace mkhbm {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

Matrix Matrix::dense(DenseMatrix values) {
  Matrix m;
  m.rows_ = static_cast<std::size_t>(values.rows());
  m.cols_ = static_cast<std::size_t>(values.cols());
  m.storage_ = std::move(values);
  return m;
}

Matrix Matrix::csr(std::size_t rows, std::size_t cols, CsrStorage storage) {
  if (storage.row_offsets.size() != rows + 1) {
    fail(ErrorKind::Format, "CSR row offsets must have rows+1 entries");
  }
  if (storage.row_offsets.front() != 0 || storage.row_offsets.back() != storage.values.size() ||
      storage.col_indices.size() != storage.values.size()) {
    fail(ErrorKind::Format, "CSR offsets do not match stored value count");
  }
  if (!std::is_sorted(storage.row_offsets.begin(), storage.row_offsets.end())) {
    fail(ErrorKind::Format, "CSR row offsets must be nondecreasing");
  }
  for (std::size_t c : storage.col_indices) {
    if (c >= cols) fail(ErrorKind::Format, "CSR column index " + std::to_string(c) + " out of range");
  }
  Matrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.storage_ = std::move(storage);
  return m;
}

Matrix Matrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) fail(ErrorKind::Format, "triplet index out of range");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrStorage s;
  s.row_offsets.assign(rows + 1, 0);
  for (std::size_t k = 0; k < triplets.size();) {
    std::size_t r = triplets[k].row, c = triplets[k].col;
    double v = 0.0;
    for (; k < triplets.size() && triplets[k].row == r && triplets[k].col == c; ++k) v += triplets[k].value;
    if (v != 0.0) {
      s.col_indices.push_back(c);
      s.values.push_back(v);
      ++s.row_offsets[r + 1];
    }
  }
  std::partial_sum(s.row_offsets.begin(), s.row_offsets.end(), s.row_offsets.begin());
  return csr(rows, cols, std::move(s));
}

std::size_t Matrix::stored_values() const {
  if (is_dense()) return rows_ * cols_;
  return csr_values().values.size();
}

Vector Matrix::multiply(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != cols_) fail(ErrorKind::Dimension, "matvec size mismatch");
  if (is_dense()) return dense_values() * x;
  Vector y(idx(rows_));
  for (std::size_t i = 0; i < rows_; ++i) y[idx(i)] = row_dot(i, x);
  return y;
}

Vector Matrix::multiply_transpose(const Vector& y) const {
  if (static_cast<std::size_t>(y.size()) != rows_) fail(ErrorKind::Dimension, "transpose matvec size mismatch");
  if (is_dense()) return dense_values().transpose() * y;
  Vector x = Vector::Zero(idx(cols_));
  for (std::size_t i = 0; i < rows_; ++i) add_scaled_row(i, y[idx(i)], x);
  return x;
}

double Matrix::row_dot(std::size_t i, const Vector& x) const {
  if (const auto* d = std::get_if<DenseMatrix>(&storage_)) return d->row(idx(i)).dot(x);
  const auto& s = std::get<CsrStorage>(storage_);
  double acc = 0.0;
  for (std::size_t k = s.row_offsets[i]; k < s.row_offsets[i + 1]; ++k) acc += s.values[k] * x[idx(s.col_indices[k])];
  return acc;
}

void Matrix::add_scaled_row(std::size_t i, double scale, Vector& out) const {
  if (const auto* d = std::get_if<DenseMatrix>(&storage_)) {
    out.noalias() += scale * d->row(idx(i)).transpose();
    return;
  }
  const auto& s = std::get<CsrStorage>(storage_);
  for (std::size_t k = s.row_offsets[i]; k < s.row_offsets[i + 1]; ++k) out[idx(s.col_indices[k])] += scale * s.values[k];
}

double Matrix::row_norm_sq(std::size_t i) const {
  if (const auto* d = std::get_if<DenseMatrix>(&storage_)) return d->row(idx(i)).squaredNorm();
  const auto& s = std::get<CsrStorage>(storage_);
  double acc = 0.0;
  for (std::size_t k = s.row_offsets[i]; k < s.row_offsets[i + 1]; ++k) acc += s.values[k] * s.values[k];
  return acc;
}

std::vector<double> Matrix::row_norms_sq() const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = row_norm_sq(i);
  return out;
}

double Matrix::frobenius_sq() const {
  if (is_dense()) return dense_values().squaredNorm();
  double acc = 0.0;
  for (double v : csr_values().values) acc += v * v;
  return acc;
}

void Matrix::add_row_outer(std::size_t i, double scale, DenseMatrix& out) const {
  if (const auto* d = std::get_if<DenseMatrix>(&storage_)) {
    auto row = d->row(idx(i));
    out.noalias() += scale * row.transpose() * row;
    return;
  }
  const auto& s = std::get<CsrStorage>(storage_);
  for (std::size_t p = s.row_offsets[i]; p < s.row_offsets[i + 1]; ++p) {
    const double vp = scale * s.values[p];
    const auto cp = idx(s.col_indices[p]);
    for (std::size_t q = s.row_offsets[i]; q < s.row_offsets[i + 1]; ++q) {
      out(cp, idx(s.col_indices[q])) += vp * s.values[q];
    }
  }
}

DenseMatrix Matrix::weighted_gram(const std::vector<double>& weights) const {
  if (weights.size() != rows_) fail(ErrorKind::Dimension, "weighted_gram weight count mismatch");
  if (const auto* d = std::get_if<DenseMatrix>(&storage_)) {
    Eigen::Map<const Eigen::VectorXd> w(weights.data(), idx(rows_));
    return d->transpose() * w.asDiagonal() * (*d);
  }
  DenseMatrix g = DenseMatrix::Zero(idx(cols_), idx(cols_));
  for (std::size_t i = 0; i < rows_; ++i) {
    if (weights[i] != 0.0) add_row_outer(i, weights[i], g);
  }
  return g;
}

DenseMatrix Matrix::gram() const {
  if (const auto* d = std::get_if<DenseMatrix>(&storage_)) {
    DenseMatrix g = DenseMatrix::Zero(idx(cols_), idx(cols_));
    g.selfadjointView<Eigen::Lower>().rankUpdate(d->transpose());
    return g.selfadjointView<Eigen::Lower>();
  }
  return weighted_gram(std::vector<double>(rows_, 1.0));
}

DenseMatrix Matrix::to_dense() const {
  if (is_dense()) return dense_values();
  DenseMatrix out = DenseMatrix::Zero(idx(rows_), idx(cols_));
  for (std::size_t i = 0; i < rows_; ++i) {
    for_each_in_row(i, [&](std::size_t j, double v) { out(idx(i), idx(j)) = v; });
  }
  return out;
}

Matrix Matrix::to_csr() const {
  if (is_csr()) return *this;
  std::vector<Triplet> t;
  const auto& d = dense_values();
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      if (d(idx(i), idx(j)) != 0.0) t.push_back({i, j, d(idx(i), idx(j))});
    }
  }
  return from_triplets(rows_, cols_, std::move(t));
}

SpectrumSummary summarize_spectrum(std::vector<double> eigs) {
  if (eigs.empty()) fail(ErrorKind::Dimension, "empty spectrum");
  std::sort(eigs.begin(), eigs.end());
  SpectrumSummary s;
  s.lambda_min = eigs.front();
  s.lambda_max = eigs.back();
  s.frob_sq = std::accumulate(eigs.begin(), eigs.end(), 0.0);
  s.lambda_ave = s.frob_sq / static_cast<double>(eigs.size());
  s.op_sq = s.lambda_max;
  if (!(s.lambda_min > 0.0)) fail(ErrorKind::Singular, "spectrum has a nonpositive eigenvalue");
  s.kappa = s.lambda_max / s.lambda_min;
  s.kappa_bar = s.lambda_ave / s.lambda_min;
  s.eigs = std::move(eigs);
  return s;
}

SpectrumSummary gram_spectrum(const Matrix& a) {
  if (a.cols() == 0 || a.rows() == 0) fail(ErrorKind::Dimension, "matrix must be nonempty");
  if (a.rows() < a.cols()) {
    fail(ErrorKind::Dimension, "need n >= d, got n=" + std::to_string(a.rows()) + " d=" + std::to_string(a.cols()));
  }
  auto eigs = jacobi_eigenvalues(a.gram());
  if (!(eigs.front() > 1e-12 * eigs.back())) {
    fail(ErrorKind::Singular, "singular Gram matrix (lambda_min=" + std::to_string(eigs.front()) +
                                  ", lambda_max=" + std::to_string(eigs.back()) + ")");
  }
  SpectrumSummary s = summarize_spectrum(std::move(eigs));
  s.frob_sq = a.frobenius_sq();
  return s;
}

Vector least_squares_solution(const Matrix& a, const Vector& b) {
  if (a.rows() < a.cols() || a.cols() == 0) fail(ErrorKind::Dimension, "least squares needs n >= d >= 1");
  if (static_cast<std::size_t>(b.size()) != a.rows()) fail(ErrorKind::Dimension, "rhs length mismatch");
  const DenseMatrix g = a.gram();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
  const auto diag = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || !(diag.minCoeff() > 1e-12 * diag.cwiseAbs().maxCoeff())) {
    fail(ErrorKind::Singular, "singular Gram matrix in least squares solve");
  }
  Vector x = ldlt.solve(a.multiply_transpose(b));
  Vector correction = ldlt.solve(a.multiply_transpose(b - a.multiply(x)));
  return x + correction;
}

}  // namespace mkhbm
