// SPDX-License-Identifier: Apache-2.0
// Reference computations used only by the tests. They are deliberately
// naive and share no code with the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat to_rows(const Eigen::MatrixXd& m) {
  Mat out(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

// Gaussian elimination with full (row and column) pivoting.
inline std::vector<double> solve_full_pivot(Mat a, std::vector<double> b) {
  const std::size_t n = a.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pr = k, pc = k;
    double best = 0.0;
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j)
        if (std::abs(a[i][j]) > best) best = std::abs(a[i][j]), pr = i, pc = j;
    std::swap(a[k], a[pr]);
    std::swap(b[k], b[pr]);
    for (auto& row : a) std::swap(row[k], row[pc]);
    std::swap(perm[k], perm[pc]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> y(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * y[j];
    y[i] = s / a[i][i];
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[perm[i]] = y[i];
  return x;
}

// Classical Jacobi: always annihilate the largest off-diagonal entry.
inline std::vector<double> classical_jacobi(Mat a, double tol = 1e-15) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100000; ++sweep) {
    std::size_t p = 0, q = 1;
    double off = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      scale = std::max(scale, std::abs(a[i][i]));
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::abs(a[i][j]) > off) off = std::abs(a[i][j]), p = i, q = j;
    }
    if (n < 2 || off <= tol * std::max(scale, 1e-300)) break;
    const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
    const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
    for (std::size_t k = 0; k < n; ++k) {
      const double akp = a[k][p], akq = a[k][q];
      a[k][p] = c * akp - s * akq;
      a[k][q] = s * akp + c * akq;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double apk = a[p][k], aqk = a[q][k];
      a[p][k] = c * apk - s * aqk;
      a[q][k] = s * apk + c * aqk;
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a[i][i];
  std::sort(eig.begin(), eig.end());
  return eig;
}

// Spectral condition number of a complex matrix via singular values.
inline double cond2(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

// Roots of z^2 - t z + q by the textbook formula in complex arithmetic.
inline std::pair<std::complex<double>, std::complex<double>> quadratic_roots(double t, double q) {
  const std::complex<double> disc = std::sqrt(std::complex<double>(t * t - 4.0 * q, 0.0));
  return {(t + disc) / 2.0, (t - disc) / 2.0};
}

// Least-squares slope of log(values[k]) against k over [k0, k1].
inline double log_slope(const std::vector<double>& values, std::size_t k0, std::size_t k1) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(k1 - k0 + 1);
  for (std::size_t k = k0; k <= k1; ++k) {
    const double x = static_cast<double>(k), y = std::log(values[k]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace oracle
