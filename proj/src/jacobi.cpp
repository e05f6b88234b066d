// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>

#include "mkhbm/error.hpp"
#include "mkhbm/linalg.hpp"

namespace mkhbm {

namespace {

constexpr int kMaxSweeps = 64;

double off_diagonal_sq(const DenseMatrix& a) {
  double acc = 0.0;
  for (Eigen::Index p = 0; p < a.rows(); ++p) {
    for (Eigen::Index q = p + 1; q < a.cols(); ++q) acc += a(p, q) * a(p, q);
  }
  return acc;
}

}  // namespace

SymmetricEigen jacobi_eigen(const DenseMatrix& symmetric, bool want_vectors) {
  if (symmetric.rows() != symmetric.cols()) fail(ErrorKind::Dimension, "Jacobi needs a square matrix");
  const Eigen::Index n = symmetric.rows();
  DenseMatrix a = 0.5 * (symmetric + symmetric.transpose());
  DenseMatrix v;
  if (want_vectors) v = DenseMatrix::Identity(n, n);

  const double scale_sq = a.squaredNorm();
  // Quadratic convergence makes the last sweep nearly free, so iterate until
  // the off-diagonal mass is at roundoff level.
  const double target = scale_sq * 1e-34;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_sq(a) <= target) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p), aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        if (want_vectors) {
          for (Eigen::Index k = 0; k < n; ++k) {
            const double vkp = v(k, p), vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  SymmetricEigen out;
  out.values.reserve(order.size());
  for (auto i : order) out.values.push_back(a(i, i));
  if (want_vectors) {
    out.vectors.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) out.vectors.col(j) = v.col(order[static_cast<std::size_t>(j)]);
  }
  return out;
}

std::vector<double> jacobi_eigenvalues(const DenseMatrix& symmetric) {
  return jacobi_eigen(symmetric, false).values;
}

double symmetric_spectral_norm(const DenseMatrix& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  const auto values = jacobi_eigenvalues(symmetric);
  return std::max(std::abs(values.front()), std::abs(values.back()));
}

}  // namespace mkhbm
