// SPDX-License-Identifier: Apache-2.0
#include "mkhbm/problems.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mkhbm/error.hpp"
#include "mkhbm/rng.hpp"

namespace mkhbm {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void check_spectrum_args(std::size_t d, double kappa) {
  if (d < 2) fail(ErrorKind::Parameter, "prescribed spectra need d >= 2");
  if (!(kappa > 1.0)) fail(ErrorKind::Parameter, "kappa must exceed 1");
}

// Orthonormal columns from the QR factorization of a Gaussian matrix, with
// R's diagonal forced positive so the factor is unique given the draws.
Eigen::MatrixXd orthonormal_factor(std::size_t rows, std::size_t cols, RngStream& rng) {
  Eigen::MatrixXd g(idx(rows), idx(cols));
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(idx(rows), idx(cols));
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Vector gaussian_vector(std::size_t n, RngStream& rng) {
  Vector v(idx(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return v;
}

}  // namespace

std::vector<double> spectrum_exponential(std::size_t d, double kappa, double rho) {
  check_spectrum_args(d, kappa);
  if (!(rho > 0.0 && rho <= 1.0)) fail(ErrorKind::Parameter, "exponential decay needs rho in (0, 1]");
  std::vector<double> out(d);
  const double span = static_cast<double>(d - 1);
  for (std::size_t j = 1; j <= d; ++j) {
    out[j - 1] = 1.0 + (static_cast<double>(j - 1) / span) * (kappa - 1.0) * std::pow(rho, static_cast<double>(d - j));
  }
  return out;
}

std::vector<double> spectrum_algebraic(std::size_t d, double kappa, double rho) {
  check_spectrum_args(d, kappa);
  if (!(rho > 0.0)) fail(ErrorKind::Parameter, "algebraic decay needs rho > 0");
  std::vector<double> out(d);
  const double span = static_cast<double>(d - 1);
  for (std::size_t j = 1; j <= d; ++j) {
    out[j - 1] = 1.0 + std::pow(static_cast<double>(j - 1) / span, rho) * (kappa - 1.0);
  }
  return out;
}

ProblemInstance synth_svd_problem(std::size_t n, std::size_t d, const std::vector<double>& squared_singular_values,
                                  std::uint64_t seed) {
  if (d == 0 || n < d) fail(ErrorKind::Dimension, "synthetic problems need n >= d >= 1");
  if (squared_singular_values.size() != d) fail(ErrorKind::Dimension, "need exactly d squared singular values");
  for (double v : squared_singular_values) {
    if (!(v > 0.0)) fail(ErrorKind::Parameter, "squared singular values must be positive");
  }
  auto u_rng = RngStream::derive(seed, {1});
  auto v_rng = RngStream::derive(seed, {2});
  auto x_rng = RngStream::derive(seed, {3});
  const Eigen::MatrixXd u = orthonormal_factor(n, d, u_rng);
  const Eigen::MatrixXd v = orthonormal_factor(d, d, v_rng);
  Eigen::VectorXd sv(idx(d));
  for (std::size_t j = 0; j < d; ++j) sv[idx(j)] = std::sqrt(squared_singular_values[j]);
  DenseMatrix a = u * sv.asDiagonal() * v.transpose();
  Vector x = gaussian_vector(d, x_rng);

  Matrix m = Matrix::dense(std::move(a));
  Vector b = m.multiply(x);
  GeneratorInfo info{"svd", {{"n", double(n)}, {"d", double(d)}}, seed};
  return assemble_problem(std::move(m), std::move(b), std::move(x), true, std::move(info));
}

ProblemInstance sparse_bernoulli_problem(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) fail(ErrorKind::Dimension, "sparse Bernoulli problem needs n, d >= 1");
  auto rng = RngStream::derive(seed, {1});
  auto x_rng = RngStream::derive(seed, {2});
  std::vector<Triplet> triplets;
  triplets.reserve(n * d / 10 + n);
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < n; ++i) {
    const double scale = rng.bernoulli(0.1) ? 10.0 : 1.0;
    // A zero row has no valid sampling probability; draw the row again.
    do {
      cols.clear();
      for (std::size_t j = 0; j < d; ++j) {
        if (rng.bernoulli(0.1)) cols.push_back(j);
      }
    } while (cols.empty());
    for (std::size_t j : cols) triplets.push_back({i, j, scale});
  }
  Matrix m = Matrix::from_triplets(n, d, std::move(triplets));
  Vector x = gaussian_vector(d, x_rng);
  Vector b = m.multiply(x);
  GeneratorInfo info{"bernoulli", {{"n", double(n)}, {"d", double(d)}}, seed};
  return assemble_problem(std::move(m), std::move(b), std::move(x), true, std::move(info));
}

ProblemInstance make_inconsistent(const ProblemInstance& p, double radius, std::uint64_t seed) {
  if (!p.consistent) fail(ErrorKind::Precondition, "make_inconsistent expects a consistent problem");
  if (!(radius >= 0.0)) fail(ErrorKind::Parameter, "noise radius must be nonnegative");
  GeneratorInfo info = p.info;
  info.params.emplace_back("radius", radius);
  info.params.emplace_back("noise_seed", static_cast<double>(seed));
  if (radius == 0.0) {
    ProblemInstance out = p;
    out.info = std::move(info);
    return out;
  }
  auto rng = RngStream::derive(seed, {4});
  Vector eps = gaussian_vector(p.rows(), rng);
  eps *= radius / eps.norm();
  Vector b = p.a.multiply(p.x_planted) + eps;
  return assemble_problem(p.a, std::move(b), p.x_planted, false, std::move(info));
}

ProblemInstance assemble_problem(Matrix a, Vector b, Vector x_planted, bool consistent, GeneratorInfo info) {
  if (static_cast<std::size_t>(b.size()) != a.rows() || static_cast<std::size_t>(x_planted.size()) != a.cols()) {
    fail(ErrorKind::Dimension, "problem vectors do not match matrix shape");
  }
  ProblemInstance p;
  p.spectrum = gram_spectrum(a);
  p.x_star = consistent ? x_planted : least_squares_solution(a, b);
  p.r = a.multiply(p.x_star) - b;
  p.sigma = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double norm = std::sqrt(a.row_norm_sq(i));
    if (norm > 0.0) p.sigma = std::max(p.sigma, std::abs(p.r[idx(i)]) / norm);
  }
  p.a = std::move(a);
  p.b = std::move(b);
  p.x_planted = std::move(x_planted);
  p.consistent = consistent;
  p.info = std::move(info);
  return p;
}

void validate_problem(const ProblemInstance& p) {
  if (p.consistent) {
    if (p.r.norm() > 1e-10 * p.b.norm()) fail(ErrorKind::Precondition, "consistent problem has nonzero residual");
    if (p.sigma > 1e-10) fail(ErrorKind::Precondition, "consistent problem has nonzero sigma");
  }
  const double scale = p.a.multiply_transpose(p.b).norm();
  if (p.a.multiply_transpose(p.r).norm() > 1e-8 * std::max(scale, 1e-300)) {
    fail(ErrorKind::Precondition, "x_star is not a least-squares minimizer");
  }
}

}  // namespace mkhbm
