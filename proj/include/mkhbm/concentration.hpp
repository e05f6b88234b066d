// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mkhbm/linalg.hpp"
#include "mkhbm/momentum_theory.hpp"
#include "mkhbm/sampling.hpp"

namespace mkhbm {

struct BernsteinBounds {
  double mean_norm;     // bound on E||Z||
  double rms_norm;      // bound on sqrt(E||Z||^2)
};

/// Matrix Bernstein bounds for a sum Z of independent, centred d1 x d2
/// matrices with variance statistic v and ||Z_j|| <= w_max almost surely.
BernsteinBounds bernstein_bounds(double v, double w_max, std::size_t d1, std::size_t d2);

/// Bound on E||X_k ... X_1|| given ||E X_i|| <= q_i and
/// sqrt(E||X_i - E X_i||^2) <= sigma_i q_i. An empty product gives 1.
double product_bound(const std::vector<double>& q, const std::vector<double>& sigma);

/// Batch size making sqrt(E||W||^2) <= delta (ceil applied in .batch).
BatchBound required_batch(double frob_sq, double op_sq, std::size_t d, double eta, double delta);

/// Almost-sure bound 2 eta ||A||_F^2 / B on each summand ||W_j||.
double w_max_bound(double frob_sq, double eta, std::size_t batch);
/// eta ||A||_F^2 ||A||^2 / B, an upper bound on the variance statistic of W.
double w_variance_bound(double frob_sq, double op_sq, double eta, std::size_t batch);
/// Exact variance statistic ||E W^2|| = ||sum_i (||a_i||^2/p_i) a_i a_i^T - (A^T A)^2|| / B.
double w_variance_exact(const Matrix& a, const Sampler& sampler, std::size_t batch);
/// sqrt(2e v log 2d) + 4e W log 2d with the analytic v and W bounds above.
double w_rms_analytic_bound(double frob_sq, double op_sq, std::size_t d, double eta, std::size_t batch);

/// W = A^T A - (1/B) sum_{j in S} p_j^{-1} a_j a_j^T for one sampled batch.
DenseMatrix sample_W(const Matrix& a, const DenseMatrix& gram, const Sampler& sampler, std::size_t batch,
                     RngStream& rng);

struct WSample {
  std::size_t trials = 0;
  double mean_norm = 0.0;     // E||W||
  double mean_norm_se = 0.0;
  double rms_norm = 0.0;      // sqrt(E||W||^2)
  double rms_norm_se = 0.0;   // delta-method standard error
  double mean_matrix_frob = 0.0;     // ||mean of W||_F, should be ~0
  double mean_matrix_frob_se = 0.0;  // its Monte Carlo scale
};

WSample sample_W_norm(const Matrix& a, const Sampler& sampler, std::size_t batch, std::size_t trials,
                      std::uint64_t seed, std::size_t jobs = 1);

struct ConcentrationReport {
  double delta = 0.0;
  double eta = 1.0;
  std::size_t batch = 0;
  BatchBound required;         // B needed for delta
  double v_exact = 0.0;
  double v_bound = 0.0;
  double w_max = 0.0;
  BernsteinBounds bernstein{};  // with v_exact and w_max
  double analytic_rms_bound = 0.0;
  WSample empirical;
  bool rms_within_delta = false;  // empirical.rms_norm <= delta
};

/// Samples W at `batch` (0 means the required batch for delta) and compares
/// the empirical moments against all bounds.
ConcentrationReport verify_concentration(const Matrix& a, const Sampler& sampler, double delta, std::size_t batch,
                                         std::size_t trials, std::uint64_t seed, std::size_t jobs = 1);

struct ProductCheck {
  std::size_t k = 0;
  std::size_t trials = 0;
  std::size_t batch = 0;
  double q = 0.0;              // ||E X_i|| = sqrt(beta) (HBM) in the whitened basis
  double sigma = 0.0;          // empirical sqrt(E||X - E X||^2) / q
  double sigma_se = 0.0;
  double bound = 0.0;          // product_bound with (q, sigma) repeated k times
  double mean_norm = 0.0;      // empirical E||X_k ... X_1||
  double mean_norm_se = 0.0;
};

/// Whitens the per-iteration random transition Y_S with the eigenvector
/// matrix of E[Y_S] = T, so E[X_i] is diagonal, and compares the mean norm
/// of k-fold products with product_bound.
ProductCheck whitened_product_check(const Matrix& a, const Sampler& sampler, const MomentumParams& params,
                                    std::size_t batch, std::size_t k, std::size_t trials, std::uint64_t seed);

}  // namespace mkhbm
