// SPDX-License-Identifier: Apache-2.0
#include "mkhbm/concentration.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

#include "mkhbm/error.hpp"
#include "mkhbm/parallel.hpp"

namespace mkhbm {

namespace {

constexpr double kE = std::numbers::e;
constexpr std::size_t kTrialBlock = 64;
constexpr double kMaxSampledBatch = 1e15;  // counts stay exact in doubles

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  const double n = static_cast<double>(xs.size());
  if (xs.empty()) return m;
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return m;
}

// sqrt(E X^2) and its delta-method standard error from samples of X.
Moments root_mean_square(const std::vector<double>& xs) {
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = xs[i] * xs[i];
  const Moments m2 = moments(sq);
  Moments r;
  r.mean = std::sqrt(m2.mean);
  r.se = r.mean > 0.0 ? m2.se / (2.0 * r.mean) : 0.0;
  return r;
}

void check_batch(std::size_t batch) {
  if (batch == 0) fail(ErrorKind::Parameter, "batch size must be at least 1");
  if (static_cast<double>(batch) > kMaxSampledBatch) {
    fail(ErrorKind::Parameter, "batch size " + std::to_string(batch) + " is too large");
  }
}

// (1/B) sum_{j in S} p_j^{-1} a_j a_j^T, accumulated per distinct row.
DenseMatrix sampled_gram(const Matrix& a, const Sampler& sampler, std::size_t batch, RngStream& rng) {
  std::vector<std::uint64_t> counts;
  if (batch <= a.rows()) {
    std::vector<std::size_t> draws;
    draw_batch_into(sampler, batch, rng, draws);
    counts.assign(a.rows(), 0);
    for (std::size_t j : draws) ++counts[j];
  } else {
    draw_counts(sampler, batch, rng, counts);
  }
  const auto d = static_cast<Eigen::Index>(a.cols());
  DenseMatrix h = DenseMatrix::Zero(d, d);
  const double inv_b = 1.0 / static_cast<double>(batch);
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] != 0) a.add_row_outer(j, static_cast<double>(counts[j]) * inv_b / sampler.probs[j], h);
  }
  return h;
}

}  // namespace

BernsteinBounds bernstein_bounds(double v, double w_max, std::size_t d1, std::size_t d2) {
  if (!(v >= 0.0) || !(w_max >= 0.0)) fail(ErrorKind::Parameter, "variance and norm bounds must be nonnegative");
  if (d1 == 0 || d2 == 0) fail(ErrorKind::Dimension, "matrix dimensions must be at least 1");
  const double lg = std::log(static_cast<double>(d1 + d2));
  return {std::sqrt(2.0 * v * lg) + w_max * lg / 3.0, std::sqrt(2.0 * kE * v * lg) + 4.0 * kE * w_max * lg};
}

double product_bound(const std::vector<double>& q, const std::vector<double>& sigma) {
  if (q.size() != sigma.size()) fail(ErrorKind::Dimension, "q and sigma must have the same length");
  if (q.empty()) return 1.0;
  double big_q = 1.0, v = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] >= 0.0) || !(sigma[i] >= 0.0)) fail(ErrorKind::Parameter, "q_i and sigma_i must be nonnegative");
    big_q *= q[i];
    v += sigma[i] * sigma[i];
  }
  const double lk = std::log(static_cast<double>(q.size()));
  return big_q * std::exp(std::sqrt(2.0 * v * std::max(2.0 * v, lk)));
}

BatchBound required_batch(double frob_sq, double op_sq, std::size_t d, double eta, double delta) {
  if (!(delta > 0.0)) fail(ErrorKind::Parameter, "delta must be positive");
  if (d == 0) fail(ErrorKind::Dimension, "dimension must be at least 1");
  BatchBound b;
  b.branch_linear = frob_sq * op_sq / (delta * delta);
  b.branch_sqrt = std::sqrt(4.0 * frob_sq * frob_sq / (delta * delta));
  b.raw = 8.0 * kE * eta * std::log(2.0 * static_cast<double>(d)) * std::max(b.branch_linear, b.branch_sqrt);
  b.batch = std::ceil(b.raw);
  return b;
}

double w_max_bound(double frob_sq, double eta, std::size_t batch) {
  check_batch(batch);
  return 2.0 * eta * frob_sq / static_cast<double>(batch);
}

double w_variance_bound(double frob_sq, double op_sq, double eta, std::size_t batch) {
  check_batch(batch);
  return eta * frob_sq * op_sq / static_cast<double>(batch);
}

double w_variance_exact(const Matrix& a, const Sampler& sampler, std::size_t batch) {
  check_batch(batch);
  if (sampler.size() != a.rows()) fail(ErrorKind::Dimension, "sampler does not match matrix");
  std::vector<double> weights(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) weights[i] = a.row_norm_sq(i) / sampler.probs[i];
  const DenseMatrix g = a.gram();
  const DenseMatrix m = a.weighted_gram(weights) - g * g;
  return symmetric_spectral_norm(m) / static_cast<double>(batch);
}

double w_rms_analytic_bound(double frob_sq, double op_sq, std::size_t d, double eta, std::size_t batch) {
  const double lg = std::log(2.0 * static_cast<double>(d));
  const double b = static_cast<double>(batch);
  check_batch(batch);
  return std::sqrt(2.0 * kE * eta * frob_sq * op_sq * lg / b) + 8.0 * kE * eta * frob_sq * lg / b;
}

DenseMatrix sample_W(const Matrix& a, const DenseMatrix& gram, const Sampler& sampler, std::size_t batch,
                     RngStream& rng) {
  check_batch(batch);
  return gram - sampled_gram(a, sampler, batch, rng);
}

WSample sample_W_norm(const Matrix& a, const Sampler& sampler, std::size_t batch, std::size_t trials,
                      std::uint64_t seed, std::size_t jobs) {
  if (trials == 0) fail(ErrorKind::Parameter, "need at least one trial");
  check_batch(batch);
  const DenseMatrix g = a.gram();
  const auto d = g.rows();
  std::vector<double> norms(trials);

  // Elementwise sums are reduced block by block in index order, so the
  // result does not depend on the number of worker threads.
  const std::size_t blocks = (trials + kTrialBlock - 1) / kTrialBlock;
  std::vector<DenseMatrix> sums(blocks), sq_sums(blocks);
  parallel_for(blocks, jobs, [&](std::size_t blk) {
    DenseMatrix s = DenseMatrix::Zero(d, d), s2 = DenseMatrix::Zero(d, d);
    const std::size_t end = std::min(trials, (blk + 1) * kTrialBlock);
    for (std::size_t t = blk * kTrialBlock; t < end; ++t) {
      auto rng = RngStream::derive(seed, {t});
      const DenseMatrix w = sample_W(a, g, sampler, batch, rng);
      norms[t] = symmetric_spectral_norm(w);
      s += w;
      s2 += w.cwiseProduct(w);
    }
    sums[blk] = std::move(s);
    sq_sums[blk] = std::move(s2);
  });
  DenseMatrix total = DenseMatrix::Zero(d, d), total_sq = DenseMatrix::Zero(d, d);
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    total += sums[blk];
    total_sq += sq_sums[blk];
  }

  WSample out;
  out.trials = trials;
  const Moments m1 = moments(norms);
  const Moments rms = root_mean_square(norms);
  out.mean_norm = m1.mean;
  out.mean_norm_se = m1.se;
  out.rms_norm = rms.mean;
  out.rms_norm_se = rms.se;
  const double n = static_cast<double>(trials);
  const DenseMatrix mean = total / n;
  out.mean_matrix_frob = mean.norm();
  if (trials > 1) {
    const DenseMatrix var = (total_sq - n * mean.cwiseProduct(mean)) / (n - 1.0);
    out.mean_matrix_frob_se = std::sqrt(var.cwiseMax(0.0).sum() / n);
  }
  return out;
}

ConcentrationReport verify_concentration(const Matrix& a, const Sampler& sampler, double delta, std::size_t batch,
                                         std::size_t trials, std::uint64_t seed, std::size_t jobs) {
  const SpectrumSummary s = gram_spectrum(a);
  ConcentrationReport r;
  r.delta = delta;
  r.eta = sampler.eta;
  r.required = required_batch(s.frob_sq, s.op_sq, a.cols(), sampler.eta, delta);
  if (batch == 0) {
    if (r.required.batch > kMaxSampledBatch) {
      fail(ErrorKind::Parameter, "required batch " + std::to_string(r.required.batch) + " is too large to sample");
    }
    batch = static_cast<std::size_t>(r.required.batch);
  }
  r.batch = batch;
  r.v_exact = w_variance_exact(a, sampler, batch);
  r.v_bound = w_variance_bound(s.frob_sq, s.op_sq, sampler.eta, batch);
  r.w_max = w_max_bound(s.frob_sq, sampler.eta, batch);
  r.bernstein = bernstein_bounds(r.v_exact, r.w_max, a.cols(), a.cols());
  r.analytic_rms_bound = w_rms_analytic_bound(s.frob_sq, s.op_sq, a.cols(), sampler.eta, batch);
  r.empirical = sample_W_norm(a, sampler, batch, trials, seed, jobs);
  r.rms_within_delta = r.empirical.rms_norm <= delta;
  return r;
}

ProductCheck whitened_product_check(const Matrix& a, const Sampler& sampler, const MomentumParams& params,
                                    std::size_t batch, std::size_t k, std::size_t trials, std::uint64_t seed) {
  using CMatrix = Eigen::MatrixXcd;
  using cd = std::complex<double>;
  if (trials == 0 || k == 0) fail(ErrorKind::Parameter, "need k >= 1 and at least one trial");
  check_batch(batch);
  const DenseMatrix g = a.gram();
  const SymmetricEigen eig = jacobi_eigen(g, true);
  const auto d = static_cast<Eigen::Index>(eig.values.size());

  // Columns j and d+j of C are the eigenvectors (z_j^+ e_j, e_j) and (z_j^- e_j, e_j).
  CMatrix c = CMatrix::Zero(2 * d, 2 * d), c_inv = CMatrix::Zero(2 * d, 2 * d);
  Eigen::VectorXcd diag(2 * d);
  double q = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const BlockEig e = block_eig(eig.values[static_cast<std::size_t>(j)], params);
    if (!e.is_complex_pair) fail(ErrorKind::NonDiagonalizable, "whitening needs every block to be complex");
    const cd zp(e.z_plus.re, e.z_plus.im), zm(e.z_minus.re, e.z_minus.im);
    const cd gap = zp - zm;
    c(j, j) = zp;
    c(j, d + j) = zm;
    c(d + j, j) = 1.0;
    c(d + j, d + j) = 1.0;
    c_inv(j, j) = 1.0 / gap;
    c_inv(j, d + j) = -zm / gap;
    c_inv(d + j, j) = -1.0 / gap;
    c_inv(d + j, d + j) = zp / gap;
    diag[j] = zp;
    diag[d + j] = zm;
    q = std::max(q, e.modulus());
  }
  const DenseMatrix& v = eig.vectors;

  std::vector<double> product_norms(trials), deviations(trials * k);
  for (std::size_t t = 0; t < trials; ++t) {
    auto rng = RngStream::derive(seed, {t});
    CMatrix prod = CMatrix::Identity(2 * d, 2 * d);
    for (std::size_t i = 0; i < k; ++i) {
      const DenseMatrix h = v.transpose() * sampled_gram(a, sampler, batch, rng) * v;
      const CMatrix x = c_inv * transition_matrix(h, params).cast<cd>() * c;
      CMatrix dev = x;
      dev.diagonal() -= diag;
      deviations[t * k + i] = Eigen::JacobiSVD<CMatrix>(dev).singularValues()[0];
      prod = x * prod;
    }
    product_norms[t] = Eigen::JacobiSVD<CMatrix>(prod).singularValues()[0];
  }

  ProductCheck out;
  out.k = k;
  out.trials = trials;
  out.batch = batch;
  out.q = q;
  const Moments rms = root_mean_square(deviations);
  out.sigma = rms.mean / q;
  out.sigma_se = rms.se / q;
  out.bound = product_bound(std::vector<double>(k, q), std::vector<double>(k, out.sigma));
  const Moments m = moments(product_norms);
  out.mean_norm = m.mean;
  out.mean_norm_se = m.se;
  return out;
}

}  // namespace mkhbm
