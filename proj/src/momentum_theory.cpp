// SPDX-License-Identifier: Apache-2.0
#include "mkhbm/momentum_theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mkhbm/error.hpp"

namespace mkhbm {

namespace {

constexpr double kE = std::numbers::e;

void check_extremes(double lambda_max, double lambda_min) {
  if (!(lambda_min > 0.0) || !(lambda_max >= lambda_min) || !std::isfinite(lambda_max)) {
    fail(ErrorKind::Parameter, "need lambda_max >= lambda_min > 0, got lambda_max=" + std::to_string(lambda_max) +
                                   " lambda_min=" + std::to_string(lambda_min));
  }
}

void check_gamma(double gamma, double lambda_min) {
  if (!(gamma > 0.0 && gamma < lambda_min)) {
    fail(ErrorKind::Parameter, "gamma must lie in (0, lambda_min), got " + std::to_string(gamma));
  }
}

void check_beta_open(double beta, const char* what) {
  if (!(beta > 0.0 && beta < 1.0)) fail(ErrorKind::Parameter, std::string(what) + " needs 0 < beta < 1");
}

void check_k_star(double k_star) {
  if (!(k_star > 1.0)) fail(ErrorKind::Parameter, "k* must exceed 1 (log k* appears in a denominator)");
}

double log2d(std::size_t d) {
  if (d == 0) fail(ErrorKind::Dimension, "dimension must be at least 1");
  return std::log(2.0 * static_cast<double>(d));
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::GD: return "gd";
    case Method::HBM: return "hbm";
    case Method::NAG: return "nag";
  }
  return "?";
}

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::Optimal: return "optimal";
    case Provenance::Perturbed: return "perturbed";
    case Provenance::Manual: return "manual";
  }
  return "?";
}

MomentumParams hbm_params_optimal(double lambda_max, double lambda_min) {
  check_extremes(lambda_max, lambda_min);
  const double sa = 2.0 / (std::sqrt(lambda_max) + std::sqrt(lambda_min));
  const double sk = std::sqrt(lambda_max / lambda_min);
  const double sb = (sk - 1.0) / (sk + 1.0);
  MomentumParams p;
  p.method = Method::HBM;
  p.alpha = sa * sa;
  p.beta = sb * sb;
  p.L = lambda_max;
  p.ell = lambda_min;
  p.provenance = Provenance::Optimal;
  p.defective = true;
  return p;
}

MomentumParams hbm_params_perturbed(double lambda_max, double lambda_min, double gamma) {
  check_extremes(lambda_max, lambda_min);
  check_gamma(gamma, lambda_min);
  const double L = lambda_max + gamma, ell = lambda_min - gamma;
  const double sa = 2.0 / (std::sqrt(L) + std::sqrt(ell));
  MomentumParams p;
  p.method = Method::HBM;
  p.alpha = sa * sa;
  const double sb = p.alpha * (L - ell) / 4.0;
  p.beta = sb * sb;
  p.gamma = gamma;
  p.L = L;
  p.ell = ell;
  p.provenance = Provenance::Perturbed;
  return p;
}

MomentumParams nag_params(double lambda_max, double lambda_min, double gamma) {
  check_extremes(lambda_max, lambda_min);
  if (gamma != 0.0) check_gamma(gamma, lambda_min);
  const double L = lambda_max + gamma, ell = lambda_min - gamma;
  const double r = std::sqrt(L / ell);
  MomentumParams p;
  p.method = Method::NAG;
  p.alpha = 1.0 / L;
  p.beta = (r - 1.0) / (r + 1.0);
  p.gamma = gamma;
  p.L = L;
  p.ell = ell;
  p.provenance = gamma == 0.0 ? Provenance::Optimal : Provenance::Perturbed;
  p.defective = gamma == 0.0;
  return p;
}

MomentumParams manual_params(Method method, double alpha, double beta) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorKind::Parameter, "alpha must be positive");
  if (!(beta >= 0.0 && beta < 1.0)) fail(ErrorKind::Parameter, "beta must lie in [0, 1)");
  if (method == Method::GD && beta != 0.0) fail(ErrorKind::Parameter, "gradient descent has beta = 0");
  MomentumParams p;
  p.method = method;
  p.alpha = alpha;
  p.beta = beta;
  return p;
}

AlphaWindow stability_window(double beta, double lambda_max, double lambda_min) {
  check_extremes(lambda_max, lambda_min);
  const double sb = std::sqrt(beta);
  return {(1.0 - sb) * (1.0 - sb) / lambda_min, (1.0 + sb) * (1.0 + sb) / lambda_max};
}

double Complex::abs() const noexcept { return std::hypot(re, im); }

double BlockEig::modulus() const noexcept { return std::max(z_plus.abs(), z_minus.abs()); }

BlockEig block_eig(double lambda, const MomentumParams& params) {
  BlockEig e;
  e.lambda = lambda;
  const double shrink = 1.0 - params.alpha * lambda;
  if (params.method == Method::NAG) {
    e.trace = (1.0 + params.beta) * shrink;
    e.det = params.beta * shrink;
  } else {
    e.trace = 1.0 + params.beta - params.alpha * lambda;
    e.det = params.beta;
  }
  const double t = e.trace, q = e.det;
  const double disc = t * t - 4.0 * q;
  const double scale = t * t + 4.0 * std::abs(q);
  e.defective = std::abs(disc) <= 1e-12 * scale;
  e.re = 0.5 * t;
  if (disc < 0.0 && !e.defective) {
    e.is_complex_pair = true;
    e.im = 0.5 * std::sqrt(-disc);
    e.z_plus = {e.re, e.im};
    e.z_minus = {e.re, -e.im};
  } else if (e.defective) {
    // Within roundoff of a double root; sqrt(disc) would inflate it by ~sqrt(eps).
    e.z_plus = {e.re, 0.0};
    e.z_minus = {e.re, 0.0};
  } else {
    // Larger-magnitude root first, the other from the product to avoid cancellation.
    const double s = std::sqrt(std::max(disc, 0.0));
    const double big = 0.5 * (t + std::copysign(s, t));
    const double small = big != 0.0 ? q / big : 0.0;
    const double hi = std::max(big, small), lo = std::min(big, small);
    e.z_plus = {hi, 0.0};
    e.z_minus = {lo, 0.0};
  }
  return e;
}

DenseMatrix transition_matrix(const DenseMatrix& h, const MomentumParams& params) {
  if (h.rows() != h.cols()) fail(ErrorKind::Dimension, "transition matrix needs a square curvature matrix");
  const Eigen::Index d = h.rows();
  const DenseMatrix eye = DenseMatrix::Identity(d, d);
  DenseMatrix t = DenseMatrix::Zero(2 * d, 2 * d);
  if (params.method == Method::NAG) {
    const DenseMatrix m = eye - params.alpha * h;
    t.topLeftCorner(d, d) = (1.0 + params.beta) * m;
    t.topRightCorner(d, d) = -params.beta * m;
  } else {
    t.topLeftCorner(d, d) = (1.0 + params.beta) * eye - params.alpha * h;
    t.topRightCorner(d, d) = -params.beta * eye;
  }
  t.bottomLeftCorner(d, d) = eye;
  return t;
}

DenseMatrix transition_matrix(const std::vector<double>& eigs, const MomentumParams& params) {
  const Eigen::Map<const Eigen::VectorXd> v(eigs.data(), static_cast<Eigen::Index>(eigs.size()));
  return transition_matrix(DenseMatrix(v.asDiagonal()), params);
}

BlockNorms eigvec_block_norms(double re, double im) {
  const double f2 = 2.0 * (re * re + im * im) + 2.0;
  const double gap = std::sqrt(std::max(f2 * f2 - 16.0 * im * im, 0.0));
  const double smax = std::sqrt(0.5 * (f2 + gap));
  const double smin = 2.0 * std::abs(im) / smax;  // product of singular values is |det| = 2|b|
  return {smax, 1.0 / smin};
}

double eig_cond_exact(const std::vector<double>& eigs, const MomentumParams& params) {
  if (eigs.empty()) fail(ErrorKind::Dimension, "empty spectrum");
  double max_norm = 0.0, max_inv = 0.0;
  for (double lambda : eigs) {
    const BlockEig e = block_eig(lambda, params);
    if (!e.is_complex_pair) {
      fail(ErrorKind::NonDiagonalizable, std::string("block for lambda=") + std::to_string(lambda) +
                                             (e.defective ? " is defective" : " has real eigenvalues") +
                                             "; (alpha, beta) lie outside the stability window");
    }
    const BlockNorms n = eigvec_block_norms(e.re, e.im);
    max_norm = std::max(max_norm, n.norm);
    max_inv = std::max(max_inv, n.inv_norm);
  }
  return max_norm * max_inv;
}

double eig_cond_bound(double lambda_max, double lambda_min, double gamma) {
  const MomentumParams p = hbm_params_perturbed(lambda_max, lambda_min, gamma);
  return 4.0 / (p.alpha * std::sqrt(gamma * (gamma + lambda_max - lambda_min)));
}

TransitionAnalysis analyze_transition(const std::vector<double>& eigs, const MomentumParams& params) {
  if (eigs.empty()) fail(ErrorKind::Dimension, "empty spectrum");
  TransitionAnalysis a;
  a.params = params;
  a.all_complex = true;
  for (double lambda : eigs) {
    a.blocks.push_back(block_eig(lambda, params));
    a.spectral_radius = std::max(a.spectral_radius, a.blocks.back().modulus());
    a.all_complex = a.all_complex && a.blocks.back().is_complex_pair;
  }
  a.kappa_C_exact = a.all_complex ? eig_cond_exact(eigs, params) : std::numeric_limits<double>::infinity();
  a.kappa_C_bound = std::numeric_limits<double>::quiet_NaN();
  if (params.method == Method::HBM && params.provenance == Provenance::Perturbed) {
    a.kappa_C_bound = eig_cond_bound(params.L - params.gamma, params.ell + params.gamma, params.gamma);
  }
  return a;
}

double default_k_star(double kappa) {
  const double target = std::sqrt(kappa);
  if (!(target > kE)) return kE;
  // k / log k is increasing for k > e.
  auto f = [](double k) { return k / std::log(k); };
  double lo = kE, hi = 2.0 * kE;
  while (f(hi) < target) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

BatchBound critical_batch_heuristic(double frob_sq, double op_sq, std::size_t d, const MomentumParams& params) {
  check_beta_open(params.beta, "critical batch heuristic");
  BatchBound b;
  b.branch_linear = frob_sq * op_sq * params.alpha * params.alpha / (params.beta * std::log(1.0 / params.beta));
  b.raw = 16.0 * kE * log2d(d) * b.branch_linear;
  b.batch = std::ceil(b.raw);
  return b;
}

namespace {

BatchBound theorem_bound_impl(double frob_sq, double op_sq, std::size_t d, double eta, const MomentumParams& params,
                              double kappa_C, double k_star, double linear_factor, double sqrt_factor) {
  check_beta_open(params.beta, "batch bound");
  check_k_star(k_star);
  if (!(eta >= 1.0)) fail(ErrorKind::Parameter, "eta must be at least 1");
  if (!(kappa_C >= 1.0) || !std::isfinite(kappa_C)) {
    fail(ErrorKind::NonDiagonalizable, "batch bound needs a finite eigenvector condition number");
  }
  const double common = params.alpha * params.alpha * kappa_C * kappa_C * k_star / (params.beta * std::log(k_star));
  BatchBound b;
  b.branch_linear = linear_factor * frob_sq * op_sq * common;
  b.branch_sqrt = std::sqrt(sqrt_factor * frob_sq * frob_sq * common);
  b.raw = 16.0 * kE * eta * log2d(d) * std::max(b.branch_linear, b.branch_sqrt);
  b.batch = std::ceil(b.raw);
  b.delta = rate_loss_delta(params.beta, k_star);
  return b;
}

}  // namespace

BatchBound theorem_batch_bound(double frob_sq, double op_sq, std::size_t d, double eta, const MomentumParams& params,
                               double kappa_C, double k_star) {
  return theorem_bound_impl(frob_sq, op_sq, d, eta, params, kappa_C, k_star, 1.0, 2.0);
}

BatchBound nag_batch_bound(double frob_sq, double op_sq, std::size_t d, double eta, const MomentumParams& params,
                           double kappa_C, double k_star) {
  return theorem_bound_impl(frob_sq, op_sq, d, eta, params, kappa_C, k_star, 5.0, 10.0);
}

double rate_loss_delta(double beta, double k_star) {
  check_beta_open(beta, "rate loss");
  check_k_star(k_star);
  return 2.0 * std::log(k_star) / (k_star * std::log(1.0 / beta));
}

double envelope_factor(double k, double k_star) { return std::max(k, std::pow(k_star, k / k_star)); }

double nag_rate(const MomentumParams& params) {
  if (!(params.ell > 0.0 && params.L >= params.ell)) fail(ErrorKind::Parameter, "NAG rate needs L >= l > 0");
  return 1.0 - 1.0 / (std::sqrt(params.L / params.ell) + 1.0);
}

double inconsistent_horizon_bound(double r_norm, double sigma, double frob_sq, double eta, std::size_t d,
                                  const MomentumParams& params, double kappa_C, double k_star, double batch) {
  if (!(batch >= 1.0)) fail(ErrorKind::Parameter, "batch size must be at least 1");
  const double delta = rate_loss_delta(params.beta, k_star);
  if (!(delta < 1.0)) {
    fail(ErrorKind::Precondition, "horizon bound needs delta = 2 log(k*)/(k* log(1/beta)) < 1, got " +
                                      std::to_string(delta) + "; increase k*");
  }
  const double logd1 = std::log(static_cast<double>(d) + 1.0);
  const double lead = params.alpha * kappa_C * (k_star + 1.0) / (1.0 - std::pow(std::sqrt(params.beta), 1.0 - delta));
  const double noise = std::sqrt(2.0 * eta * frob_sq * logd1 * r_norm * r_norm / batch) +
                       eta * frob_sq * logd1 * sigma / (3.0 * batch);
  return lead * noise;
}

}  // namespace mkhbm
