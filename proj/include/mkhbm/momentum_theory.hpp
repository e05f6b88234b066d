// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>
#include <vector>

#include "mkhbm/linalg.hpp"

namespace mkhbm {

enum class Method { GD, HBM, NAG };
enum class Provenance { Optimal, Perturbed, Manual };

std::string_view to_string(Method m) noexcept;
std::string_view to_string(Provenance p) noexcept;

struct MomentumParams {
  Method method = Method::HBM;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double L = 0.0;
  double ell = 0.0;
  Provenance provenance = Provenance::Manual;
  // Set for the optimal HBM choice, whose transition matrix lacks a full
  // eigenbasis (the lambda_min and lambda_max blocks have a double root).
  bool defective = false;
};

MomentumParams hbm_params_optimal(double lambda_max, double lambda_min);
/// Shrinks the spectral interval to [lambda_min - gamma, lambda_max + gamma]
/// before choosing (alpha, beta), so every block has a strictly complex pair.
MomentumParams hbm_params_perturbed(double lambda_max, double lambda_min, double gamma);
/// alpha = 1/L, beta = (sqrt(L/l) - 1)/(sqrt(L/l) + 1). gamma = 0 gives the
/// textbook choice; gamma > 0 widens [l, L] in the same way as for HBM, which
/// keeps the lambda_min block away from its double root.
MomentumParams nag_params(double lambda_max, double lambda_min, double gamma = 0.0);
MomentumParams manual_params(Method method, double alpha, double beta);

struct AlphaWindow {
  double lo = 0.0;
  double hi = 0.0;

  bool empty() const noexcept { return !(lo < hi); }
  bool contains(double alpha) const noexcept { return lo < alpha && alpha < hi; }
};

/// Open interval of step sizes for which every HBM block with eigenvalue in
/// [lambda_min, lambda_max] has a complex pair of modulus sqrt(beta).
AlphaWindow stability_window(double beta, double lambda_max, double lambda_min);

struct Complex {
  double re = 0.0;
  double im = 0.0;

  double abs() const noexcept;
};

/// Eigenvalues of the 2x2 transition block [[t, -q], [1, 0]] for one
/// eigenvalue lambda of A^T A.
struct BlockEig {
  double lambda = 0.0;
  double trace = 0.0;  // t
  double det = 0.0;    // q = z_plus * z_minus
  Complex z_plus;
  Complex z_minus;
  bool is_complex_pair = false;
  bool defective = false;  // double root, up to roundoff
  double re = 0.0;         // a_j
  double im = 0.0;         // b_j >= 0

  double modulus() const noexcept;
};

BlockEig block_eig(double lambda, const MomentumParams& params);

/// 2d x 2d transition matrix built from a symmetric d x d matrix H in place
/// of A^T A. Passing a sampled H = A^T diag(w) A gives the per-iteration
/// random map of the minibatch method.
DenseMatrix transition_matrix(const DenseMatrix& h, const MomentumParams& params);
/// Same, in the eigenbasis of A^T A (H = diag(eigs)).
DenseMatrix transition_matrix(const std::vector<double>& eigs, const MomentumParams& params);

struct TransitionAnalysis {
  MomentumParams params;
  std::vector<BlockEig> blocks;
  double spectral_radius = 0.0;
  double kappa_C_exact = 0.0;  // +inf when some block is real or defective
  double kappa_C_bound = 0.0;  // NaN when the closed-form bound does not apply
  bool all_complex = false;
};

TransitionAnalysis analyze_transition(const std::vector<double>& eigs, const MomentumParams& params);

/// Condition number of the block-diagonal eigenvector matrix C with
/// C_j = [[a_j + i b_j, a_j - i b_j], [1, 1]].
double eig_cond_exact(const std::vector<double>& eigs, const MomentumParams& params);
/// 4 / (alpha sqrt(gamma (gamma + lambda_max - lambda_min))), alpha perturbed.
double eig_cond_bound(double lambda_max, double lambda_min, double gamma);

/// Spectral norm of C_j = [[a + ib, a - ib], [1, 1]] and of its inverse.
struct BlockNorms {
  double norm;
  double inv_norm;
};
BlockNorms eigvec_block_norms(double re, double im);

/// k* solving k*/log(k*) = sqrt(kappa); k* = e when sqrt(kappa) <= e.
double default_k_star(double kappa);

struct BatchBound {
  double branch_linear = 0.0;  // first term in the max, before the common prefactor
  double branch_sqrt = 0.0;    // second term
  double raw = 0.0;            // full expression before the ceiling
  double batch = 0.0;          // ceil(raw)
  double delta = 0.0;          // rate loss exponent (0 when not applicable)
};

BatchBound critical_batch_heuristic(double frob_sq, double op_sq, std::size_t d, const MomentumParams& params);
BatchBound theorem_batch_bound(double frob_sq, double op_sq, std::size_t d, double eta, const MomentumParams& params,
                               double kappa_C, double k_star);
BatchBound nag_batch_bound(double frob_sq, double op_sq, std::size_t d, double eta, const MomentumParams& params,
                           double kappa_C, double k_star);

/// 2 log(k*) / (k* log(1/beta)).
double rate_loss_delta(double beta, double k_star);
/// max{k, (k*)^(k/k*)}
double envelope_factor(double k, double k_star);
/// Asymptotic contraction of the NAG bound, 1 - 1/(sqrt(L/l) + 1).
double nag_rate(const MomentumParams& params);

double inconsistent_horizon_bound(double r_norm, double sigma, double frob_sq, double eta, std::size_t d,
                                  const MomentumParams& params, double kappa_C, double k_star, double batch);

}  // namespace mkhbm
