// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mkhbm/momentum_theory.hpp"
#include "mkhbm/problems.hpp"
#include "mkhbm/sampling.hpp"

namespace mkhbm {

enum class SolverMethod { GD, HBM, SGD_RK, MinibatchHBM, MinibatchNAG };

std::string_view to_string(SolverMethod m) noexcept;
SolverMethod parse_solver_method(std::string_view name);
bool is_stochastic(SolverMethod m) noexcept;

/// Which vector the recurrence is run on. Error coordinates iterate
/// e_k = x_k - x* with the residual r = A x* - b folded into the gradient;
/// the map is the same affine recurrence, but consistent problems then have
/// an exact fixed point at 0 instead of a roundoff floor near |x*| * 1e-16.
enum class Coordinates { Error, Iterate };

struct SolverConfig {
  SolverMethod method = SolverMethod::MinibatchHBM;
  MomentumParams params;
  std::size_t batch_size = 1;
  SamplingScheme sampling = SamplingScheme::RowNorm;
  std::size_t max_iters = 300;
  std::uint64_t seed = 0;
  bool record_residuals = false;
  double k_star = 0.0;  // only reported
  Coordinates coordinates = Coordinates::Error;
  std::optional<Vector> x0;  // zero when unset
};

enum class RunStatus { Ok, Diverged };

struct RunTrace {
  std::vector<double> err_norms;  // ||x_k - x*||, k = 0..iters_run
  std::vector<double> res_norms;  // ||A x_k - b||, empty unless recorded
  std::size_t iters_run = 0;
  RunStatus status = RunStatus::Ok;
  std::uint64_t seed = 0;
  std::uint64_t fingerprint = 0;
};

/// Per-problem data reused across trials.
struct SolverWorkspace {
  Sampler sampler;
  DenseMatrix gram;
  Vector at_r;  // A^T r
  Vector at_b;  // A^T b
};

SolverWorkspace make_workspace(const ProblemInstance& p, SamplingScheme scheme);

/// (1/B) sum_{j in S} p_j^{-1} a_j (a_j^T x - b_j)
Vector minibatch_gradient(const ProblemInstance& p, const Vector& x, const BatchIndices& batch,
                          const Sampler& sampler);

/// SGD_RK ignores config.params and batch size: B = 1, beta = 0,
/// alpha = 1/||A||_F^2 and row-norm sampling.
RunTrace run_solver(const ProblemInstance& p, const SolverConfig& config, const SolverWorkspace* ws = nullptr);

/// Parameters actually used by run_solver for this config.
MomentumParams effective_params(const ProblemInstance& p, const SolverConfig& config);

/// Max over k steps of ||x_rk - x_sgd|| when explicit Kaczmarz projections
/// and the SGD_RK minibatch update consume the same row draws.
double rk_step_equivalence_check(const ProblemInstance& p, std::uint64_t seed, std::size_t k);

enum class EnvelopeKind { Deterministic, Stochastic, StochasticWithHorizon };

struct EnvelopeInputs {
  double kappa_C = 1.0;
  double rate = 0.0;      // per-iteration contraction, sqrt(beta) for HBM
  double e0 = 1.0;        // ||x_0 - x*||
  double k_star = 0.0;    // Stochastic / StochasticWithHorizon
  double horizon = 0.0;   // StochasticWithHorizon
};

/// Values for k = 0..k_max.
std::vector<double> envelope_curve(EnvelopeKind kind, const EnvelopeInputs& in, std::size_t k_max);

std::string describe(const SolverConfig& config);
std::uint64_t fnv1a(std::string_view bytes) noexcept;
std::uint64_t config_fingerprint(const SolverConfig& config);

/// CSV with header iter,err_norm,res_norm preceded by a '#' metadata line.
void write_trace_csv(std::ostream& out, const RunTrace& trace);

}  // namespace mkhbm
