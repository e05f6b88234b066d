// SPDX-License-Identifier: Apache-2.0
#include "mkhbm/solvers.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>

#include "mkhbm/error.hpp"

namespace mkhbm {

namespace {

constexpr double kDivergenceFactor = 1e12;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Row weights of one stochastic gradient: w_j = c_j / (B p_j), where c_j
// counts how often row j was drawn. For B <= n the rows are drawn one by one;
// beyond that the counts are drawn directly as a multinomial, which has the
// same distribution and costs O(n) instead of O(B log n).
class BatchWeights {
 public:
  BatchWeights(const Sampler& s, std::size_t batch) : sampler_(s), batch_(batch) {}

  template <class Fn>
  void draw(RngStream& rng, Fn&& visit) {
    const double inv_b = 1.0 / static_cast<double>(batch_);
    if (batch_ <= sampler_.size()) {
      draw_batch_into(sampler_, batch_, rng, rows_);
      for (std::size_t j : rows_) visit(j, inv_b / sampler_.probs[j]);
      return;
    }
    draw_counts(sampler_, batch_, rng, counts_);
    for (std::size_t j = 0; j < counts_.size(); ++j) {
      if (counts_[j] != 0) visit(j, static_cast<double>(counts_[j]) * inv_b / sampler_.probs[j]);
    }
  }

 private:
  const Sampler& sampler_;
  std::size_t batch_;
  std::vector<std::size_t> rows_;
  std::vector<std::uint64_t> counts_;
};

}  // namespace

std::string_view to_string(SolverMethod m) noexcept {
  switch (m) {
    case SolverMethod::GD: return "gd";
    case SolverMethod::HBM: return "hbm";
    case SolverMethod::SGD_RK: return "rk";
    case SolverMethod::MinibatchHBM: return "mbhbm";
    case SolverMethod::MinibatchNAG: return "mbnag";
  }
  return "?";
}

SolverMethod parse_solver_method(std::string_view name) {
  for (auto m : {SolverMethod::GD, SolverMethod::HBM, SolverMethod::SGD_RK, SolverMethod::MinibatchHBM,
                 SolverMethod::MinibatchNAG}) {
    if (name == to_string(m)) return m;
  }
  if (name == "sgd") return SolverMethod::SGD_RK;
  fail(ErrorKind::Parameter, "unknown method '" + std::string(name) + "' (gd, hbm, rk, mbhbm, mbnag)");
}

bool is_stochastic(SolverMethod m) noexcept { return m != SolverMethod::GD && m != SolverMethod::HBM; }

SolverWorkspace make_workspace(const ProblemInstance& p, SamplingScheme scheme) {
  SolverWorkspace ws;
  ws.sampler = build_sampler(p.a, scheme);
  ws.gram = p.a.gram();
  ws.at_r = p.a.multiply_transpose(p.r);
  ws.at_b = p.a.multiply_transpose(p.b);
  return ws;
}

Vector minibatch_gradient(const ProblemInstance& p, const Vector& x, const BatchIndices& batch,
                          const Sampler& sampler) {
  if (batch.size() == 0) fail(ErrorKind::Parameter, "empty batch");
  Vector g = Vector::Zero(static_cast<Eigen::Index>(p.cols()));
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (std::size_t j : batch.indices) {
    if (j >= p.rows()) fail(ErrorKind::Dimension, "batch index out of range");
    const double resid = p.a.row_dot(j, x) - p.b[static_cast<Eigen::Index>(j)];
    p.a.add_scaled_row(j, inv_b / sampler.probs[j] * resid, g);
  }
  return g;
}

MomentumParams effective_params(const ProblemInstance& p, const SolverConfig& config) {
  MomentumParams prm = config.params;
  switch (config.method) {
    case SolverMethod::SGD_RK:
      prm = manual_params(Method::GD, 1.0 / p.a.frobenius_sq(), 0.0);
      break;
    case SolverMethod::GD:
      prm.method = Method::GD;
      prm.beta = 0.0;
      break;
    case SolverMethod::HBM:
    case SolverMethod::MinibatchHBM:
      prm.method = Method::HBM;
      break;
    case SolverMethod::MinibatchNAG:
      prm.method = Method::NAG;
      break;
  }
  if (!(prm.alpha > 0.0) || !std::isfinite(prm.alpha)) fail(ErrorKind::Parameter, "step size must be positive");
  if (!(prm.beta >= 0.0 && prm.beta < 1.0)) fail(ErrorKind::Parameter, "momentum must lie in [0, 1)");
  return prm;
}

RunTrace run_solver(const ProblemInstance& p, const SolverConfig& config, const SolverWorkspace* ws_in) {
  const bool stochastic = is_stochastic(config.method);
  const std::size_t batch = config.method == SolverMethod::SGD_RK ? 1 : config.batch_size;
  const SamplingScheme scheme = config.method == SolverMethod::SGD_RK ? SamplingScheme::RowNorm : config.sampling;
  if (stochastic && batch == 0) fail(ErrorKind::Parameter, "stochastic methods need a batch size of at least 1");
  const MomentumParams prm = effective_params(p, config);

  SolverWorkspace local;
  if (!ws_in || (stochastic && ws_in->sampler.scheme != scheme)) {
    local = make_workspace(p, scheme);
    ws_in = &local;
  }
  const SolverWorkspace& ws = *ws_in;

  const auto d = static_cast<Eigen::Index>(p.cols());
  const bool err_coords = config.coordinates == Coordinates::Error;
  const Vector x0 = config.x0 ? *config.x0 : Vector::Zero(d);
  if (x0.size() != d) fail(ErrorKind::Dimension, "x0 has the wrong length");

  // Row residual a_j^T z + off_j and full gradient G z + full_off cover both
  // coordinate systems.
  const Vector off = err_coords ? p.r : Vector(-p.b);
  const Vector full_off = err_coords ? ws.at_r : Vector(-ws.at_b);
  const Vector target = err_coords ? Vector::Zero(d) : p.x_star;
  Vector z = err_coords ? Vector(x0 - p.x_star) : x0;
  Vector z_prev = z, z_next(d), y(d), g(d);

  RunTrace trace;
  trace.seed = config.seed;
  trace.fingerprint = config_fingerprint(config);
  trace.err_norms.reserve(config.max_iters + 1);
  auto record = [&](const Vector& v) {
    trace.err_norms.push_back((v - target).norm());
    if (config.record_residuals) trace.res_norms.push_back((p.a.multiply(v) + off).norm());
  };
  record(z);
  const double err0 = trace.err_norms.front();

  auto rng = RngStream::derive(config.seed, {0});
  BatchWeights weights(ws.sampler, batch);
  auto gradient = [&](const Vector& at) {
    if (!stochastic) {
      g.noalias() = ws.gram * at;
      g += full_off;
      return;
    }
    g.setZero();
    weights.draw(rng, [&](std::size_t j, double w) {
      const double resid = p.a.row_dot(j, at) + off[static_cast<Eigen::Index>(j)];
      p.a.add_scaled_row(j, w * resid, g);
    });
  };

  const double alpha = prm.alpha, beta = prm.beta;
  for (std::size_t k = 0; k < config.max_iters; ++k) {
    if (prm.method == Method::NAG) {
      y = z + beta * (z - z_prev);
      gradient(y);
      z_next = y - alpha * g;
    } else {
      gradient(z);
      z_next = z - alpha * g + beta * (z - z_prev);
    }
    z_prev.swap(z);
    z.swap(z_next);
    record(z);
    ++trace.iters_run;
    const double e = trace.err_norms.back();
    if (!std::isfinite(e) || (err0 > 0.0 && e > kDivergenceFactor * err0)) {
      trace.status = RunStatus::Diverged;
      break;
    }
  }
  return trace;
}

double rk_step_equivalence_check(const ProblemInstance& p, std::uint64_t seed, std::size_t k) {
  const Sampler sampler = build_sampler(p.a, SamplingScheme::RowNorm);
  const double alpha = 1.0 / p.a.frobenius_sq();
  auto rng = RngStream::derive(seed, {0});
  const auto d = static_cast<Eigen::Index>(p.cols());
  Vector x_rk = Vector::Zero(d), x_sgd = Vector::Zero(d);
  BatchIndices one{{0}};
  double worst = 0.0;
  for (std::size_t step = 0; step < k; ++step) {
    const std::size_t j = draw_index(sampler, rng);
    const double resid = p.a.row_dot(j, x_rk) - p.b[static_cast<Eigen::Index>(j)];
    p.a.add_scaled_row(j, -resid / p.a.row_norm_sq(j), x_rk);
    one.indices[0] = j;
    x_sgd -= alpha * minibatch_gradient(p, x_sgd, one, sampler);
    worst = std::max(worst, (x_rk - x_sgd).norm());
  }
  return worst;
}

std::vector<double> envelope_curve(EnvelopeKind kind, const EnvelopeInputs& in, std::size_t k_max) {
  if (!(in.rate >= 0.0)) fail(ErrorKind::Parameter, "envelope rate must be nonnegative");
  if (kind != EnvelopeKind::Deterministic && !(in.k_star > 1.0)) {
    fail(ErrorKind::Parameter, "stochastic envelopes need k* > 1");
  }
  std::vector<double> out(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k) {
    const double kd = static_cast<double>(k);
    double v = std::sqrt(2.0) * in.kappa_C * std::pow(in.rate, kd) * in.e0;
    if (kind != EnvelopeKind::Deterministic) v *= envelope_factor(kd, in.k_star);
    if (kind == EnvelopeKind::StochasticWithHorizon) v += in.horizon;
    out[k] = v;
  }
  return out;
}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string describe(const SolverConfig& c) {
  std::string s = "method=" + std::string(to_string(c.method));
  s += " alpha=" + fmt_double(c.params.alpha);
  s += " beta=" + fmt_double(c.params.beta);
  s += " batch=" + std::to_string(c.batch_size);
  s += " sampling=" + std::string(to_string(c.sampling));
  s += " iters=" + std::to_string(c.max_iters);
  s += " seed=" + std::to_string(c.seed);
  s += c.coordinates == Coordinates::Error ? " coords=error" : " coords=iterate";
  if (c.x0) {
    std::string bytes;
    for (Eigen::Index i = 0; i < c.x0->size(); ++i) bytes += fmt_double((*c.x0)[i]) + ",";
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(bytes));
    s += std::string(" x0=") + buf;
  }
  return s;
}

std::uint64_t config_fingerprint(const SolverConfig& config) { return fnv1a(describe(config)); }

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "# fingerprint=%016" PRIx64 " seed=%" PRIu64 " status=%s\n", trace.fingerprint,
                trace.seed, trace.status == RunStatus::Ok ? "ok" : "diverged");
  out << buf << "iter,err_norm,res_norm\n";
  for (std::size_t k = 0; k < trace.err_norms.size(); ++k) {
    out << k << ',' << fmt_double(trace.err_norms[k]) << ',';
    if (k < trace.res_norms.size()) out << fmt_double(trace.res_norms[k]);
    out << '\n';
  }
}

}  // namespace mkhbm
