// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "mkhbm/error.hpp"
#include "mkhbm/experiments.hpp"
#include "mkhbm/sampling.hpp"

namespace mkhbm {

using nlohmann::json;

MomentumParams resolve_params(const ParamChoice& choice, const SpectrumSummary& s, SolverMethod method) {
  const double gamma = choice.gamma > 0.0 ? choice.gamma : choice.gamma_fraction * s.lambda_min;
  switch (method) {
    case SolverMethod::SGD_RK:
      return manual_params(Method::GD, 1.0 / s.frob_sq, 0.0);
    case SolverMethod::GD:
      if (choice.rule == ParamRule::Manual) return manual_params(Method::GD, choice.alpha, 0.0);
      return manual_params(Method::GD, 2.0 / (s.lambda_max + s.lambda_min), 0.0);
    case SolverMethod::MinibatchNAG:
      if (choice.rule == ParamRule::Manual) return manual_params(Method::NAG, choice.alpha, choice.beta);
      return nag_params(s.lambda_max, s.lambda_min, gamma);
    case SolverMethod::HBM:
    case SolverMethod::MinibatchHBM:
      break;
  }
  switch (choice.rule) {
    case ParamRule::PerturbedHbm: return hbm_params_perturbed(s.lambda_max, s.lambda_min, gamma);
    case ParamRule::OptimalHbm: return hbm_params_optimal(s.lambda_max, s.lambda_min);
    case ParamRule::Manual: return manual_params(Method::HBM, choice.alpha, choice.beta);
    case ParamRule::Nag: break;
  }
  fail(ErrorKind::Parameter, "NAG parameters requested for a heavy-ball method");
}

TheoryReport theory_report(const ProblemInstance& p, const MomentumParams& params, SamplingScheme sampling,
                           double k_star, std::size_t horizon_batch) {
  TheoryReport t;
  t.n = p.rows();
  t.d = p.cols();
  t.spectrum = p.spectrum;
  t.consistent = p.consistent;
  t.r_norm = p.r.norm();
  t.sigma = p.sigma;
  t.sampling = sampling;
  t.eta = build_sampler(p.a, sampling).eta;
  t.params = params;
  t.window = stability_window(params.beta, p.spectrum.lambda_max, p.spectrum.lambda_min);
  const TransitionAnalysis a = analyze_transition(p.spectrum.eigs, params);
  t.spectral_radius = a.spectral_radius;
  t.kappa_C_exact = a.kappa_C_exact;
  t.kappa_C_bound = a.kappa_C_bound;
  t.k_star = k_star > 0.0 ? k_star : default_k_star(p.spectrum.kappa);

  auto attempt = [&](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      t.notes.push_back(std::string(what) + ": " + e.what());
    }
  };
  attempt("heuristic", [&] { t.heuristic = critical_batch_heuristic(p.spectrum.frob_sq, p.spectrum.op_sq, t.d, params); });
  attempt("theorem", [&] {
    t.theorem = params.method == Method::NAG
                    ? nag_batch_bound(p.spectrum.frob_sq, p.spectrum.op_sq, t.d, t.eta, params, t.kappa_C_exact, t.k_star)
                    : theorem_batch_bound(p.spectrum.frob_sq, p.spectrum.op_sq, t.d, t.eta, params, t.kappa_C_exact,
                                          t.k_star);
  });
  if (!p.consistent && horizon_batch > 0) {
    t.horizon_batch = horizon_batch;
    attempt("horizon", [&] {
      t.horizon = inconsistent_horizon_bound(t.r_norm, t.sigma, p.spectrum.frob_sq, t.eta, t.d, params,
                                             t.kappa_C_exact, t.k_star, static_cast<double>(horizon_batch));
    });
  }
  return t;
}

json to_json(const MomentumParams& p) {
  return {{"method", to_string(p.method)}, {"alpha", p.alpha},     {"beta", p.beta},
          {"gamma", p.gamma},              {"L", p.L},             {"ell", p.ell},
          {"provenance", to_string(p.provenance)}, {"defective", p.defective}};
}

json to_json(const SpectrumSummary& s) {
  return {{"lambda_max", s.lambda_max}, {"lambda_min", s.lambda_min}, {"lambda_ave", s.lambda_ave},
          {"kappa", s.kappa},           {"kappa_bar", s.kappa_bar},   {"frob_sq", s.frob_sq},
          {"op_sq", s.op_sq},           {"d", s.dim()}};
}

json to_json(const BatchBound& b) {
  return {{"batch", b.batch},
          {"raw", b.raw},
          {"branch_linear", b.branch_linear},
          {"branch_sqrt", b.branch_sqrt},
          {"delta", b.delta}};
}

json to_json(const TheoryReport& t) {
  json j = {
      {"n", t.n},
      {"d", t.d},
      {"spectrum", to_json(t.spectrum)},
      {"consistent", t.consistent},
      {"residual_norm", t.r_norm},
      {"sigma", t.sigma},
      {"sampling", to_string(t.sampling)},
      {"eta", t.eta},
      {"params", to_json(t.params)},
      {"window", {{"lo", t.window.lo}, {"hi", t.window.hi}, {"empty", t.window.empty()}}},
      {"spectral_radius", t.spectral_radius},
      {"kappa_C_exact", std::isfinite(t.kappa_C_exact) ? json(t.kappa_C_exact) : json(nullptr)},
      {"kappa_C_bound", std::isfinite(t.kappa_C_bound) ? json(t.kappa_C_bound) : json(nullptr)},
      {"k_star", t.k_star},
      {"B_star", t.heuristic ? json(t.heuristic->batch) : json(nullptr)},
      {"heuristic", t.heuristic ? to_json(*t.heuristic) : json(nullptr)},
      {"theorem", t.theorem ? to_json(*t.theorem) : json(nullptr)},
      {"notes", t.notes},
  };
  if (t.horizon_batch > 0) {
    j["horizon"] = {{"batch", t.horizon_batch}, {"R", t.horizon ? json(*t.horizon) : json(nullptr)}};
  }
  return j;
}

}  // namespace mkhbm
