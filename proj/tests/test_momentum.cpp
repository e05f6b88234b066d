// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "mkhbm/momentum_theory.hpp"
#include "mkhbm/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mkhbm;
using testutil::error_kind;

namespace {

constexpr double kE = std::numbers::e;

std::vector<double> random_spectrum(RngStream& rng, std::size_t d, double lmin, double lmax) {
  std::vector<double> e(d);
  for (auto& v : e) v = lmin + (lmax - lmin) * rng.uniform();
  e.front() = lmin;
  e.back() = lmax;
  std::sort(e.begin(), e.end());
  return e;
}

// Block-diagonal eigenvector matrix of T in the (x, x_prev) interleaved basis.
Eigen::MatrixXcd eigvec_matrix(const std::vector<double>& eigs, const MomentumParams& p) {
  const auto d = static_cast<Eigen::Index>(eigs.size());
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const BlockEig e = block_eig(eigs[static_cast<std::size_t>(j)], p);
    c(2 * j, 2 * j) = {e.re, e.im};
    c(2 * j, 2 * j + 1) = {e.re, -e.im};
    c(2 * j + 1, 2 * j) = 1.0;
    c(2 * j + 1, 2 * j + 1) = 1.0;
  }
  return c;
}

}  // namespace

TEST_SUITE("momentum_theory") {
  TEST_CASE("optimal heavy-ball parameters") {
    const auto p = hbm_params_optimal(9.0, 1.0);
    CHECK(p.alpha == doctest::Approx(0.25));
    CHECK(p.beta == doctest::Approx(0.25));
    CHECK(p.defective);
    const auto flat = hbm_params_optimal(4.0, 4.0);
    CHECK(flat.alpha == doctest::Approx(0.25));
    CHECK(flat.beta == 0.0);
    const auto big = hbm_params_optimal(1e6, 1.0);
    CHECK(std::abs((1.0 - std::sqrt(big.beta)) / (2.0 / 1e3) - 1.0) < 0.01);
    CHECK(error_kind([] { hbm_params_optimal(1.0, 0.0); }) == ErrorKind::Parameter);
  }

  TEST_CASE("perturbed heavy-ball parameters") {
    const auto p = hbm_params_perturbed(9.0, 1.0, 0.1);
    // (L, l) = (9.1, 0.9): sqrt(alpha) = 2/(sqrt L + sqrt l), sqrt(beta) = alpha (L - l)/4.
    CHECK(p.alpha == doctest::Approx(0.2543931).epsilon(1e-6));
    CHECK(p.beta == doctest::Approx(0.2719704912).epsilon(1e-9));
    CHECK(std::abs(std::sqrt(p.alpha) - 2.0 / (std::sqrt(p.L) + std::sqrt(p.ell))) < 1e-12);
    CHECK(std::abs(std::sqrt(p.beta) - p.alpha * (p.L - p.ell) / 4.0) < 1e-12);
    CHECK(p.L == doctest::Approx(9.1));
    CHECK(p.ell == doctest::Approx(0.9));
    CHECK(!p.defective);

    const auto opt = hbm_params_optimal(9.0, 1.0);
    for (double g : {1e-3, 1e-5, 1e-7}) {
      const auto q = hbm_params_perturbed(9.0, 1.0, g);
      CHECK(std::abs(q.alpha - opt.alpha) <= 10 * g);
      CHECK(std::abs(q.beta - opt.beta) <= 10 * g);
    }
    CHECK(error_kind([] { hbm_params_perturbed(9.0, 1.0, 0.0); }) == ErrorKind::Parameter);
    CHECK(error_kind([] { hbm_params_perturbed(9.0, 1.0, 1.0); }) == ErrorKind::Parameter);
  }

  TEST_CASE("Nesterov parameters") {
    const auto p = nag_params(9.0, 1.0);
    CHECK(p.alpha == doctest::Approx(1.0 / 9.0));
    CHECK(p.beta == doctest::Approx(0.5));
    CHECK(nag_params(3.0, 3.0).beta == 0.0);
    CHECK(nag_params(100.0, 1.0).beta == doctest::Approx(9.0 / 11.0));
    const auto g = nag_params(100.0, 1.0, 0.01);
    CHECK(g.L == doctest::Approx(100.01));
    CHECK(g.ell == doctest::Approx(0.99));
    CHECK(nag_rate(p) == doctest::Approx(0.75));
  }

  TEST_CASE("stability window") {
    const auto opt = hbm_params_optimal(9.0, 1.0);
    const auto w = stability_window(opt.beta, 9.0, 1.0);
    CHECK(w.lo == doctest::Approx(0.25));
    CHECK(w.hi == doctest::Approx(0.25));
    CHECK(w.empty());
    // (1 - sqrt .3)^2 and (1 + sqrt .3)^2 / 9.
    const auto v = stability_window(0.3, 9.0, 1.0);
    CHECK(v.lo == doctest::Approx(0.2045548850).epsilon(1e-9));
    CHECK(v.hi == doctest::Approx(0.2661605683).epsilon(1e-9));
    CHECK(v.contains(0.25));
    const auto z = stability_window(0.0, 9.0, 1.0);
    CHECK(z.lo == doctest::Approx(1.0));
    CHECK(z.hi == doctest::Approx(1.0 / 9.0));
    CHECK(z.empty());
    const auto p = hbm_params_perturbed(9.0, 1.0, 0.1);
    CHECK(stability_window(p.beta, 9.0, 1.0).contains(p.alpha));
  }

  TEST_CASE("block eigenvalues: worked values") {
    const auto e = block_eig(4.0, manual_params(Method::HBM, 0.25, 0.25));
    CHECK(e.is_complex_pair);
    CHECK(e.z_plus.re == doctest::Approx(0.125));
    CHECK(e.z_plus.im == doctest::Approx(0.484123).epsilon(1e-6));
    CHECK(e.z_minus.im == doctest::Approx(-0.484123).epsilon(1e-6));
    CHECK(e.modulus() == doctest::Approx(0.5));

    const auto gd = block_eig(2.0, manual_params(Method::GD, 0.5, 0.0));
    CHECK(gd.z_plus.abs() == 0.0);
    CHECK(gd.z_minus.abs() == 0.0);

    for (double kappa : {4.0, 100.0, 1e4}) {
      const auto n = nag_params(kappa, 1.0);
      CHECK(block_eig(1.0, n).modulus() == doctest::Approx(1.0 - 1.0 / std::sqrt(kappa)).epsilon(1e-10));
    }
  }

  TEST_CASE("block eigenvalues against the quadratic formula") {
    RngStream rng(3);
    for (int t = 0; t < 200; ++t) {
      const double lambda = 0.1 + 10.0 * rng.uniform();
      const double alpha = 0.3 * rng.uniform() + 1e-3, beta = 0.95 * rng.uniform();
      for (auto m : {Method::HBM, Method::NAG}) {
        const auto p = manual_params(m, alpha, beta);
        const auto e = block_eig(lambda, p);
        const double s = 1.0 - alpha * lambda;
        const double tr = m == Method::NAG ? (1 + beta) * s : 1 + beta - alpha * lambda;
        const double det = m == Method::NAG ? beta * s : beta;
        const auto [zp, zm] = oracle::quadratic_roots(tr, det);
        const std::complex<double> mine_p(e.z_plus.re, e.z_plus.im), mine_m(e.z_minus.re, e.z_minus.im);
        const bool direct = std::abs(mine_p - zp) + std::abs(mine_m - zm) < 1e-8;
        const bool swapped = std::abs(mine_p - zm) + std::abs(mine_m - zp) < 1e-8;
        CHECK((direct || swapped));
        CHECK(std::abs(mine_p * mine_m - det) < 1e-10);
        if (e.is_complex_pair) {
          const double want = m == Method::HBM ? std::sqrt(beta) : std::sqrt(beta * s);
          CHECK(std::abs(e.z_plus.abs() - want) < 1e-10);
        }
      }
    }
  }

  TEST_CASE("transition matrix assembly and spectrum") {
    const DenseMatrix t1 = transition_matrix(std::vector<double>{1.0}, manual_params(Method::GD, 1.0, 0.0));
    DenseMatrix want(2, 2);
    want << 0, 0, 1, 0;
    CHECK((t1 - want).norm() == 0.0);

    RngStream rng(8);
    for (int trial = 0; trial < 5; ++trial) {
      const auto eigs = random_spectrum(rng, 6, 1.0, 20.0);
      for (auto m : {Method::HBM, Method::NAG}) {
        const auto p = m == Method::HBM ? hbm_params_perturbed(20.0, 1.0, 0.05) : nag_params(20.0, 1.0);
        Eigen::EigenSolver<Eigen::MatrixXd> es(transition_matrix(eigs, p));
        std::vector<std::complex<double>> numeric(es.eigenvalues().data(), es.eigenvalues().data() + 12);
        std::vector<std::complex<double>> blocks;
        for (double l : eigs) {
          const auto e = block_eig(l, p);
          blocks.emplace_back(e.z_plus.re, e.z_plus.im);
          blocks.emplace_back(e.z_minus.re, e.z_minus.im);
        }
        for (const auto& z : blocks) {
          double best = 1e300;
          for (const auto& w : numeric) best = std::min(best, std::abs(z - w));
          CHECK(best < 1e-6);  // near-double roots are only resolved to ~sqrt(eps)
        }
      }
    }
  }

  TEST_CASE("dense curvature and eigenbasis transition matrices share a spectrum") {
    const DenseMatrix g = testutil::gaussian(30, 5, 4);
    const DenseMatrix h = g.transpose() * g;
    const auto eigs = oracle::classical_jacobi(oracle::to_rows(h));
    const auto p = hbm_params_perturbed(eigs.back(), eigs.front(), eigs.front() * 1e-2);
    Eigen::EigenSolver<Eigen::MatrixXd> a(transition_matrix(h, p)), b(transition_matrix(eigs, p));
    auto mods = [](const Eigen::VectorXcd& v) {
      std::vector<double> m;
      for (Eigen::Index i = 0; i < v.size(); ++i) m.push_back(std::abs(v[i]));
      std::sort(m.begin(), m.end());
      return m;
    };
    const auto ma = mods(a.eigenvalues()), mb = mods(b.eigenvalues());
    for (std::size_t i = 0; i < ma.size(); ++i) CHECK(std::abs(ma[i] - mb[i]) < 1e-8);
  }

  TEST_CASE("spectral radius identities") {
    RngStream rng(12);
    for (int t = 0; t < 20; ++t) {
      const auto eigs = random_spectrum(rng, 5, 0.5 + rng.uniform(), 5.0 + 50.0 * rng.uniform());
      const auto p = hbm_params_perturbed(eigs.back(), eigs.front(), 1e-3 * eigs.front());
      const auto a = analyze_transition(eigs, p);
      CHECK(a.all_complex);
      CHECK(std::abs(a.spectral_radius - std::sqrt(p.beta)) < 1e-10);
      Eigen::EigenSolver<Eigen::MatrixXd> es(transition_matrix(eigs, p), false);
      CHECK(std::abs(es.eigenvalues().cwiseAbs().maxCoeff() - std::sqrt(p.beta)) < 1e-8);
    }
    const std::vector<double> eigs{1.0, 3.0, 10.0};
    const auto gd = manual_params(Method::GD, 0.1, 0.0);
    CHECK(analyze_transition(eigs, gd).spectral_radius == doctest::Approx(1.0 - 1.0 / 10.0));
    Eigen::EigenSolver<Eigen::MatrixXd> es(transition_matrix(eigs, gd), false);
    CHECK(es.eigenvalues().cwiseAbs().maxCoeff() == doctest::Approx(0.9).epsilon(1e-10));
  }

  TEST_CASE("eigenvector condition number against an SVD oracle") {
    RngStream rng(5);
    for (int t = 0; t < 20; ++t) {
      const auto eigs = random_spectrum(rng, 4, 1.0, 2.0 + 30.0 * rng.uniform());
      const auto p = hbm_params_perturbed(eigs.back(), eigs.front(), 0.2 * rng.uniform() + 1e-3);
      const double exact = eig_cond_exact(eigs, p);
      CHECK(exact >= 1.0);
      // max_j ||C_j|| * max_j ||C_j^{-1}|| equals cond(C) for block-diagonal C.
      const auto c = eigvec_matrix(eigs, p);
      CHECK(testutil::rel(exact, oracle::cond2(c)) < 1e-10);
      for (double l : eigs) {
        const auto e = block_eig(l, p);
        Eigen::Matrix2cd cj;
        cj << std::complex<double>(e.re, e.im), std::complex<double>(e.re, -e.im), 1.0, 1.0;
        Eigen::JacobiSVD<Eigen::Matrix2cd> svd(cj);
        const auto n = eigvec_block_norms(e.re, e.im);
        CHECK(testutil::rel(n.norm, svd.singularValues()(0)) < 1e-10);
        CHECK(testutil::rel(n.inv_norm, 1.0 / svd.singularValues()(1)) < 1e-10);
      }
    }
    CHECK(error_kind([] { eig_cond_exact({1.0, 9.0}, hbm_params_optimal(9.0, 1.0)); }) ==
          ErrorKind::NonDiagonalizable);
    CHECK(error_kind([] { eig_cond_exact({1.0, 9.0}, manual_params(Method::GD, 0.1, 0.0)); }) ==
          ErrorKind::NonDiagonalizable);
  }

  TEST_CASE("condition-number bound") {
    const auto p = hbm_params_perturbed(9.0, 1.0, 0.1);
    const double bound = eig_cond_bound(9.0, 1.0, 0.1);
    CHECK(bound == doctest::Approx(4.0 / (p.alpha * std::sqrt(0.1 * 8.1))));
    CHECK(bound == doctest::Approx(17.47).epsilon(1e-3));
    CHECK(eig_cond_exact({1.0, 5.0, 9.0}, p) <= bound);

    double prev = std::numeric_limits<double>::infinity();
    for (double g = 1e-6; g < 1.0; g *= 1.5) {
      const double b = eig_cond_bound(1000.0, 1.0, g);
      CHECK(b < prev);
      prev = b;
    }
    CHECK(eig_cond_bound(9.0, 1.0, 1e-12) > 1e6);
    CHECK(error_kind([] { eig_cond_bound(9.0, 1.0, 2.0); }) == ErrorKind::Parameter);
  }

  TEST_CASE("powers of T stay under the condition-number envelope") {
    RngStream rng(21);
    for (int t = 0; t < 3; ++t) {
      const auto eigs = random_spectrum(rng, 4, 1.0, 10.0 + 40.0 * rng.uniform());
      const auto p = hbm_params_perturbed(eigs.back(), eigs.front(), 0.05);
      const double kc = eig_cond_exact(eigs, p), rate = std::sqrt(p.beta);
      const DenseMatrix tm = transition_matrix(eigs, p);
      DenseMatrix pw = DenseMatrix::Identity(8, 8);
      for (int k = 1; k <= 200; ++k) {
        pw = pw * tm;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(pw);
        CHECK(svd.singularValues()(0) <= kc * std::pow(rate, k) * (1 + 1e-9));
      }
    }
  }

  TEST_CASE("NAG block moduli stay below the accelerated rate") {
    for (double kappa : {10.0, 100.0, 1e4}) {
      const auto p = nag_params(kappa, 1.0);
      const double cap = 1.0 - 1.0 / std::sqrt(kappa);
      for (int i = 0; i < 1000; ++i) {
        const double l = 1.0 + (kappa - 1.0) * i / 999.0;
        CHECK(block_eig(l, p).modulus() <= cap + 1e-10);  // lambda = l is a double root
      }
    }
  }

  TEST_CASE("k* and envelope helpers") {
    CHECK(default_k_star(4.0) == doctest::Approx(kE));
    for (double kappa : {30.0, 100.0, 1e4}) {
      const double k = default_k_star(kappa);
      CHECK(k / std::log(k) == doctest::Approx(std::sqrt(kappa)).epsilon(1e-9));
    }
    CHECK(rate_loss_delta(0.25, kE) == doctest::Approx(2.0 / (kE * std::log(4.0))));
    CHECK(envelope_factor(0.0, 10.0) == 1.0);
    CHECK(envelope_factor(10.0, 10.0) == doctest::Approx(10.0));
    CHECK(envelope_factor(30.0, 10.0) == doctest::Approx(1000.0));
  }

  TEST_CASE("critical batch heuristic") {
    const auto a = critical_batch_heuristic(10.0, 4.0, 5, manual_params(Method::HBM, 0.25, 0.25));
    CHECK(a.raw == doctest::Approx(16 * kE * 40 * std::log(10.0) * 0.0625 / (0.25 * std::log(4.0))));
    CHECK(a.batch == 723.0);
    const auto b = critical_batch_heuristic(1.0, 1.0, 1, manual_params(Method::HBM, 1.0, 1.0 / kE));
    CHECK(b.raw == doctest::Approx(16 * kE * kE * std::log(2.0)));
    CHECK(b.batch == 82.0);
    CHECK(error_kind([] { critical_batch_heuristic(1, 1, 1, manual_params(Method::GD, 1.0, 0.0)); }) ==
          ErrorKind::Parameter);
  }

  TEST_CASE("theorem batch bounds") {
    const auto p = manual_params(Method::HBM, 1.0, 0.5);
    const auto b = theorem_batch_bound(1.0, 1.0, 1, 1.0, p, 1.0, kE);
    // common factor alpha^2 kappa_C^2 k*/(beta log k*) = 2e.
    CHECK(b.branch_linear == doctest::Approx(2 * kE));
    CHECK(b.branch_sqrt == doctest::Approx(std::sqrt(4 * kE)));
    CHECK(b.raw == doctest::Approx(16 * kE * std::log(2.0) * 2 * kE));
    CHECK(b.delta == doctest::Approx(2.0 / (kE * std::log(2.0))));

    RngStream rng(9);
    for (int t = 0; t < 50; ++t) {
      const double frob = 1 + 100 * rng.uniform(), op = frob * (0.01 + 0.99 * rng.uniform());
      const double alpha = rng.uniform(), beta = 0.05 + 0.9 * rng.uniform(), kc = 1 + 50 * rng.uniform();
      const double ks = 1.5 + 100 * rng.uniform(), eta = 1 + 3 * rng.uniform();
      const std::size_t d = 1 + static_cast<std::size_t>(200 * rng.uniform());
      const auto q = manual_params(Method::HBM, alpha, beta);
      const auto bb = theorem_batch_bound(frob, op, d, eta, q, kc, ks);
      const double c = alpha * alpha * kc * kc * ks / (beta * std::log(ks));
      const double lin = frob * op * c, sq = std::sqrt(2 * frob * frob * c);
      CHECK(bb.raw == doctest::Approx(16 * kE * eta * std::log(2.0 * d) * std::max(lin, sq)).epsilon(1e-12));
      CHECK((lin >= sq) == (bb.branch_linear >= bb.branch_sqrt));
      const auto twice = theorem_batch_bound(frob, op, d, 2 * eta, q, kc, ks);
      CHECK(twice.raw == doctest::Approx(2 * bb.raw).epsilon(1e-14));
      const auto nag = nag_batch_bound(frob, op, d, eta, manual_params(Method::NAG, alpha, beta), kc, ks);
      CHECK(nag.branch_linear / bb.branch_linear == doctest::Approx(5.0).epsilon(1e-14));
      CHECK(nag.branch_sqrt / bb.branch_sqrt == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
      const double nlin = 5 * frob * op * c, nsq = std::sqrt(10 * frob * frob * c);
      CHECK(nag.raw == doctest::Approx(16 * kE * eta * std::log(2.0 * d) * std::max(nlin, nsq)).epsilon(1e-12));
    }
    CHECK(error_kind([&] { theorem_batch_bound(1, 1, 1, 1, p, 1.0, 1.0); }) == ErrorKind::Parameter);
    CHECK(error_kind([&] { theorem_batch_bound(1, 1, 1, 1, p, INFINITY, 3.0); }) == ErrorKind::NonDiagonalizable);
  }

  TEST_CASE("inconsistent horizon bound") {
    const auto p = hbm_params_perturbed(10.0, 1.0, 0.01);
    const double ks = 60.0, kc = 50.0;
    CHECK(inconsistent_horizon_bound(0.0, 0.0, 20.0, 1.0, 10, p, kc, ks, 100) == 0.0);
    const double r_only = inconsistent_horizon_bound(1.0, 0.0, 20.0, 1.0, 10, p, kc, ks, 100);
    CHECK(inconsistent_horizon_bound(1.0, 0.0, 20.0, 1.0, 10, p, kc, ks, 400) == doctest::Approx(r_only / 2));
    const double s_only = inconsistent_horizon_bound(0.0, 1.0, 20.0, 1.0, 10, p, kc, ks, 100);
    CHECK(inconsistent_horizon_bound(0.0, 1.0, 20.0, 1.0, 10, p, kc, ks, 400) == doctest::Approx(s_only / 4));

    const double r = 0.3, sigma = 0.02, frob = 20.0, eta = 1.7, batch = 250;
    const double delta = 2 * std::log(ks) / (ks * std::log(1 / p.beta));
    const double want = p.alpha * kc * (ks + 1) / (1 - std::pow(p.beta, 0.5 * (1 - delta))) *
                        (std::sqrt(2 * eta * frob * std::log(11.0) * r * r / batch) +
                         eta * frob * std::log(11.0) * sigma / (3 * batch));
    CHECK(inconsistent_horizon_bound(r, sigma, frob, eta, 10, p, kc, ks, batch) == doctest::Approx(want));
    const auto slow = manual_params(Method::HBM, 0.1, 0.9);
    CHECK(error_kind([&] { inconsistent_horizon_bound(1, 1, 1, 1, 10, slow, kc, 3.0, 10); }) ==
          ErrorKind::Precondition);
  }

  TEST_CASE("analysis bundles the bound only for perturbed heavy ball") {
    const std::vector<double> eigs{1.0, 4.0, 9.0};
    const auto a = analyze_transition(eigs, hbm_params_perturbed(9.0, 1.0, 0.1));
    CHECK(a.kappa_C_bound == doctest::Approx(eig_cond_bound(9.0, 1.0, 0.1)));
    CHECK(a.kappa_C_exact <= a.kappa_C_bound);
    const auto o = analyze_transition(eigs, hbm_params_optimal(9.0, 1.0));
    CHECK(std::isinf(o.kappa_C_exact));
    CHECK(std::isnan(o.kappa_C_bound));
  }
}
