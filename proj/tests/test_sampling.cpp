// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <array>
#include <cmath>

#include "mkhbm/problems.hpp"
#include "mkhbm/sampling.hpp"
#include "mkhbm/solvers.hpp"
#include "test_util.hpp"

using namespace mkhbm;
using testutil::error_kind;

namespace {

// Rows with squared norms 1, 1, 2.
Matrix three_rows() {
  DenseMatrix a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  return Matrix::dense(a);
}

}  // namespace

TEST_SUITE("sampling") {
  TEST_CASE("row-norm and uniform probabilities") {
    const Sampler rn = build_sampler(three_rows(), SamplingScheme::RowNorm);
    CHECK(rn.probs[0] == doctest::Approx(0.25));
    CHECK(rn.probs[1] == doctest::Approx(0.25));
    CHECK(rn.probs[2] == doctest::Approx(0.5));
    CHECK(rn.eta == 1.0);

    const Sampler un = build_sampler(three_rows(), SamplingScheme::Uniform);
    for (double p : un.probs) CHECK(p == doctest::Approx(1.0 / 3.0));
    CHECK(un.eta == doctest::Approx(1.5));

    const Sampler eq = build_sampler(Matrix::dense(DenseMatrix::Identity(4, 4)), SamplingScheme::Uniform);
    CHECK(eq.eta == doctest::Approx(1.0));
  }

  TEST_CASE("sampling invariants on a random sparse problem") {
    const auto p = sparse_bernoulli_problem(500, 20, 3);
    const auto norms = p.a.row_norms_sq();
    const double frob = p.a.frobenius_sq();
    for (auto scheme : {SamplingScheme::RowNorm, SamplingScheme::Uniform}) {
      const Sampler s = build_sampler(p.a, scheme);
      double sum = 0.0, worst = 0.0;
      for (std::size_t j = 0; j < s.size(); ++j) {
        CHECK(s.probs[j] > 0.0);
        sum += s.probs[j];
        worst = std::max(worst, norms[j] / frob / s.probs[j]);
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
      CHECK(worst <= s.eta + 1e-12);
      CHECK(s.cumulative.size() == s.size());
    }
  }

  TEST_CASE("errors") {
    DenseMatrix z(2, 2);
    z << 1, 0, 0, 0;
    CHECK(error_kind([&] { build_sampler(Matrix::dense(z), SamplingScheme::RowNorm); }) == ErrorKind::Parameter);
    CHECK(error_kind([] { build_sampler(Matrix::dense(DenseMatrix(0, 0)), SamplingScheme::Uniform); }) ==
          ErrorKind::Dimension);
    const Sampler s = build_sampler(three_rows(), SamplingScheme::RowNorm);
    RngStream rng(1);
    CHECK(error_kind([&] { draw_batch(s, 0, rng); }) == ErrorKind::Parameter);
    CHECK(error_kind([] { parse_sampling_scheme("alias"); }) == ErrorKind::Parameter);
    CHECK(parse_sampling_scheme("uniform") == SamplingScheme::Uniform);
  }

  TEST_CASE("single row and determinism") {
    const Sampler one = build_sampler(Matrix::dense(DenseMatrix::Ones(1, 3)), SamplingScheme::RowNorm);
    RngStream rng(5);
    for (auto j : draw_batch(one, 50, rng).indices) CHECK(j == 0);

    const Sampler s = build_sampler(three_rows(), SamplingScheme::RowNorm);
    RngStream r1(9), r2(9);
    CHECK(draw_batch(s, 100, r1).indices == draw_batch(s, 100, r2).indices);
  }

  TEST_CASE("empirical frequencies") {
    const Sampler s = build_sampler(three_rows(), SamplingScheme::RowNorm);
    RngStream rng(17);
    const auto batch = draw_batch(s, 1000000, rng);
    REQUIRE(batch.size() == 1000000);
    std::array<double, 3> freq{};
    for (auto j : batch.indices) freq[j] += 1e-6;
    CHECK(std::abs(freq[0] - 0.25) < 0.005);
    CHECK(std::abs(freq[1] - 0.25) < 0.005);
    CHECK(std::abs(freq[2] - 0.5) < 0.005);
  }

  TEST_CASE("multinomial counts") {
    const Sampler s = build_sampler(three_rows(), SamplingScheme::RowNorm);
    RngStream rng(31);
    std::vector<std::uint64_t> counts;
    std::array<double, 3> freq{};
    const int reps = 200;
    const std::uint64_t batch = 1000000000;
    for (int r = 0; r < reps; ++r) {
      draw_counts(s, batch, rng, counts);
      REQUIRE(counts.size() == 3);
      CHECK(counts[0] + counts[1] + counts[2] == batch);
      for (int j = 0; j < 3; ++j) freq[j] += static_cast<double>(counts[j]) / batch / reps;
    }
    // Each frequency has standard error sqrt(p(1-p)/(reps B)) ~ 2e-6.
    CHECK(std::abs(freq[0] - 0.25) < 2e-5);
    CHECK(std::abs(freq[2] - 0.5) < 2e-5);
    draw_counts(s, 1, rng, counts);
    CHECK(counts[0] + counts[1] + counts[2] == 1);
    CHECK(error_kind([&] { draw_counts(s, 0, rng, counts); }) == ErrorKind::Parameter);
  }

  TEST_CASE("minibatch gradient is unbiased") {
    const auto p = synth_svd_problem(40, 4, {1.0, 2.0, 3.0, 5.0}, 21);
    const auto noisy = make_inconsistent(p, 0.5, 22);
    const Vector x = testutil::gaussian_vector(4, 23);
    const Vector full = noisy.a.multiply_transpose(noisy.a.multiply(x) - noisy.b);
    for (auto scheme : {SamplingScheme::RowNorm, SamplingScheme::Uniform}) {
      const Sampler s = build_sampler(noisy.a, scheme);
      RngStream rng(24);
      const int trials = 100000;
      const std::size_t batch = 3;
      Vector mean = Vector::Zero(4), sq = Vector::Zero(4);
      for (int t = 0; t < trials; ++t) {
        const Vector g = minibatch_gradient(noisy, x, draw_batch(s, batch, rng), s);
        mean += g;
        sq += g.cwiseProduct(g);
      }
      mean /= trials;
      const Vector se = ((sq / trials - mean.cwiseProduct(mean)) / trials).cwiseSqrt();
      for (int i = 0; i < 4; ++i) CHECK(std::abs(mean[i] - full[i]) < 5.0 * se[i]);
    }
  }
}
