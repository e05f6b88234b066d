// SPDX-License-Identifier: Apache-2.0
#include "mkhbm/sampling.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "mkhbm/error.hpp"

namespace mkhbm {

std::string_view to_string(SamplingScheme scheme) noexcept {
  return scheme == SamplingScheme::RowNorm ? "rownorm" : "uniform";
}

SamplingScheme parse_sampling_scheme(std::string_view name) {
  if (name == "rownorm") return SamplingScheme::RowNorm;
  if (name == "uniform") return SamplingScheme::Uniform;
  fail(ErrorKind::Parameter, "unknown sampling scheme '" + std::string(name) + "'");
}

Sampler build_sampler(const Matrix& a, SamplingScheme scheme) {
  const std::size_t n = a.rows();
  if (n == 0 || a.cols() == 0) fail(ErrorKind::Dimension, "cannot sample rows of an empty matrix");
  const auto norms = a.row_norms_sq();
  double frob = 0.0;
  for (double v : norms) frob += v;
  if (!(frob > 0.0)) fail(ErrorKind::Parameter, "matrix has zero Frobenius norm");

  Sampler s;
  s.scheme = scheme;
  s.probs.resize(n);
  if (scheme == SamplingScheme::RowNorm) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(norms[j] > 0.0)) fail(ErrorKind::Parameter, "row " + std::to_string(j) + " is zero; row-norm sampling needs p_j > 0");
      s.probs[j] = norms[j] / frob;
    }
    s.eta = 1.0;
  } else {
    std::fill(s.probs.begin(), s.probs.end(), 1.0 / static_cast<double>(n));
    s.eta = static_cast<double>(n) * *std::max_element(norms.begin(), norms.end()) / frob;
  }
  s.cumulative.resize(n);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    acc += s.probs[j];
    s.cumulative[j] = acc;
  }
  return s;
}

std::size_t draw_index(const Sampler& sampler, RngStream& rng) {
  const double u = rng.uniform() * sampler.cumulative.back();
  auto it = std::upper_bound(sampler.cumulative.begin(), sampler.cumulative.end(), u);
  auto j = static_cast<std::size_t>(it - sampler.cumulative.begin());
  return std::min(j, sampler.size() - 1);
}

void draw_batch_into(const Sampler& sampler, std::size_t batch_size, RngStream& rng, std::vector<std::size_t>& out) {
  if (batch_size == 0) fail(ErrorKind::Parameter, "batch size must be at least 1");
  out.resize(batch_size);
  for (auto& j : out) j = draw_index(sampler, rng);
}

void draw_counts(const Sampler& sampler, std::uint64_t batch_size, RngStream& rng, std::vector<std::uint64_t>& counts) {
  if (batch_size == 0) fail(ErrorKind::Parameter, "batch size must be at least 1");
  const std::size_t n = sampler.size();
  counts.assign(n, 0);
  std::uint64_t left = batch_size;
  double mass = 1.0;
  for (std::size_t j = 0; j < n && left > 0; ++j) {
    std::uint64_t c = left;
    if (j + 1 < n) {
      const double p = std::clamp(sampler.probs[j] / mass, 0.0, 1.0);
      c = std::binomial_distribution<std::uint64_t>(left, p)(rng);
    }
    mass -= sampler.probs[j];
    left -= c;
    counts[j] = c;
  }
}

BatchIndices draw_batch(const Sampler& sampler, std::size_t batch_size, RngStream& rng) {
  BatchIndices b;
  draw_batch_into(sampler, batch_size, rng, b.indices);
  return b;
}

}  // namespace mkhbm
