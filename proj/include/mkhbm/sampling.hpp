// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "mkhbm/linalg.hpp"
#include "mkhbm/rng.hpp"

namespace mkhbm {

enum class SamplingScheme { RowNorm, Uniform };

std::string_view to_string(SamplingScheme scheme) noexcept;
SamplingScheme parse_sampling_scheme(std::string_view name);

/// Row-sampling distribution p together with the constant eta >= 1 for which
/// eta * p_j >= ||a_j||^2 / ||A||_F^2 holds for every row.
struct Sampler {
  std::vector<double> probs;
  std::vector<double> cumulative;  // prefix sums of probs
  SamplingScheme scheme = SamplingScheme::RowNorm;
  double eta = 1.0;

  std::size_t size() const noexcept { return probs.size(); }
};

/// Row indices S_k, drawn i.i.d. with replacement.
struct BatchIndices {
  std::vector<std::size_t> indices;

  std::size_t size() const noexcept { return indices.size(); }
};

Sampler build_sampler(const Matrix& a, SamplingScheme scheme);

std::size_t draw_index(const Sampler& sampler, RngStream& rng);
BatchIndices draw_batch(const Sampler& sampler, std::size_t batch_size, RngStream& rng);
/// Same draws as draw_batch, reusing the caller's buffer.
void draw_batch_into(const Sampler& sampler, std::size_t batch_size, RngStream& rng, std::vector<std::size_t>& out);

/// Per-row multiplicities of `batch_size` i.i.d. draws, generated directly as a
/// multinomial vector by sequential binomials. Cost is O(n) whatever the batch
/// size, which is what makes batches far beyond n affordable.
void draw_counts(const Sampler& sampler, std::uint64_t batch_size, RngStream& rng, std::vector<std::uint64_t>& counts);

}  // namespace mkhbm
