// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mkhbm/linalg.hpp"

namespace mkhbm {

/// Records how an instance was produced so it can be regenerated.
struct GeneratorInfo {
  std::string name;
  std::vector<std::pair<std::string, double>> params;
  std::uint64_t seed = 0;
};

struct ProblemInstance {
  Matrix a;
  Vector b;
  Vector x_star;     // least-squares minimizer
  Vector x_planted;  // vector used to build b before any noise
  Vector r;          // A x_star - b
  double sigma = 0.0;  // max_i |r_i| / ||a_i||
  SpectrumSummary spectrum;
  bool consistent = true;
  GeneratorInfo info;

  std::size_t rows() const noexcept { return a.rows(); }
  std::size_t cols() const noexcept { return a.cols(); }
};

/// sigma_j^2 = 1 + ((j-1)/(d-1)) (kappa-1) rho^(d-j), ascending in j.
std::vector<double> spectrum_exponential(std::size_t d, double kappa, double rho);
/// sigma_j^2 = 1 + ((j-1)/(d-1))^rho (kappa-1).
std::vector<double> spectrum_algebraic(std::size_t d, double kappa, double rho);

/// A = U diag(sqrt(values)) V^T with Haar-like orthonormal factors, planted
/// Gaussian solution and b = A x.
ProblemInstance synth_svd_problem(std::size_t n, std::size_t d, const std::vector<double>& squared_singular_values,
                                  std::uint64_t seed);

/// A = D G with G Bernoulli(1/10) and D diagonal in {1, 10}; CSR storage.
ProblemInstance sparse_bernoulli_problem(std::size_t n, std::size_t d, std::uint64_t seed);

/// Adds noise of norm exactly `radius`, uniform on the sphere, to b and
/// recomputes the least-squares quantities.
ProblemInstance make_inconsistent(const ProblemInstance& p, double radius, std::uint64_t seed);

struct TomoGeometry {
  std::size_t grid = 16;         // image is grid x grid unit pixels centred at the origin
  std::size_t angles = 90;       // equally spaced over a full turn
  std::size_t detectors = 24;    // parallel rays per angle
};

struct RaySegment {
  std::size_t pixel;  // row-major: iy * grid + ix
  double length;
};

/// Intersection lengths of the line {origin + t * (cos angle, sin angle)}
/// with the pixels of a grid x grid unit-pixel image centred at the origin.
std::vector<RaySegment> trace_ray(std::size_t grid, double origin_x, double origin_y, double angle);

/// Parallel-beam system matrix with a planted disk phantom. Rays that miss
/// the grid are dropped, so rows() may be below angles * detectors.
ProblemInstance tomo_problem(const TomoGeometry& geometry, std::uint64_t seed);
/// Phantom image (row-major, grid*grid) used by tomo_problem.
Vector disk_phantom(std::size_t grid, std::uint64_t seed);

/// Computes x_star, r, sigma and the spectrum for (A, b). When `consistent`
/// the planted vector is taken as the minimizer unchanged.
ProblemInstance assemble_problem(Matrix a, Vector b, Vector x_planted, bool consistent, GeneratorInfo info);

/// Throws Error(Precondition) when the instance violates its invariants.
void validate_problem(const ProblemInstance& p);

/// Writes <dir>/A.mtx and <dir>/problem.json.
void save_problem(const ProblemInstance& p, const std::filesystem::path& dir);
ProblemInstance load_problem(const std::filesystem::path& dir);

}  // namespace mkhbm
