// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mkhbm/error.hpp"
#include "mkhbm/problems.hpp"
#include "mkhbm/rng.hpp"

namespace mkhbm {

namespace {

constexpr double kParallelEps = 1e-14;

// Parameter interval on which origin + t*dir stays inside [-h, h] along one axis.
bool clip_axis(double origin, double dir, double h, double& t_lo, double& t_hi) {
  if (std::abs(dir) < kParallelEps) return origin > -h && origin < h;
  double a = (-h - origin) / dir, b = (h - origin) / dir;
  if (a > b) std::swap(a, b);
  t_lo = std::max(t_lo, a);
  t_hi = std::min(t_hi, b);
  return true;
}

}  // namespace

std::vector<RaySegment> trace_ray(std::size_t grid, double ox, double oy, double angle) {
  if (grid == 0) fail(ErrorKind::Parameter, "grid must be at least 1");
  const double h = 0.5 * static_cast<double>(grid);
  const double dx = std::cos(angle), dy = std::sin(angle);

  double t_in = -std::numeric_limits<double>::infinity();
  double t_out = std::numeric_limits<double>::infinity();
  if (!clip_axis(ox, dx, h, t_in, t_out) || !clip_axis(oy, dy, h, t_in, t_out)) return {};
  if (!(t_out > t_in)) return {};

  // Every crossing of a pixel boundary splits the chord; midpoints then
  // identify the pixel owning each piece.
  std::vector<double> ts{t_in, t_out};
  for (std::size_t i = 0; i <= grid; ++i) {
    const double line = -h + static_cast<double>(i);
    if (std::abs(dx) >= kParallelEps) {
      const double t = (line - ox) / dx;
      if (t > t_in && t < t_out) ts.push_back(t);
    }
    if (std::abs(dy) >= kParallelEps) {
      const double t = (line - oy) / dy;
      if (t > t_in && t < t_out) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());

  std::vector<RaySegment> out;
  const auto last = static_cast<double>(grid - 1);
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const double len = ts[k + 1] - ts[k];
    if (len <= 1e-13) continue;
    const double tm = 0.5 * (ts[k] + ts[k + 1]);
    const double ix = std::clamp(std::floor(ox + tm * dx + h), 0.0, last);
    const double iy = std::clamp(std::floor(oy + tm * dy + h), 0.0, last);
    const auto pixel = static_cast<std::size_t>(iy) * grid + static_cast<std::size_t>(ix);
    if (!out.empty() && out.back().pixel == pixel) {
      out.back().length += len;
    } else {
      out.push_back({pixel, len});
    }
  }
  return out;
}

Vector disk_phantom(std::size_t grid, std::uint64_t seed) {
  const double g = static_cast<double>(grid);
  struct Disk {
    double cx, cy, radius, value;
  };
  // Shell and core are fixed; a few small inclusions move with the seed.
  std::vector<Disk> disks{{0.0, 0.0, 0.45 * g, 1.0}, {0.0, 0.0, 0.33 * g, -0.5}};
  auto rng = RngStream::derive(seed, {7});
  for (int k = 0; k < 3; ++k) {
    const double r = 0.2 * g * std::sqrt(rng.uniform());
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    disks.push_back({r * std::cos(phi), r * std::sin(phi), 0.08 * g + 0.04 * g * rng.uniform(), 0.75});
  }

  Vector x = Vector::Zero(static_cast<Eigen::Index>(grid * grid));
  for (std::size_t iy = 0; iy < grid; ++iy) {
    for (std::size_t ix = 0; ix < grid; ++ix) {
      const double px = static_cast<double>(ix) + 0.5 - 0.5 * g;
      const double py = static_cast<double>(iy) + 0.5 - 0.5 * g;
      double v = 0.0;
      for (const auto& d : disks) {
        if ((px - d.cx) * (px - d.cx) + (py - d.cy) * (py - d.cy) <= d.radius * d.radius) v += d.value;
      }
      x[static_cast<Eigen::Index>(iy * grid + ix)] = v;
    }
  }
  return x;
}

ProblemInstance tomo_problem(const TomoGeometry& geo, std::uint64_t seed) {
  if (geo.grid == 0 || geo.angles == 0 || geo.detectors == 0) {
    fail(ErrorKind::Parameter, "tomography geometry needs grid, angles, detectors >= 1");
  }
  const double span = static_cast<double>(geo.grid) * std::numbers::sqrt2;
  const double spacing = span / static_cast<double>(geo.detectors);

  std::vector<Triplet> triplets;
  std::size_t row = 0;
  for (std::size_t a = 0; a < geo.angles; ++a) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(a) / static_cast<double>(geo.angles);
    const double nx = -std::sin(theta), ny = std::cos(theta);
    for (std::size_t k = 0; k < geo.detectors; ++k) {
      const double u = (static_cast<double>(k) + 0.5 - 0.5 * static_cast<double>(geo.detectors)) * spacing;
      const auto segs = trace_ray(geo.grid, u * nx, u * ny, theta);
      if (segs.empty()) continue;
      for (const auto& s : segs) triplets.push_back({row, s.pixel, s.length});
      ++row;
    }
  }
  const std::size_t d = geo.grid * geo.grid;
  Matrix m = Matrix::from_triplets(row, d, std::move(triplets));
  Vector x = disk_phantom(geo.grid, seed);
  Vector b = m.multiply(x);
  GeneratorInfo info{"tomo",
                     {{"grid", double(geo.grid)}, {"angles", double(geo.angles)}, {"detectors", double(geo.detectors)}},
                     seed};
  return assemble_problem(std::move(m), std::move(b), std::move(x), true, std::move(info));
}

}  // namespace mkhbm
