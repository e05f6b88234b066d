// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "mkhbm/error.hpp"
#include "mkhbm/experiments.hpp"

namespace mkhbm {

double percentile_sorted(const std::vector<double>& sorted, double pct) {
  if (sorted.empty()) fail(ErrorKind::Parameter, "percentile of an empty sample");
  if (!(pct >= 0.0 && pct <= 100.0)) fail(ErrorKind::Parameter, "percentile must lie in [0, 100]");
  const double pos = pct / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (frac == 0.0 || i + 1 >= sorted.size()) return sorted[i];
  const double a = sorted[i], b = sorted[i + 1];
  if (std::isinf(b)) return b;  // avoids inf - inf and 0 * inf
  return a + frac * (b - a);
}

double percentile(std::vector<double> values, double pct) {
  std::sort(values.begin(), values.end());
  return percentile_sorted(values, pct);
}

Bands aggregate_bands(const std::vector<std::vector<double>>& traces, const std::array<double, 3>& pcts) {
  if (traces.empty()) fail(ErrorKind::Parameter, "no traces to aggregate");
  const std::size_t len = traces.front().size();
  for (const auto& t : traces) {
    if (t.size() != len) fail(ErrorKind::Dimension, "traces must have equal length");
  }
  Bands b;
  b.lo.resize(len);
  b.med.resize(len);
  b.hi.resize(len);
  std::vector<double> column(traces.size());
  for (std::size_t k = 0; k < len; ++k) {
    for (std::size_t t = 0; t < traces.size(); ++t) column[t] = traces[t][k];
    std::sort(column.begin(), column.end());
    b.lo[k] = percentile_sorted(column, pcts[0]);
    b.med[k] = percentile_sorted(column, pcts[1]);
    b.hi[k] = percentile_sorted(column, pcts[2]);
  }
  return b;
}

}  // namespace mkhbm
