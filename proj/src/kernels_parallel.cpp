#include <omp.h>

#include <cmath>
#include <cstdint>

#include "expcopilot/kernels.hpp"

namespace expcopilot::kernels::parallel {

void cosine_scores(std::span<const double> query, MatrixView pool, std::span<double> out) {
  const double qn = std::sqrt(dot(query, query));
  const auto rows = static_cast<std::int64_t>(pool.rows);
#pragma omp parallel for schedule(static) if (pool.rows >= kParallelThreshold)
  for (std::int64_t r = 0; r < rows; ++r) {
    const auto row = pool.row(static_cast<std::size_t>(r));
    out[r] = dot(query, row) / (qn * std::sqrt(dot(row, row)));
  }
}

NearestHit nearest_row(std::span<const double> point, MatrixView grid,
                       std::span<const unsigned char> eligible) {
  NearestHit best;
  const auto rows = static_cast<std::int64_t>(grid.rows);
#pragma omp parallel if (grid.rows >= kParallelThreshold)
  {
    NearestHit local;
#pragma omp for schedule(static) nowait
    for (std::int64_t r = 0; r < rows; ++r) {
      if (!eligible[r]) continue;
      double d2 = 0.0;
      for (std::size_t c = 0; c < grid.cols; ++c) {
        const double diff = grid.at(static_cast<std::size_t>(r), c) - point[c];
        d2 += diff * diff;
      }
      if (d2 < local.distance2) local = {static_cast<std::size_t>(r), d2};
    }
#pragma omp critical(expcopilot_nearest_row)
    {
      if (local.found() && (local.distance2 < best.distance2 ||
                            (local.distance2 == best.distance2 && local.index < best.index)))
        best = local;
    }
  }
  return best;
}

void column_means(MatrixView m, std::span<double> out) {
  const auto cols = static_cast<std::int64_t>(m.cols);
#pragma omp parallel for schedule(static) if (m.cols * m.rows >= kParallelThreshold)
  for (std::int64_t c = 0; c < cols; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r) s += m.at(r, static_cast<std::size_t>(c));
    out[c] = s / static_cast<double>(m.rows);
  }
}

void portfolio_scores(MatrixView m, std::span<const double> incumbent, std::span<double> out) {
  const auto cols = static_cast<std::int64_t>(m.cols);
#pragma omp parallel for schedule(static) if (m.cols * m.rows >= kParallelThreshold)
  for (std::int64_t c = 0; c < cols; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r)
      s += std::max(incumbent[r], m.at(r, static_cast<std::size_t>(c)));
    out[c] = s / static_cast<double>(m.rows);
  }
}

}  // namespace expcopilot::kernels::parallel
