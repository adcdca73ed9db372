#include <cmath>

#include "expcopilot/kernels.hpp"

namespace expcopilot::kernels::serial {

void cosine_scores(std::span<const double> query, MatrixView pool, std::span<double> out) {
  const double qn = std::sqrt(dot(query, query));
  for (std::size_t r = 0; r < pool.rows; ++r) {
    const auto row = pool.row(r);
    out[r] = dot(query, row) / (qn * std::sqrt(dot(row, row)));
  }
}

NearestHit nearest_row(std::span<const double> point, MatrixView grid,
                       std::span<const unsigned char> eligible) {
  NearestHit best;
  for (std::size_t r = 0; r < grid.rows; ++r) {
    if (!eligible[r]) continue;
    double d2 = 0.0;
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const double diff = grid.at(r, c) - point[c];
      d2 += diff * diff;
    }
    if (d2 < best.distance2) best = {r, d2};
  }
  return best;
}

void column_means(MatrixView m, std::span<double> out) {
  for (std::size_t c = 0; c < m.cols; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r) s += m.at(r, c);
    out[c] = s / static_cast<double>(m.rows);
  }
}

void portfolio_scores(MatrixView m, std::span<const double> incumbent, std::span<double> out) {
  for (std::size_t c = 0; c < m.cols; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r) s += std::max(incumbent[r], m.at(r, c));
    out[c] = s / static_cast<double>(m.rows);
  }
}

}  // namespace expcopilot::kernels::serial
