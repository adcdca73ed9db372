#pragma once

// Data-parallel inner loops of the pipeline. Every kernel exists twice: an
// OpenMP version used by the library and a plain serial reference kept for
// tests and the benchmark target. Both versions perform the same floating
// point operations in the same per-element order, so results are bitwise
// identical.

#include <cstddef>
#include <limits>
#include <span>

namespace expcopilot::kernels {

// Row-major dense matrix view.
struct MatrixView {
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return data.subspan(r * cols, cols); }
};

struct NearestHit {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t index = npos;
  double distance2 = std::numeric_limits<double>::infinity();

  bool found() const { return index != npos; }
};

// Below this many rows the parallel kernels run on the calling thread.
inline constexpr std::size_t kParallelThreshold = 256;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

namespace serial {

// out[r] = cos(query, pool.row(r)). query_norm and row norms must be > 0;
// callers validate.
void cosine_scores(std::span<const double> query, MatrixView pool, std::span<double> out);

// Row of `grid` closest to `point` in squared L2, restricted to rows with
// eligible[r] != 0. Ties resolve to the lowest row index.
NearestHit nearest_row(std::span<const double> point, MatrixView grid,
                       std::span<const unsigned char> eligible);

// out[c] = mean over rows of m(r, c).
void column_means(MatrixView m, std::span<double> out);

// out[c] = mean over rows r of max(incumbent[r], m(r, c)); the marginal value
// of adding column c to a portfolio whose per-row best is `incumbent`.
void portfolio_scores(MatrixView m, std::span<const double> incumbent, std::span<double> out);

}  // namespace serial

namespace parallel {

void cosine_scores(std::span<const double> query, MatrixView pool, std::span<double> out);
NearestHit nearest_row(std::span<const double> point, MatrixView grid,
                       std::span<const unsigned char> eligible);
void column_means(MatrixView m, std::span<double> out);
void portfolio_scores(MatrixView m, std::span<const double> incumbent, std::span<double> out);

}  // namespace parallel

}  // namespace expcopilot::kernels
