#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

// Exact-scan scoring kernels.
//
// Both the serial and the OpenMP kernel evaluate every row through
// score_row(), so the per-row summation order (fused vector index ascending)
// is identical. Parallelism is only ever across rows.
namespace lexfuse::kernels {

// Row-major block of vectors with precomputed Euclidean norms.
struct MatrixView {
  std::span<const double> values;  // rows * dim
  std::span<const double> norms;   // rows
  std::size_t rows = 0;
  std::size_t dim = 0;

  const double* row(std::size_t r) const { return values.data() + r * dim; }
};

inline double dot(const double* a, const double* b, std::size_t dim) {
  double sum = 0.0;
  for (std::size_t k = 0; k < dim; ++k) sum += a[k] * b[k];
  return sum;
}

inline double clamped_cosine(double dot_product, double norm_a, double norm_b) {
  return std::clamp(dot_product / (norm_a * norm_b), -1.0, 1.0);
}

// sum_i cos(fused_i, law_row), i ascending.
inline double score_row(const MatrixView& fused, const double* law_row, double law_norm) {
  double acc = 0.0;
  for (std::size_t i = 0; i < fused.rows; ++i) {
    acc += clamped_cosine(dot(fused.row(i), law_row, fused.dim), fused.norms[i], law_norm);
  }
  return acc;
}

// out[j] = score_row(fused, laws.row(j)). Requires fused.dim == laws.dim and
// out.size() == laws.rows; callers validate.
void score_serial(const MatrixView& fused, const MatrixView& laws, std::span<double> out);

// Same contract; rows are split statically across `threads` OpenMP threads.
void score_parallel(const MatrixView& fused, const MatrixView& laws, std::span<double> out, int threads);

// Highest hardware thread count OpenMP will use.
int max_threads();

}  // namespace lexfuse::kernels
