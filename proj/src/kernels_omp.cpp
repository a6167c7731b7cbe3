#include <omp.h>

#include <cstdint>

#include "lexfuse/kernels.hpp"

namespace lexfuse::kernels {

void score_parallel(const MatrixView& fused, const MatrixView& laws, std::span<double> out, int threads) {
  const auto rows = static_cast<std::int64_t>(laws.rows);
#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::int64_t j = 0; j < rows; ++j) {
    out[j] = score_row(fused, laws.row(j), laws.norms[j]);
  }
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace lexfuse::kernels
