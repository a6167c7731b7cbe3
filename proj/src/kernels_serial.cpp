#include "lexfuse/kernels.hpp"

namespace lexfuse::kernels {

void score_serial(const MatrixView& fused, const MatrixView& laws, std::span<double> out) {
  for (std::size_t j = 0; j < laws.rows; ++j) {
    out[j] = score_row(fused, laws.row(j), laws.norms[j]);
  }
}

}  // namespace lexfuse::kernels
