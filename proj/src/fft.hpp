#pragma once

#include <complex>
#include <vector>

namespace torusflow::detail {

/// In-place unnormalised DFT of a size^dim array (row-major for dim 2).
/// sign = -1 computes sum_x f(x) exp(-2 pi i k x / n).
void fft_inplace(std::vector<std::complex<double>>& data, int dim, int size, int sign);

}  // namespace torusflow::detail
