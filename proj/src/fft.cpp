#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "torusflow/errors.hpp"

namespace torusflow::detail {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per shape and never destroyed.
fftw_plan plan_for(int dim, int size, int sign, std::complex<double>* sample) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto [it, inserted] = plans.try_emplace({dim, size, sign}, nullptr);
  if (inserted) {
    auto* buf = reinterpret_cast<fftw_complex*>(sample);
    const int dir = sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    it->second = dim == 1 ? fftw_plan_dft_1d(size, buf, buf, dir, flags)
                          : fftw_plan_dft_2d(size, size, buf, buf, dir, flags);
    if (!it->second) fail(ErrorKind::InvalidArgument, "FFTW planning failed");
  }
  return it->second;
}

}  // namespace

void fft_inplace(std::vector<std::complex<double>>& data, int dim, int size, int sign) {
  const std::size_t expected = dim == 1 ? size : static_cast<std::size_t>(size) * size;
  require(data.size() == expected, "FFT buffer size mismatch");
  // FFTW_ESTIMATE planning does not touch the buffer contents.
  fftw_plan p = plan_for(dim, size, sign, data.data());
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, buf, buf);
}

}  // namespace torusflow::detail
