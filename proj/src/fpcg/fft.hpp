#ifndef FPCG_FFT_HPP
#define FPCG_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace fpcg {

using cplx = std::complex<double>;

// In-place DFT of arbitrary length (radix-2 for powers of two, Bluestein
// otherwise). inverse=true applies the 1/N factor.
void fft(std::vector<cplx>& data, bool inverse);

std::vector<cplx> fft_real(const std::vector<double>& x);

std::size_t next_pow2(std::size_t n);

// Linear (non-circular) autocorrelation r[k] = sum_t x[t] x[t+k], k = 0..max_lag.
std::vector<double> autocorrelation(const std::vector<double>& x, std::size_t max_lag);

} // namespace fpcg

#endif
