#include "fft.hpp"

#include <cmath>
#include <numbers>

#include "common.hpp"

namespace fpcg {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace {

void fft_pow2(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  // bit reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const cplx wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        cplx u = a[i + k];
        cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
}

// chirp-z for arbitrary N; exact DFT via pow2 convolution
void fft_bluestein(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  const std::size_t m = next_pow2(2 * n - 1);
  // chirp[k] = exp(-i*pi*k^2/n); k^2 is reduced mod 2n in exact integer math
  std::vector<cplx> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const unsigned long long k2 = (static_cast<unsigned long long>(k) * k) % (2ull * n);
    double ang = std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    if (!inverse) ang = -ang;
    chirp[k] = cplx(std::cos(ang), std::sin(ang));
  }
  std::vector<cplx> p(m, cplx(0.0, 0.0)), q(m, cplx(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) p[k] = a[k] * chirp[k];
  q[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) q[k] = q[m - k] = std::conj(chirp[k]);
  fft_pow2(p, false);
  fft_pow2(q, false);
  for (std::size_t k = 0; k < m; ++k) p[k] *= q[k];
  fft_pow2(p, true);
  for (std::size_t k = 0; k < n; ++k) a[k] = p[k] * chirp[k];
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
}

} // namespace

void fft(std::vector<cplx>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n == 0) fail(ErrorCode::invalid_argument, "fft of empty sequence");
  if (n == 1) return;
  if ((n & (n - 1)) == 0)
    fft_pow2(data, inverse);
  else
    fft_bluestein(data, inverse);
}

std::vector<cplx> fft_real(const std::vector<double>& x) {
  std::vector<cplx> data(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) data[i] = cplx(x[i], 0.0);
  fft(data, false);
  return data;
}

std::vector<double> autocorrelation(const std::vector<double>& x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (n == 0) fail(ErrorCode::invalid_argument, "autocorrelation of empty sequence");
  if (max_lag >= n) max_lag = n - 1;
  const std::size_t m = next_pow2(2 * n);
  std::vector<cplx> data(m, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) data[i] = cplx(x[i], 0.0);
  fft(data, false);
  for (auto& v : data) v = cplx(std::norm(v), 0.0);
  fft(data, true);
  std::vector<double> r(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) r[k] = data[k].real();
  return r;
}

} // namespace fpcg
