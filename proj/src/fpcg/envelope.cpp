#include "envelope.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "filter.hpp"
#include "mathutil.hpp"

namespace fpcg {

std::vector<double> hilbert_envelope(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2) fail(ErrorCode::invalid_argument, "hilbert envelope needs at least 2 samples");
  std::vector<cplx> spec = fft_real(x);
  // analytic-signal spectrum: keep DC (and Nyquist for even n), double the
  // positive frequencies, zero the negative half
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < (n + 1) / 2; ++k) spec[k] *= 2.0;
  for (std::size_t k = half + 1; k < n; ++k) spec[k] = cplx(0.0, 0.0);
  fft(spec, true);
  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(spec[i]);
  return env;
}

std::vector<double> homomorphic_envelope(const std::vector<double>& x, double fs, double lpf_cutoff_hz) {
  std::vector<double> env = hilbert_envelope(x);
  double peak = 0.0;
  for (double v : env) peak = std::max(peak, v);
  const double floor_v = std::max(1e-8 * peak, 1e-300);
  std::vector<double> logenv(env.size());
  for (std::size_t i = 0; i < env.size(); ++i) logenv[i] = std::log(std::max(env[i], floor_v));
  const FilterSpec lpf = design_butterworth(FilterKind::lowpass, 1, {lpf_cutoff_hz}, fs);
  std::vector<double> smooth = filter_zero_phase(lpf, logenv);
  for (double& v : smooth) v = std::exp(v);
  return smooth;
}

std::vector<double> teager_energy(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 3) fail(ErrorCode::invalid_argument, "teager energy needs at least 3 samples");
  std::vector<double> psi(n);
  for (std::size_t i = 1; i + 1 < n; ++i) psi[i] = x[i] * x[i] - x[i - 1] * x[i + 1];
  psi[0] = psi[1];
  psi[n - 1] = psi[n - 2];
  return psi;
}

std::vector<double> rms_envelope(const std::vector<double>& x, double fs, double window_s, double hop_s) {
  if (!(window_s > 0.0) || !(hop_s > 0.0))
    fail(ErrorCode::invalid_argument, "window and hop must be positive");
  const std::size_t wlen = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window_s * fs)));
  if (wlen > x.size()) fail(ErrorCode::invalid_argument, "RMS window longer than record");
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const std::size_t start = static_cast<std::size_t>(std::llround(static_cast<double>(k) * hop_s * fs));
    if (start + wlen > x.size()) break;
    double s = 0.0;
    for (std::size_t i = start; i < start + wlen; ++i) s += x[i] * x[i];
    out.push_back(std::sqrt(s / static_cast<double>(wlen)));
  }
  return out;
}

std::vector<double> rms_envelope_sliding(const std::vector<double>& x, double fs, double window_s) {
  const std::size_t n = x.size();
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = x[i] * x[i];
  std::vector<double> ms = moving_average(sq, std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window_s * fs))));
  for (double& v : ms) v = std::sqrt(std::max(0.0, v));
  return ms;
}

std::vector<BandEnergyFrame> stft_band_energy(const std::vector<double>& x, double fs, double band_lo_hz,
                                              double band_hi_hz, double frame_s, double hop_s) {
  const std::size_t n = x.size();
  const std::size_t frame = static_cast<std::size_t>(std::llround(frame_s * fs));
  if (frame < 2) fail(ErrorCode::invalid_argument, "STFT frame shorter than 2 samples");
  if (!(hop_s > 0.0)) fail(ErrorCode::invalid_argument, "hop must be positive");
  if (!(band_lo_hz < band_hi_hz)) fail(ErrorCode::invalid_argument, "empty frequency band");

  std::vector<BandEnergyFrame> frames;
  // frame centres sit on the exact nominal grid k*hop_s; rounding each
  // centre independently avoids cumulative drift against the feature clock
  for (std::size_t k = 0;; ++k) {
    const std::size_t center = static_cast<std::size_t>(std::llround(static_cast<double>(k) * hop_s * fs));
    if (center >= n) break;
    const std::ptrdiff_t lo =
        std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(center) - static_cast<std::ptrdiff_t>(frame / 2));
    const std::ptrdiff_t hi =
        std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n), lo + static_cast<std::ptrdiff_t>(frame));
    const std::size_t len = static_cast<std::size_t>(hi - lo);
    if (len < 2) {
      frames.push_back(BandEnergyFrame{});
      continue;
    }
    std::vector<double> w(len);
    for (std::size_t i = 0; i < len; ++i) {
      const double ham = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                static_cast<double>(len - 1));
      w[i] = x[static_cast<std::size_t>(lo) + i] * ham;
    }
    std::vector<cplx> spec = fft_real(w);
    BandEnergyFrame f;
    for (std::size_t k = 0; k <= len / 2; ++k) {
      const double fk = static_cast<double>(k) * fs / static_cast<double>(len);
      if (fk >= band_lo_hz && fk < band_hi_hz) {
        f.sum += std::norm(spec[k]);
        ++f.bins;
      }
    }
    frames.push_back(f);
  }
  return frames;
}

std::vector<double> psd_energy_envelope(const std::vector<double>& x, double fs, double band_lo_hz,
                                        double band_hi_hz, double frame_s, double hop_s) {
  const auto frames = stft_band_energy(x, fs, band_lo_hz, band_hi_hz, frame_s, hop_s);
  std::vector<double> out(frames.size(), 0.0);
  bool any_bins = false;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].bins > 0) {
      out[i] = frames[i].sum / static_cast<double>(frames[i].bins);
      any_bins = true;
    }
  }
  if (!any_bins) fail(ErrorCode::numeric, "frequency band contains no FFT bins (frame too short)");
  return out;
}

} // namespace fpcg
