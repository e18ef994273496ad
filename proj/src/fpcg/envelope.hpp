#ifndef FPCG_ENVELOPE_HPP
#define FPCG_ENVELOPE_HPP

#include <vector>

#include "types.hpp"

namespace fpcg {

// |analytic signal|, analytic signal built with the FFT multiplier
// -i*sgn(omega) on the positive-frequency half.
std::vector<double> hilbert_envelope(const std::vector<double>& x);

// exp(LPF(log(envelope))) with a first-order zero-phase Butterworth low-pass.
// The log argument is floored at 1e-8 * max(envelope) to stay finite.
std::vector<double> homomorphic_envelope(const std::vector<double>& x, double fs, double lpf_cutoff_hz = 8.0);

// Teager-Kaiser operator x[n]^2 - x[n-1]*x[n+1] with replicated end points.
std::vector<double> teager_energy(const std::vector<double>& x);

// Windowed RMS, one value per hop; the window must fit inside the signal.
std::vector<double> rms_envelope(const std::vector<double>& x, double fs, double window_s, double hop_s);

// Sliding per-sample RMS (window centred on each sample, edges shrink).
std::vector<double> rms_envelope_sliding(const std::vector<double>& x, double fs, double window_s);

struct BandEnergyFrame {
  double sum = 0.0;   // sum of |X_k|^2 over bins inside the band
  std::size_t bins = 0;
};

// Short-time band energy with Hamming-windowed frames centred on the hop
// grid (edge frames shrink). Bin k counts when band_lo <= k*fs/N < band_hi.
std::vector<BandEnergyFrame> stft_band_energy(const std::vector<double>& x, double fs, double band_lo_hz,
                                              double band_hi_hz, double frame_s, double hop_s);

// Mean power-spectral-density inside a band, one value per hop.
std::vector<double> psd_energy_envelope(const std::vector<double>& x, double fs, double band_lo_hz,
                                        double band_hi_hz, double frame_s, double hop_s);

} // namespace fpcg

#endif
