#ifndef FPCG_WAVELET_HPP
#define FPCG_WAVELET_HPP

#include <string>
#include <vector>

#include "types.hpp"

namespace fpcg {

// Two-channel biorthogonal analysis/synthesis filter bank, all filters the
// same length. Supported families: reverse-biorthogonal 3.9 (spline analysis
// low-pass, 20-tap dual synthesis) and Daubechies 4.
struct WaveletBank {
  std::string name;
  std::vector<double> dec_lo, dec_hi;
  std::vector<double> rec_lo, rec_hi;
};

const WaveletBank& wavelet_bank(const std::string& name); // "rbio3.9" | "db4"

// Single analysis stage (zero extension): full convolution downsampled on the
// odd phase; coefficient length floor((n + L - 1) / 2).
void dwt_single(const std::vector<double>& x, const WaveletBank& wb, std::vector<double>& approx,
                std::vector<double>& detail);

// Inverse of dwt_single for an original length n.
std::vector<double> idwt_single(const std::vector<double>& approx, const std::vector<double>& detail,
                                const WaveletBank& wb, std::size_t n);

struct DwtDecomposition {
  std::vector<std::vector<double>> details; // details[l] is level l+1
  std::vector<double> approx;               // deepest approximation
  std::vector<std::size_t> lengths;         // input length at each stage, for reconstruction
};

DwtDecomposition dwt_cascade(const std::vector<double>& x, const WaveletBank& wb, int levels);

// Time-domain component carried by one detail level: inverse cascade with all
// other subbands zeroed. Output has the original length.
std::vector<double> wavelet_detail_component(const DwtDecomposition& dec, const WaveletBank& wb, int level);

int max_dwt_levels(std::size_t n, const WaveletBank& wb);

// Detail level whose subband sits nearest a target frequency: minimises
// |fs / 2^(l+1) - target|. With the 40 Hz envelogram band this picks level 2
// at 333 Hz.
int select_detail_level(double fs, double target_hz, int max_level);

// |detail coefficients| of the selected rbio3.9 level, linearly interpolated
// onto a feature grid of n_out samples at feature_rate. Interpolation happens
// on the signed coefficients; the absolute value is taken last.
std::vector<double> dwt_detail_envelope(const std::vector<double>& x, double fs, int level,
                                        double feature_rate, std::size_t n_out);

} // namespace fpcg

#endif
