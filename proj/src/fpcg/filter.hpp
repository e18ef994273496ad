#ifndef FPCG_FILTER_HPP
#define FPCG_FILTER_HPP

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "types.hpp"

namespace fpcg {

enum class FilterKind { lowpass, highpass, bandpass, bandstop };

FilterKind filter_kind_from_string(const std::string& s);

struct Biquad {
  // transfer (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

// Digital IIR filter designed at a fixed sample rate. Holds both the cascaded
// second-order sections used for filtering and the expanded (b, a) polynomial
// coefficients with a0 = 1.
struct FilterSpec {
  FilterKind kind = FilterKind::lowpass;
  int order = 0;
  std::vector<double> cutoffs_hz; // one value, or (low, high)
  double fs = 0.0;
  std::vector<double> b;
  std::vector<double> a; // a[0] == 1
  std::vector<Biquad> sos;

  double max_pole_magnitude() const;
};

// Butterworth design via analog prototype + bilinear transform.
// order in [1, 10]; cutoffs strictly inside (0, fs/2).
FilterSpec design_butterworth(FilterKind kind, int order, const std::vector<double>& cutoffs_hz, double fs);

// |H(e^{j 2 pi f / fs})| of a single forward pass.
double magnitude_response(const FilterSpec& spec, double freq_hz);

std::vector<double> filter_forward(const FilterSpec& spec, const std::vector<double>& x);

// Forward-backward filtering: zero phase, squared magnitude response.
// Odd-reflection padding with steady-state initial conditions.
std::vector<double> filter_zero_phase(const FilterSpec& spec, const std::vector<double>& x);

Record apply_filter(const FilterSpec& spec, const Record& rec, bool zero_phase);

// Clamps a band's upper edge to 0.45*fs when it reaches Nyquist (and warns);
// some published bands assume higher sample rates than fetal recordings use.
std::pair<double, double> clamp_band_to_nyquist(double lo_hz, double hi_hz, double fs);

} // namespace fpcg

#endif
