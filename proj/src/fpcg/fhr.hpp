#ifndef FPCG_FHR_HPP
#define FPCG_FHR_HPP

#include <vector>

#include "types.hpp"

namespace fpcg {

struct FhrFromLabelsConfig {
  double window_s = 10.0;
  double overlap = 0.5;
  double hr_lo_bpm = 80.0;
  double hr_hi_bpm = 210.0;
};

// Windowed rate from S1 event times: per window, 60 / median of the
// successive S1-S1 intervals fully inside the window, intervals outside the
// plausible range dropped, gap when fewer than two valid intervals remain.
FhrSeries fhr_from_events(const std::vector<double>& s1_times_s, double duration_s,
                          const FhrFromLabelsConfig& cfg = {});

struct TangConfig {
  double window_s = 10.0;
  double overlap = 0.5;
  double hr_lo_bpm = 80.0;
  double hr_hi_bpm = 210.0;
  double grid_bpm = 0.1;        // cyclic-frequency resolution ceiling
  double spectral_lo_hz = 15.0; // spectral support of the cyclic density
  double spectral_hi_hz = 100.0;
};

// Cyclic-spectrum rate estimator: per window, the autocorrelation of the
// signal restricted to the heart-sound spectral band is squared and
// Fourier-transformed over lag; the dominant cyclic frequency inside the
// plausible range gives the rate. Lags below the shortest plausible cycle are
// excluded so noise correlation cannot masquerade as a rate.
FhrSeries fhr_tang_cyclic(const Record& rec, const TangConfig& cfg = {});

struct ZahorianConfig {
  double band_lo_hz = 16.0;
  double band_hi_hz = 50.0;
  int band_order = 4;
  double frame_s = 6.0;
  double grid_window_s = 10.0; // frame centres sit on the shared window grid
  double grid_overlap = 0.5;
  double hr_lo_bpm = 90.0;
  double hr_hi_bpm = 210.0;
  double ac_threshold = 0.25;    // minimum normalised autocorrelation peak
  double merit_keep = 0.7;       // merit_t = keep*merit + (1-keep)*(1 - min(1, |dHR|/scale))
  double merit_scale_bpm = 20.0;
  double merit_gap = 0.5;        // below this the frame becomes a gap
  double template_freq_hz = 30.0; // expected S1 pulse for the matched filter
  double template_width_s = 0.06;
};

struct ZahorianResult {
  FhrSeries series;
  std::vector<double> merit; // per frame, aligned with series.center_s
};

// Band-pass + zero-phase matched filter (kernel from the inverse transform of
// the expected S1 magnitude spectrum), Teager energy, frame autocorrelation
// with a 90 bpm lower bound, and a running figure of merit that gates frames.
ZahorianResult fhr_zahorian(const Record& rec, const ZahorianConfig& cfg = {});

} // namespace fpcg

#endif
