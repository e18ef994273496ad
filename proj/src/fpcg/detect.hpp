#ifndef FPCG_DETECT_HPP
#define FPCG_DETECT_HPP

#include <vector>

#include "types.hpp"

namespace fpcg {

struct TeagerTrackerConfig {
  double band_lo_hz = 34.0;
  double band_hi_hz = 54.0;
  int band_order = 4;
  double train_s = 5.0;          // initialisation phase
  double window_frac = 0.25;     // search half width as a fraction of the mean beat interval
  std::size_t history = 8;       // beats kept for the running interval/energy averages
  double smooth_s = 0.02;        // moving average over the energy before peak picking
  double hr_lo_bpm = 80.0;
  double hr_hi_bpm = 210.0;
};

// Band-pass + Teager energy beat tracker: an initialisation phase sets the
// mean beat interval and an energy threshold (half the mean of the last
// `history` beat energies); afterwards candidates are searched in a window
// around the predicted next beat and the one nearest the prediction wins.
EventList detect_teager_tracker(const Record& rec, const TeagerTrackerConfig& cfg = {});

struct RmsDetectorConfig {
  double lp_hz = 110.0;
  double hp_hz = 35.0;
  int order = 4;
  double rms_window_s = 0.10;
  double merge_gap_s = 0.05;     // closer peaks merge, larger amplitude kept
  double threshold_frac = 0.30;  // of the 95th-percentile RMS value
  double threshold_pctl = 0.95;
  double hr_lo_bpm = 100.0;
  double hr_hi_bpm = 200.0;
  double prominence_window_s = 0.3;
  double prominence_frac = 2.5; // required rise over the local floor, in thresholds
  double regularity_frac = 0.25; // allowed deviation from the running median interval
  std::size_t regularity_history = 8;
};

// RMS-envelope local-maximum detector with a global threshold, peak merging,
// a plausible-rate interval rule and an interval-regularity filter.
EventList detect_rms_threshold(const Record& rec, const RmsDetectorConfig& cfg = {});

struct HeuristicConfig {
  double long_window_s = 0.25;  // heart-cycle scale
  double short_window_s = 0.05; // individual-sound scale
  double min_region_s = 0.01;
};

// Windowed-sum intensity heuristic on the raw signal: short-versus-long
// moving-sum contrast isolates the sounds, positive regions become events,
// and the shorter-gap-first rule splits S1 from S2.
EventList detect_heuristic_intensity(const Record& rec, const HeuristicConfig& cfg = {});

// Katz fractal dimension of one window: D = log10(L/a) / log10(d/a) with L
// the path length, a = L/(n-1) and d the largest distance from the first
// sample. A constant window is defined as D = 1.
double katz_fd(const std::vector<double>& window);

struct KfdConfig {
  int max_level = 5;
  double select_p = 0.25;   // keep details contributing >= p * max contribution
  double window_s = 0.05;
  double hop_s = 0.01;
  double epsilon = 1e-4;    // relative energy-difference stopping rule
  int max_iter = 50;
  double min_region_s = 0.02;
};

struct PeelResult {
  std::vector<double> soft;         // final soft-thresholded signal
  std::vector<double> energy_diffs; // |E_k - E_{k-1}| per iteration
  bool converged = false;
};

// One peak-peeling pass over a fractal-dimension sequence: soft threshold at
// mean+SD (sub-threshold values become one), intermediary = (thresholded -
// signal) + mean, iterated until the intermediary energy settles.
PeelResult kfd_peel(const std::vector<double>& fd, double epsilon, int max_iter);

// Wavelet-detail (db4) selection by explained-energy contributions, sliding
// Katz fractal dimension, and iterative peak peeling down to a binary mask.
EventList detect_kfd_peakpeel(const Record& rec, const KfdConfig& cfg = {});

// Shared S1/S2 phase assignment: alternating events are paired so the
// shorter mean gap becomes the S1->S2 (systolic) side.
std::vector<Event> assign_kinds_by_gap(const std::vector<double>& times);

} // namespace fpcg

#endif
