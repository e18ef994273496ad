#include "detect.hpp"

#include <algorithm>
#include <cmath>

#include "envelope.hpp"
#include "filter.hpp"
#include "mathutil.hpp"
#include "wavelet.hpp"

namespace fpcg {

namespace {

struct Peak {
  std::size_t idx;
  double value;
};

std::vector<Peak> local_maxima(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
  std::vector<Peak> peaks;
  if (hi > x.size()) hi = x.size();
  for (std::size_t i = std::max<std::size_t>(lo, 1); i + 1 < hi; ++i) {
    if (x[i] > x[i - 1] && x[i] >= x[i + 1]) peaks.push_back(Peak{i, x[i]});
  }
  return peaks;
}

} // namespace

EventList detect_teager_tracker(const Record& rec, const TeagerTrackerConfig& cfg) {
  validate_record(rec);
  const double fs = rec.fs;
  if (rec.duration_s() <= cfg.train_s)
    fail(ErrorCode::invalid_argument, "record shorter than the initialisation phase");

  const auto [lo_hz, hi_hz] = clamp_band_to_nyquist(cfg.band_lo_hz, cfg.band_hi_hz, fs);
  const FilterSpec bp = design_butterworth(FilterKind::bandpass, cfg.band_order, {lo_hz, hi_hz}, fs);
  std::vector<double> energy = teager_energy(filter_zero_phase(bp, rec.samples));
  energy = moving_average(energy, std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.smooth_s * fs))));

  const double min_iv = 60.0 / cfg.hr_hi_bpm;
  const double max_iv = 60.0 / cfg.hr_lo_bpm;

  // initialisation: prominent peaks in the training region give the starting
  // interval and the energy history
  const std::size_t train_end = static_cast<std::size_t>(cfg.train_s * fs);
  std::vector<Peak> train_peaks;
  {
    double train_max = 0.0;
    for (std::size_t i = 0; i < train_end && i < energy.size(); ++i) train_max = std::max(train_max, energy[i]);
    const double floor_v = 0.3 * train_max;
    std::vector<Peak> cands = local_maxima(energy, 0, train_end);
    std::sort(cands.begin(), cands.end(), [](const Peak& a, const Peak& b) { return a.value > b.value; });
    const std::size_t min_dist = static_cast<std::size_t>(std::llround(min_iv * fs));
    for (const Peak& p : cands) {
      if (p.value < floor_v) break;
      bool clash = false;
      for (const Peak& q : train_peaks) {
        if ((p.idx > q.idx ? p.idx - q.idx : q.idx - p.idx) < min_dist) {
          clash = true;
          break;
        }
      }
      if (!clash) train_peaks.push_back(p);
    }
    std::sort(train_peaks.begin(), train_peaks.end(), [](const Peak& a, const Peak& b) { return a.idx < b.idx; });
  }
  if (train_peaks.size() < 2) return make_detections(rec.id, "teager", {});

  std::vector<double> intervals, energies;
  for (std::size_t i = 1; i < train_peaks.size(); ++i) {
    const double d = static_cast<double>(train_peaks[i].idx - train_peaks[i - 1].idx) / fs;
    if (d >= min_iv && d <= max_iv) intervals.push_back(d);
  }
  for (const Peak& p : train_peaks) energies.push_back(p.value);
  if (intervals.empty()) intervals.push_back(std::clamp(0.43, min_iv, max_iv));

  auto trim_history = [&](std::vector<double>& v) {
    if (v.size() > cfg.history) v.erase(v.begin(), v.end() - static_cast<std::ptrdiff_t>(cfg.history));
  };
  trim_history(intervals);
  trim_history(energies);

  std::vector<Event> detections;
  for (const Peak& p : train_peaks)
    detections.push_back(Event{static_cast<double>(p.idx) / fs, SoundKind::S1});

  double avg_interval = std::clamp(mean(intervals), min_iv, max_iv);
  double threshold = mean(energies) / 2.0;
  double last_t = static_cast<double>(train_peaks.back().idx) / fs;
  double predicted = last_t + avg_interval;

  const double duration = rec.duration_s();
  std::size_t guard = 0;
  const std::size_t guard_max = static_cast<std::size_t>(duration / min_iv) * 4 + 16;
  while (predicted < duration && ++guard < guard_max) {
    const double half = cfg.window_frac * avg_interval;
    const std::size_t w_lo = static_cast<std::size_t>(std::max(0.0, (predicted - half) * fs));
    const std::size_t w_hi = static_cast<std::size_t>(std::min(duration, predicted + half) * fs);
    const Peak* best = nullptr;
    std::vector<Peak> cands = local_maxima(energy, w_lo, w_hi + 1);
    double best_dist = 1e300;
    for (const Peak& p : cands) {
      if (p.value <= threshold) continue;
      const double dist = std::abs(static_cast<double>(p.idx) / fs - predicted);
      if (dist < best_dist) {
        best_dist = dist;
        best = &p;
      }
    }
    if (best != nullptr) {
      const double t = static_cast<double>(best->idx) / fs;
      intervals.push_back(t - last_t);
      trim_history(intervals);
      energies.push_back(best->value);
      trim_history(energies);
      avg_interval = std::clamp(mean(intervals), min_iv, max_iv);
      threshold = mean(energies) / 2.0;
      detections.push_back(Event{t, SoundKind::S1});
      last_t = t;
      predicted = t + avg_interval;
    } else {
      predicted += avg_interval; // missed beat, keep extrapolating
    }
  }
  return make_detections(rec.id, "teager", std::move(detections));
}

EventList detect_rms_threshold(const Record& rec, const RmsDetectorConfig& cfg) {
  validate_record(rec);
  const double fs = rec.fs;

  std::vector<double> x = rec.samples;
  if (cfg.lp_hz > 0.0) {
    double lp = cfg.lp_hz;
    if (lp >= fs / 2.0) lp = 0.45 * fs;
    x = filter_zero_phase(design_butterworth(FilterKind::lowpass, cfg.order, {lp}, fs), x);
  }
  if (cfg.hp_hz > 0.0)
    x = filter_zero_phase(design_butterworth(FilterKind::highpass, cfg.order, {cfg.hp_hz}, fs), x);

  const std::vector<double> env = rms_envelope_sliding(x, fs, cfg.rms_window_s);
  std::vector<double> sorted = env;
  std::sort(sorted.begin(), sorted.end());
  const double threshold = cfg.threshold_frac * quantile_sorted(sorted, cfg.threshold_pctl);
  if (!(threshold > 0.0)) return make_detections(rec.id, "rms", {});

  // thresholded maxima that also rise clear of their local surroundings
  const std::size_t prom_w = static_cast<std::size_t>(std::llround(cfg.prominence_window_s * fs));
  std::vector<Peak> peaks;
  for (const Peak& p : local_maxima(env, 0, env.size())) {
    if (p.value < threshold) continue;
    double left_min = p.value, right_min = p.value;
    const std::size_t lo = p.idx > prom_w ? p.idx - prom_w : 0;
    for (std::size_t i = lo; i < p.idx; ++i) left_min = std::min(left_min, env[i]);
    const std::size_t hi = std::min(env.size(), p.idx + prom_w + 1);
    for (std::size_t i = p.idx + 1; i < hi; ++i) right_min = std::min(right_min, env[i]);
    const double prominence = p.value - std::max(left_min, right_min);
    if (prominence >= cfg.prominence_frac * threshold) peaks.push_back(p);
  }

  // merge close peaks, larger amplitude wins
  const double merge_gap = cfg.merge_gap_s * fs;
  std::vector<Peak> merged;
  for (const Peak& p : peaks) {
    if (!merged.empty() && static_cast<double>(p.idx - merged.back().idx) < merge_gap) {
      if (p.value > merged.back().value) merged.back() = p;
    } else {
      merged.push_back(p);
    }
  }

  // plausible-rate rule + interval regularity
  const double min_iv = 60.0 / cfg.hr_hi_bpm;
  const double max_iv = 60.0 / cfg.hr_lo_bpm;
  std::vector<Peak> accepted;
  std::vector<double> interval_hist;
  for (const Peak& p : merged) {
    if (accepted.empty()) {
      accepted.push_back(p);
      continue;
    }
    const double iv = static_cast<double>(p.idx - accepted.back().idx) / fs;
    if (iv < min_iv) {
      // faster than plausible: keep the stronger of the two
      if (p.value > accepted.back().value) accepted.back() = p;
      continue;
    }
    if (iv > max_iv) {
      // slower than plausible: restart the rhythm chain
      accepted.push_back(p);
      interval_hist.clear();
      continue;
    }
    if (interval_hist.size() >= 3) {
      const double med = median(interval_hist);
      if (std::abs(iv - med) > cfg.regularity_frac * med) continue;
    }
    interval_hist.push_back(iv);
    if (interval_hist.size() > cfg.regularity_history)
      interval_hist.erase(interval_hist.begin());
    accepted.push_back(p);
  }

  std::vector<Event> detections;
  for (const Peak& p : accepted)
    detections.push_back(Event{static_cast<double>(p.idx) / fs, SoundKind::S1});
  return make_detections(rec.id, "rms", std::move(detections));
}

std::vector<Event> assign_kinds_by_gap(const std::vector<double>& times) {
  std::vector<Event> events;
  if (times.size() < 2) {
    for (double t : times) events.push_back(Event{t, SoundKind::S1});
    return events;
  }
  double even_gap = 0.0, odd_gap = 0.0;
  std::size_t even_n = 0, odd_n = 0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double g = times[i + 1] - times[i];
    if (i % 2 == 0) {
      even_gap += g;
      ++even_n;
    } else {
      odd_gap += g;
      ++odd_n;
    }
  }
  if (even_n > 0) even_gap /= static_cast<double>(even_n);
  if (odd_n > 0) odd_gap /= static_cast<double>(odd_n);
  // systole is the shorter interval, so the S1 phase starts the shorter gap
  const bool even_is_s1 = odd_n == 0 || even_gap <= odd_gap;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const bool s1 = (i % 2 == 0) == even_is_s1;
    events.push_back(Event{times[i], s1 ? SoundKind::S1 : SoundKind::S2});
  }
  return events;
}

namespace {

struct Region {
  std::size_t lo, hi; // [lo, hi)
};

std::vector<Region> positive_regions(const std::vector<double>& x, std::size_t min_len) {
  std::vector<Region> regions;
  std::size_t start = 0;
  bool inside = false;
  for (std::size_t i = 0; i <= x.size(); ++i) {
    const bool pos = i < x.size() && x[i] > 0.0;
    if (pos && !inside) {
      inside = true;
      start = i;
    } else if (!pos && inside) {
      inside = false;
      if (i - start >= min_len) regions.push_back(Region{start, i});
    }
  }
  return regions;
}

double region_centroid(const std::vector<double>& weight, const Region& r) {
  double wsum = 0.0, acc = 0.0;
  for (std::size_t i = r.lo; i < r.hi; ++i) {
    wsum += weight[i];
    acc += weight[i] * static_cast<double>(i);
  }
  if (wsum <= 0.0) return 0.5 * static_cast<double>(r.lo + r.hi - 1);
  return acc / wsum;
}

} // namespace

EventList detect_heuristic_intensity(const Record& rec, const HeuristicConfig& cfg) {
  validate_record(rec);
  const double fs = rec.fs;
  const std::size_t n = rec.samples.size();

  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(rec.samples[i]);

  const auto long_w = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.long_window_s * fs)));
  const auto short_w = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.short_window_s * fs)));
  const std::vector<double> i_long = moving_average(mag, long_w);
  const std::vector<double> i_short = moving_average(mag, short_w);

  // cycle-scale gate: intensity above the record mean marks cardiac activity
  const double global_mean = mean(mag);
  // sound-scale contrast within the gate
  std::vector<double> contrast(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i_long[i] > 0.5 * global_mean) contrast[i] = std::max(0.0, i_short[i] - i_long[i]);
  }

  const std::size_t min_len = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.min_region_s * fs)));
  std::vector<double> times;
  for (const Region& r : positive_regions(contrast, min_len))
    times.push_back(region_centroid(contrast, r) / fs);

  return make_detections(rec.id, "heuristic", assign_kinds_by_gap(times));
}

double katz_fd(const std::vector<double>& window) {
  const std::size_t n = window.size();
  if (n < 3) fail(ErrorCode::invalid_argument, "KFD window needs at least 3 samples");
  bool constant = true;
  for (std::size_t i = 1; i < n; ++i) {
    if (window[i] != window[0]) {
      constant = false;
      break;
    }
  }
  if (constant) return 1.0;

  double length = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double dy = window[i] - window[i - 1];
    length += std::sqrt(1.0 + dy * dy); // unit abscissa spacing
  }
  double d = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double dy = window[i] - window[0];
    d = std::max(d, std::sqrt(static_cast<double>(i) * static_cast<double>(i) + dy * dy));
  }
  const double a = length / static_cast<double>(n - 1);
  const double denom = std::log10(d / a);
  if (std::abs(denom) < 1e-300) return 1.0;
  return std::log10(length / a) / denom;
}

PeelResult kfd_peel(const std::vector<double>& fd, double epsilon, int max_iter) {
  if (fd.size() < 3) fail(ErrorCode::invalid_argument, "peeling needs at least 3 values");
  // Each pass soft-thresholds at mean+SD (sub-threshold values become one)
  // and recurses on the intermediary (thresholded - signal) + mean, peeling
  // one layer of peaks per pass until the intermediary energy settles. The
  // returned soft signal keeps the original values at every index that was
  // peeled in some pass and is one elsewhere.
  PeelResult out;
  std::vector<double> current = fd;
  std::vector<bool> peeled(fd.size(), false);
  double prev_energy = -1.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double mu = mean(current);
    const double thr = mu + stddev_pop(current);
    std::vector<double> intermediary(current.size());
    for (std::size_t i = 0; i < current.size(); ++i) {
      const bool above = current[i] >= thr;
      if (above) peeled[i] = true;
      const double soft_v = above ? current[i] : 1.0;
      intermediary[i] = (soft_v - current[i]) + mu;
    }
    const double e = mean_power(intermediary);
    if (prev_energy >= 0.0) {
      out.energy_diffs.push_back(std::abs(e - prev_energy));
      if (out.energy_diffs.back() <= epsilon * std::max(prev_energy, 1e-30)) {
        out.converged = true;
        break;
      }
    }
    prev_energy = e;
    current = std::move(intermediary);
  }
  out.soft.assign(fd.size(), 1.0);
  for (std::size_t i = 0; i < fd.size(); ++i)
    if (peeled[i]) out.soft[i] = fd[i];
  return out;
}

EventList detect_kfd_peakpeel(const Record& rec, const KfdConfig& cfg) {
  validate_record(rec);
  const double fs = rec.fs;
  const WaveletBank& wb = wavelet_bank("db4");

  const int levels = std::min(cfg.max_level, max_dwt_levels(rec.samples.size(), wb));
  if (levels < 1) fail(ErrorCode::invalid_argument, "record too short for wavelet decomposition");
  const DwtDecomposition dec = dwt_cascade(rec.samples, wb, levels);

  // explained-energy contributions per detail level
  std::vector<double> energy(static_cast<std::size_t>(levels), 0.0);
  double total = 0.0;
  for (int l = 1; l <= levels; ++l) {
    const auto& d = dec.details[static_cast<std::size_t>(l) - 1];
    const double e = mean_power(d);
    energy[static_cast<std::size_t>(l) - 1] = e;
    total += e;
  }
  if (total <= 0.0) return make_detections(rec.id, "kfd", {});
  const double max_contrib = *std::max_element(energy.begin(), energy.end()) / total;

  std::vector<double> combined(rec.samples.size(), 0.0);
  for (int l = 1; l <= levels; ++l) {
    if (energy[static_cast<std::size_t>(l) - 1] / total >= cfg.select_p * max_contrib) {
      const std::vector<double> comp = wavelet_detail_component(dec, wb, l);
      for (std::size_t i = 0; i < combined.size(); ++i) combined[i] += comp[i];
    }
  }
  // the fractal dimension compares waveform excursions against unit sample
  // spacing, so bring the detail signal to unit scale first
  const double comb_sd = stddev_pop(combined);
  if (comb_sd > 0.0)
    for (double& v : combined) v /= comb_sd;

  // sliding fractal dimension
  const std::size_t wlen = std::max<std::size_t>(3, static_cast<std::size_t>(std::llround(cfg.window_s * fs)));
  const std::size_t hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.hop_s * fs)));
  if (combined.size() < wlen) fail(ErrorCode::invalid_argument, "record shorter than the KFD window");
  std::vector<double> fd;
  std::vector<double> fd_time;
  for (std::size_t start = 0; start + wlen <= combined.size(); start += hop) {
    std::vector<double> win(combined.begin() + static_cast<std::ptrdiff_t>(start),
                            combined.begin() + static_cast<std::ptrdiff_t>(start + wlen));
    fd.push_back(katz_fd(win));
    fd_time.push_back((static_cast<double>(start) + static_cast<double>(wlen) / 2.0) / fs);
  }
  if (fd.size() < 3) return make_detections(rec.id, "kfd", {});

  const PeelResult peel = kfd_peel(fd, cfg.epsilon, cfg.max_iter);
  if (!peel.converged) warn("KFD peak peeling hit the iteration cap, using the last iterate");
  const std::vector<double>& soft = peel.soft;

  // hard threshold at the mean of the peeled signal gives the mask
  const double hard = mean(soft);
  std::vector<double> mask(soft.size());
  for (std::size_t i = 0; i < soft.size(); ++i) mask[i] = soft[i] > hard ? 1.0 : 0.0;

  const std::size_t min_len = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg.min_region_s / cfg.hop_s)));
  std::vector<double> times;
  for (const Region& r : positive_regions(mask, min_len)) {
    const double centre_idx = 0.5 * static_cast<double>(r.lo + r.hi - 1);
    const std::size_t i0 = static_cast<std::size_t>(centre_idx);
    const double frac = centre_idx - static_cast<double>(i0);
    const double t = i0 + 1 < fd_time.size() ? fd_time[i0] + frac * (fd_time[i0 + 1] - fd_time[i0])
                                             : fd_time[i0];
    times.push_back(t);
  }
  return make_detections(rec.id, "kfd", assign_kinds_by_gap(times));
}

} // namespace fpcg
