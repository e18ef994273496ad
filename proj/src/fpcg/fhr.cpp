#include "fhr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "envelope.hpp"
#include "fft.hpp"
#include "filter.hpp"
#include "mathutil.hpp"
#include "synth.hpp"

namespace fpcg {

FhrSeries fhr_from_events(const std::vector<double>& s1_times_s, double duration_s,
                          const FhrFromLabelsConfig& cfg) {
  std::vector<double> times = s1_times_s;
  std::sort(times.begin(), times.end());

  FhrSeries series;
  series.window_s = cfg.window_s;
  series.overlap = cfg.overlap;
  series.center_s = fhr_window_centers(duration_s, cfg.window_s, cfg.overlap);
  series.bpm.assign(series.center_s.size(), std::nan(""));

  const double min_iv = 60.0 / cfg.hr_hi_bpm;
  const double max_iv = 60.0 / cfg.hr_lo_bpm;
  for (std::size_t w = 0; w < series.center_s.size(); ++w) {
    const double lo = series.center_s[w] - cfg.window_s / 2.0;
    const double hi = series.center_s[w] + cfg.window_s / 2.0;
    std::vector<double> intervals;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
      if (times[i] >= lo && times[i + 1] <= hi) {
        const double d = times[i + 1] - times[i];
        if (d >= min_iv && d <= max_iv) intervals.push_back(d);
      }
    }
    if (intervals.size() >= 2) series.bpm[w] = 60.0 / median(intervals);
  }
  validate_fhr_series(series);
  return series;
}

namespace {

// parabolic refinement of a discrete peak position
double refine_peak(const std::vector<double>& v, std::size_t k) {
  if (k == 0 || k + 1 >= v.size()) return static_cast<double>(k);
  const double y0 = v[k - 1], y1 = v[k], y2 = v[k + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  if (std::abs(denom) < 1e-30) return static_cast<double>(k);
  const double delta = 0.5 * (y0 - y2) / denom;
  return static_cast<double>(k) + std::clamp(delta, -0.5, 0.5);
}

} // namespace

FhrSeries fhr_tang_cyclic(const Record& rec, const TangConfig& cfg) {
  validate_record(rec);
  const double fs = rec.fs;
  const std::size_t win_len = static_cast<std::size_t>(std::llround(cfg.window_s * fs));
  const double min_cycle = 60.0 / cfg.hr_lo_bpm;
  if (static_cast<double>(win_len) / fs < 2.0 * min_cycle)
    fail(ErrorCode::invalid_argument, "analysis window shorter than two expected cycles");

  const auto [spec_lo, spec_hi] = clamp_band_to_nyquist(cfg.spectral_lo_hz, cfg.spectral_hi_hz, fs);
  const FilterSpec support = design_butterworth(FilterKind::bandpass, 4, {spec_lo, spec_hi}, fs);
  const std::vector<double> banded = filter_zero_phase(support, rec.samples);

  FhrSeries series;
  series.window_s = cfg.window_s;
  series.overlap = cfg.overlap;
  series.center_s = fhr_window_centers(rec.duration_s(), cfg.window_s, cfg.overlap);
  series.bpm.assign(series.center_s.size(), std::nan(""));

  // zero padding for the cyclic-frequency grid
  std::size_t nfft = next_pow2(static_cast<std::size_t>(std::ceil(fs * 60.0 / cfg.grid_bpm)));
  const double alpha_lo = cfg.hr_lo_bpm / 60.0;
  const double alpha_hi = cfg.hr_hi_bpm / 60.0;

  for (std::size_t w = 0; w < series.center_s.size(); ++w) {
    const std::size_t lo = static_cast<std::size_t>(std::llround((series.center_s[w] - cfg.window_s / 2.0) * fs));
    const std::size_t hi = std::min(banded.size(), lo + win_len);
    if (hi <= lo + 2) continue;
    std::vector<double> x(banded.begin() + static_cast<std::ptrdiff_t>(lo),
                          banded.begin() + static_cast<std::ptrdiff_t>(hi));
    const double m = mean(x);
    for (double& v : x) v -= m;

    const std::size_t max_lag = std::min(x.size() - 1, static_cast<std::size_t>(std::llround(fs * cfg.window_s / 2.0)));
    std::vector<double> r = autocorrelation(x, max_lag);
    if (r[0] <= 0.0) continue; // silent window

    // squared positive lag profile -> cyclic frequency spectrum; correlation
    // teeth are positive, so the negative half carries only noise; lags below
    // the shortest plausible cycle (zero-lag spike, slow rumble) are dropped
    const std::size_t lag_floor = static_cast<std::size_t>(std::llround(0.9 * fs * 60.0 / cfg.hr_hi_bpm));
    std::vector<double> s(r.size(), 0.0);
    for (std::size_t i = lag_floor; i < r.size(); ++i) {
      const double pos = std::max(r[i], 0.0);
      s[i] = pos * pos;
    }
    const double sm = mean(s);
    for (double& v : s) v -= sm;

    std::vector<cplx> spec(nfft, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < s.size(); ++i) spec[i] = cplx(s[i], 0.0);
    fft(spec, false);

    const std::size_t k_lo = static_cast<std::size_t>(std::ceil(alpha_lo * nfft / fs));
    const std::size_t k_hi = std::min(nfft / 2, static_cast<std::size_t>(std::floor(alpha_hi * nfft / fs)));
    if (k_hi <= k_lo) continue;
    std::vector<double> mag(k_hi + 1, 0.0);
    // harmonic reinforcement: a true rate also shows up at twice the cyclic
    // frequency, spurious peaks rarely do
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
      double v = std::abs(spec[k]);
      if (2 * k < nfft / 2) v += 0.5 * std::abs(spec[2 * k]);
      mag[k] = v;
    }
    std::size_t best = k_lo;
    for (std::size_t k = k_lo; k <= k_hi; ++k)
      if (mag[k] > mag[best]) best = k;
    if (mag[best] <= 0.0) continue;

    // prefer the fundamental when its subharmonic is nearly as strong
    const std::size_t half = best / 2;
    if (half >= k_lo && mag[half] >= 0.5 * mag[best]) best = half;

    const double k_ref = refine_peak(mag, best);
    const double bpm = k_ref * fs / static_cast<double>(nfft) * 60.0;
    if (bpm >= cfg.hr_lo_bpm && bpm <= cfg.hr_hi_bpm) series.bpm[w] = bpm;
  }
  validate_fhr_series(series);
  return series;
}

namespace {

// zero-phase matched-filter kernel from the magnitude spectrum of the
// expected pulse
std::vector<double> matched_kernel(double freq_hz, double width_s, double fs) {
  const std::vector<double> pulse = gen_heart_sound(freq_hz, width_s, 1.0, fs);
  const std::size_t nfft = next_pow2(pulse.size() * 4);
  std::vector<cplx> spec(nfft, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < pulse.size(); ++i) spec[i] = cplx(pulse[i], 0.0);
  fft(spec, false);
  for (auto& v : spec) v = cplx(std::abs(v), 0.0);
  fft(spec, true);
  // symmetric kernel around lag zero
  const std::size_t half = pulse.size();
  std::vector<double> kernel(2 * half + 1);
  for (std::size_t i = 0; i <= half; ++i) kernel[half + i] = spec[i].real();
  for (std::size_t i = 1; i <= half; ++i) kernel[half - i] = spec[nfft - i].real();
  double energy = 0.0;
  for (double v : kernel) energy += v * v;
  if (energy > 0.0)
    for (double& v : kernel) v /= std::sqrt(energy);
  return kernel;
}

std::vector<double> convolve_same(const std::vector<double>& x, const std::vector<double>& k) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(k.size());
  const std::ptrdiff_t half = m / 2;
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t j_hi = std::min(n - 1, i + m - 1 - half);
    for (std::ptrdiff_t j = j_lo; j <= j_hi; ++j) acc += x[j] * k[j - i + half];
    y[i] = acc;
  }
  return y;
}

} // namespace

ZahorianResult fhr_zahorian(const Record& rec, const ZahorianConfig& cfg) {
  validate_record(rec);
  const double fs = rec.fs;
  if (rec.duration_s() < cfg.frame_s)
    fail(ErrorCode::invalid_argument, "record shorter than one analysis frame");

  const auto [band_lo, band_hi] = clamp_band_to_nyquist(cfg.band_lo_hz, cfg.band_hi_hz, fs);
  const FilterSpec bp = design_butterworth(FilterKind::bandpass, cfg.band_order, {band_lo, band_hi}, fs);
  std::vector<double> filtered = filter_zero_phase(bp, rec.samples);
  filtered = convolve_same(filtered, matched_kernel(cfg.template_freq_hz, cfg.template_width_s, fs));
  const std::vector<double> energy = teager_energy(filtered);

  ZahorianResult out;
  out.series.window_s = cfg.grid_window_s;
  out.series.overlap = cfg.grid_overlap;
  out.series.center_s = fhr_window_centers(rec.duration_s(), cfg.grid_window_s, cfg.grid_overlap);
  out.series.bpm.assign(out.series.center_s.size(), std::nan(""));
  out.merit.assign(out.series.center_s.size(), 0.0);

  const std::size_t frame_len = static_cast<std::size_t>(std::llround(cfg.frame_s * fs));
  const std::size_t min_lag = static_cast<std::size_t>(std::llround(fs * 60.0 / cfg.hr_hi_bpm));
  const std::size_t max_lag = static_cast<std::size_t>(std::llround(fs * 60.0 / cfg.hr_lo_bpm));

  double merit = 1.0;
  double last_bpm = std::nan("");
  for (std::size_t w = 0; w < out.series.center_s.size(); ++w) {
    const double c = out.series.center_s[w];
    std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(std::llround((c - cfg.frame_s / 2.0) * fs));
    lo = std::clamp<std::ptrdiff_t>(lo, 0, static_cast<std::ptrdiff_t>(energy.size()));
    const std::size_t hi = std::min(energy.size(), static_cast<std::size_t>(lo) + frame_len);
    if (hi <= static_cast<std::size_t>(lo) + 2 * max_lag) {
      // not enough context, decay the merit and leave a gap
      merit *= cfg.merit_keep;
      out.merit[w] = merit;
      continue;
    }
    std::vector<double> frame(energy.begin() + lo, energy.begin() + static_cast<std::ptrdiff_t>(hi));
    const double m = mean(frame);
    for (double& v : frame) v -= m;
    std::vector<double> r = autocorrelation(frame, max_lag);
    const double r0 = r[0];

    double best_val = -1e300;
    std::size_t best_lag = 0;
    for (std::size_t lag = std::max<std::size_t>(1, min_lag); lag <= max_lag && lag + 1 < r.size(); ++lag) {
      if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] > best_val) {
        best_val = r[lag];
        best_lag = lag;
      }
    }
    bool valid = best_lag != 0 && r0 > 0.0 && best_val / r0 >= cfg.ac_threshold;
    double bpm = std::nan("");
    if (valid) {
      // harmonic guard: a half-lag peak nearly as strong means best_lag is a
      // period doubling
      const std::size_t half_lag = best_lag / 2;
      if (half_lag >= std::max<std::size_t>(1, min_lag) && half_lag > 0 && r[half_lag] >= 0.75 * best_val &&
          half_lag > 1 && r[half_lag] > r[half_lag - 1] && r[half_lag] >= r[half_lag + 1]) {
        best_lag = half_lag;
        best_val = r[half_lag];
      }
      const double lag_ref = refine_peak(r, best_lag);
      bpm = 60.0 * fs / lag_ref;
      if (bpm < cfg.hr_lo_bpm || bpm > cfg.hr_hi_bpm) valid = false;
    }

    if (valid) {
      const double dhr = std::isnan(last_bpm) ? 0.0 : std::abs(bpm - last_bpm);
      merit = cfg.merit_keep * merit +
              (1.0 - cfg.merit_keep) * (1.0 - std::min(1.0, dhr / cfg.merit_scale_bpm));
      last_bpm = bpm;
      if (merit >= cfg.merit_gap) out.series.bpm[w] = bpm;
    } else {
      merit *= cfg.merit_keep;
    }
    out.merit[w] = merit;
  }
  validate_fhr_series(out.series);
  return out;
}

} // namespace fpcg
