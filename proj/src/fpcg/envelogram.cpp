#include "envelogram.hpp"

#include <algorithm>
#include <cmath>

#include "envelope.hpp"
#include "filter.hpp"
#include "mathutil.hpp"
#include "resample.hpp"
#include "wavelet.hpp"

namespace fpcg {

namespace {

std::vector<double> fit_length(std::vector<double> v, std::size_t n) {
  if (v.empty()) v.assign(n, 0.0);
  while (v.size() < n) v.push_back(v.back());
  v.resize(n);
  return v;
}

void znormalize(std::vector<double>& v, double& out_mean, double& out_sd) {
  out_mean = mean(v);
  out_sd = stddev_pop(v);
  if (out_sd > 0.0) {
    for (double& x : v) x = (x - out_mean) / out_sd;
  } else {
    for (double& x : v) x = 0.0;
  }
}

} // namespace

Envelogram compute_envelogram(const Record& rec, const EnvelogramConfig& cfg) {
  validate_record(rec);
  if (!(cfg.feature_rate > 0.0)) fail(ErrorCode::invalid_argument, "feature_rate must be positive");
  const std::size_t n_out = static_cast<std::size_t>(
      std::ceil(static_cast<double>(rec.samples.size()) * cfg.feature_rate / rec.fs - 1e-9));

  Envelogram env;
  env.feature_rate = cfg.feature_rate;

  const std::vector<double> hom = homomorphic_envelope(rec.samples, rec.fs, cfg.homomorphic_lpf_hz);
  env.channels[0] = fit_length(resample_sequence(hom, rec.fs, cfg.feature_rate), n_out);

  const std::vector<double> hil = hilbert_envelope(rec.samples);
  env.channels[1] = fit_length(resample_sequence(hil, rec.fs, cfg.feature_rate), n_out);

  const auto [band_lo, band_hi] = clamp_band_to_nyquist(cfg.psd_band_lo_hz, cfg.psd_band_hi_hz, rec.fs);
  env.channels[2] = fit_length(
      psd_energy_envelope(rec.samples, rec.fs, band_lo, band_hi, cfg.psd_frame_s, 1.0 / cfg.feature_rate),
      n_out);

  int level = cfg.dwt_level;
  if (level <= 0) {
    const int max_level = max_dwt_levels(rec.samples.size(), wavelet_bank("rbio3.9"));
    level = select_detail_level(rec.fs, cfg.dwt_target_hz, max_level);
  }
  env.channels[3] = dwt_detail_envelope(rec.samples, rec.fs, level, cfg.feature_rate, n_out);

  for (std::size_t c = 0; c < Envelogram::kChannels; ++c)
    znormalize(env.channels[c], env.raw_mean[c], env.raw_sd[c]);
  return env;
}

} // namespace fpcg
