#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "fhr.hpp"
#include "filter.hpp"
#include "mathutil.hpp"
#include "rng.hpp"

namespace fpcg {

namespace {

// independent random streams so that toggling noise does not change the beats
enum Stream : std::uint64_t { kBeats = 1, kMaternal = 2, kShaped = 3, kWhite = 4, kBursts = 5 };

void require(bool cond, const std::string& field, const std::string& what) {
  if (!cond) fail(ErrorCode::invalid_argument, "sim config field '" + field + "': " + what);
}

} // namespace

void validate_sim_config(const SimConfig& cfg) {
  require(cfg.duration_s > 0.0, "duration_s", "must be positive");
  if (!cfg.allow_extreme_fhr)
    require(cfg.base_fhr >= 80.0 && cfg.base_fhr <= 210.0, "base_fhr",
            "must be in [80, 210] unless allow_extreme_fhr is set");
  else
    require(cfg.base_fhr > 0.0 && cfg.base_fhr < 390.0, "base_fhr", "out of range");
  require(cfg.fhr_variability >= 0.0, "fhr_variability", "must be non-negative");
  require(cfg.systole_fraction > 0.2 && cfg.systole_fraction < 0.5, "systole_fraction",
          "must be in (0.2, 0.5)");
  require(cfg.fs > 0.0, "fs", "must be positive");
  require(cfg.s1_freq_hz > 0.0 && cfg.s1_freq_hz < cfg.fs / 2.0, "s1_freq_hz", "must be below fs/2");
  require(cfg.s2_freq_hz > 0.0 && cfg.s2_freq_hz < cfg.fs / 2.0, "s2_freq_hz", "must be below fs/2");
  require(cfg.s2_freq_hz > cfg.s1_freq_hz, "s2_freq_hz", "second sound must be higher-pitched than the first");
  require(cfg.s1_width_s > 0.0, "s1_width_s", "must be positive");
  require(cfg.s2_width_s > 0.0, "s2_width_s", "must be positive");
  require(cfg.s2_rel_amp >= 0.0, "s2_rel_amp", "must be non-negative");
  for (const auto& a : cfg.accel_decel) {
    require(a.start_s >= 0.0 && a.start_s < cfg.duration_s, "accel_decel.start_s", "outside record");
    require(a.duration_s > 0.0, "accel_decel.duration_s", "must be positive");
  }
  require(cfg.noise.maternal_hs.rel_amp >= 0.0, "noise.maternal_hs.rel_amp", "must be non-negative");
  require(cfg.noise.low_freq_internal.rel_amp >= 0.0, "noise.low_freq_internal.rel_amp",
          "must be non-negative");
  require(cfg.noise.high_freq_env.rel_amp >= 0.0, "noise.high_freq_env.rel_amp", "must be non-negative");
  require(cfg.noise.white.rel_amp >= 0.0, "noise.white.rel_amp", "must be non-negative");
  require(cfg.noise.impulse_bursts.rate_per_min >= 0.0, "noise.impulse_bursts.rate_per_min",
          "must be non-negative");
  require(cfg.noise.impulse_bursts.duration_s > 0.0, "noise.impulse_bursts.duration_s",
          "must be positive");
}

namespace {

using nlohmann::json;

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

SimConfig sim_config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    fail(ErrorCode::format, std::string("sim config: invalid JSON: ") + e.what());
  }
  SimConfig cfg;
  get_if_present(j, "id", cfg.id);
  get_if_present(j, "duration_s", cfg.duration_s);
  get_if_present(j, "base_fhr", cfg.base_fhr);
  get_if_present(j, "fhr_variability", cfg.fhr_variability);
  get_if_present(j, "systole_fraction", cfg.systole_fraction);
  get_if_present(j, "s1_freq_hz", cfg.s1_freq_hz);
  get_if_present(j, "s2_freq_hz", cfg.s2_freq_hz);
  get_if_present(j, "s1_width_s", cfg.s1_width_s);
  get_if_present(j, "s2_width_s", cfg.s2_width_s);
  get_if_present(j, "s2_rel_amp", cfg.s2_rel_amp);
  get_if_present(j, "s2_enabled", cfg.s2_enabled);
  get_if_present(j, "fs", cfg.fs);
  get_if_present(j, "allow_extreme_fhr", cfg.allow_extreme_fhr);
  get_if_present(j, "rng_seed", cfg.rng_seed);
  if (j.contains("accel_decel")) {
    for (const auto& item : j.at("accel_decel")) {
      AccelDecel a;
      a.start_s = item.at("start_s").get<double>();
      a.duration_s = item.at("duration_s").get<double>();
      a.delta_bpm = item.at("delta_bpm").get<double>();
      cfg.accel_decel.push_back(a);
    }
  }
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    if (n.contains("maternal_hs")) {
      const json& m = n.at("maternal_hs");
      get_if_present(m, "enabled", cfg.noise.maternal_hs.enabled);
      get_if_present(m, "hr_bpm", cfg.noise.maternal_hs.hr_bpm);
      get_if_present(m, "rel_amp", cfg.noise.maternal_hs.rel_amp);
      get_if_present(m, "freq_hz", cfg.noise.maternal_hs.freq_hz);
      get_if_present(m, "width_s", cfg.noise.maternal_hs.width_s);
    }
    if (n.contains("low_freq_internal")) {
      const json& m = n.at("low_freq_internal");
      get_if_present(m, "enabled", cfg.noise.low_freq_internal.enabled);
      get_if_present(m, "cutoff_hz", cfg.noise.low_freq_internal.cutoff_hz);
      get_if_present(m, "rel_amp", cfg.noise.low_freq_internal.rel_amp);
    }
    if (n.contains("high_freq_env")) {
      const json& m = n.at("high_freq_env");
      get_if_present(m, "enabled", cfg.noise.high_freq_env.enabled);
      get_if_present(m, "cutoff_hz", cfg.noise.high_freq_env.cutoff_hz);
      get_if_present(m, "rel_amp", cfg.noise.high_freq_env.rel_amp);
    }
    if (n.contains("white")) {
      const json& m = n.at("white");
      get_if_present(m, "enabled", cfg.noise.white.enabled);
      get_if_present(m, "rel_amp", cfg.noise.white.rel_amp);
    }
    if (n.contains("impulse_bursts")) {
      const json& m = n.at("impulse_bursts");
      get_if_present(m, "enabled", cfg.noise.impulse_bursts.enabled);
      get_if_present(m, "rate_per_min", cfg.noise.impulse_bursts.rate_per_min);
      get_if_present(m, "duration_s", cfg.noise.impulse_bursts.duration_s);
    }
  }
  validate_sim_config(cfg);
  return cfg;
}

std::string sim_config_to_json(const SimConfig& cfg) {
  nlohmann::ordered_json j;
  j["id"] = cfg.id;
  j["duration_s"] = cfg.duration_s;
  j["base_fhr"] = cfg.base_fhr;
  j["fhr_variability"] = cfg.fhr_variability;
  j["accel_decel"] = nlohmann::ordered_json::array();
  for (const auto& a : cfg.accel_decel)
    j["accel_decel"].push_back({{"start_s", a.start_s}, {"duration_s", a.duration_s}, {"delta_bpm", a.delta_bpm}});
  j["systole_fraction"] = cfg.systole_fraction;
  j["s1_freq_hz"] = cfg.s1_freq_hz;
  j["s2_freq_hz"] = cfg.s2_freq_hz;
  j["s1_width_s"] = cfg.s1_width_s;
  j["s2_width_s"] = cfg.s2_width_s;
  j["s2_rel_amp"] = cfg.s2_rel_amp;
  j["s2_enabled"] = cfg.s2_enabled;
  j["fs"] = cfg.fs;
  j["allow_extreme_fhr"] = cfg.allow_extreme_fhr;
  j["rng_seed"] = cfg.rng_seed;
  nlohmann::ordered_json n;
  n["maternal_hs"] = {{"enabled", cfg.noise.maternal_hs.enabled},
                      {"hr_bpm", cfg.noise.maternal_hs.hr_bpm},
                      {"rel_amp", cfg.noise.maternal_hs.rel_amp},
                      {"freq_hz", cfg.noise.maternal_hs.freq_hz},
                      {"width_s", cfg.noise.maternal_hs.width_s}};
  n["low_freq_internal"] = {{"enabled", cfg.noise.low_freq_internal.enabled},
                            {"cutoff_hz", cfg.noise.low_freq_internal.cutoff_hz},
                            {"rel_amp", cfg.noise.low_freq_internal.rel_amp}};
  n["high_freq_env"] = {{"enabled", cfg.noise.high_freq_env.enabled},
                        {"cutoff_hz", cfg.noise.high_freq_env.cutoff_hz},
                        {"rel_amp", cfg.noise.high_freq_env.rel_amp}};
  n["white"] = {{"enabled", cfg.noise.white.enabled}, {"rel_amp", cfg.noise.white.rel_amp}};
  n["impulse_bursts"] = {{"enabled", cfg.noise.impulse_bursts.enabled},
                         {"rate_per_min", cfg.noise.impulse_bursts.rate_per_min},
                         {"duration_s", cfg.noise.impulse_bursts.duration_s}};
  j["noise"] = n;
  return j.dump(2);
}

std::vector<Beat> simulate_fhr_trace(const SimConfig& cfg) {
  validate_sim_config(cfg);
  Rng rng(derive_seed(cfg.rng_seed, kBeats));

  auto ramp_bpm = [&](double t) {
    double delta = 0.0;
    for (const auto& a : cfg.accel_decel) {
      if (t >= a.start_s && t < a.start_s + a.duration_s) delta += a.delta_bpm;
    }
    return delta;
  };

  const double walk_bound = 2.0 * cfg.fhr_variability;
  const double walk_step = cfg.fhr_variability * 0.15;
  double walk = 0.0;

  std::vector<Beat> beats;
  double t = 0.5 * 60.0 / cfg.base_fhr; // half a cycle in, avoids clipping the first pulse
  while (t < cfg.duration_s) {
    double bpm = cfg.base_fhr + walk + ramp_bpm(t);
    bpm = std::clamp(bpm, 30.0, 380.0);
    beats.push_back(Beat{t, bpm});
    t += 60.0 / bpm;
    if (cfg.fhr_variability > 0.0) {
      walk += rng.gauss() * walk_step;
      if (walk > walk_bound) walk = 2.0 * walk_bound - walk;   // reflect
      if (walk < -walk_bound) walk = -2.0 * walk_bound - walk;
    }
  }
  return beats;
}

std::vector<double> gen_heart_sound(double center_freq_hz, double width_s, double amp, double fs) {
  if (!(width_s > 0.0)) fail(ErrorCode::invalid_argument, "pulse width must be positive");
  if (!(center_freq_hz < fs / 2.0))
    fail(ErrorCode::invalid_argument, "pulse centre frequency must be below fs/2");
  const double sigma = width_s / 6.0;
  const long half = std::lround(3.0 * sigma * fs);
  std::vector<double> w(static_cast<std::size_t>(2 * half + 1));
  for (long j = -half; j <= half; ++j) {
    const double t = static_cast<double>(j) / fs;
    // cosine phase puts the extremum on the centre sample
    w[static_cast<std::size_t>(j + half)] =
        amp * std::exp(-t * t / (2.0 * sigma * sigma)) * std::cos(2.0 * std::numbers::pi * center_freq_hz * t);
  }
  return w;
}

namespace {

void add_pulse_at(std::vector<double>& signal, const std::vector<double>& pulse, long center_idx) {
  const long half = static_cast<long>(pulse.size() / 2);
  for (long j = 0; j < static_cast<long>(pulse.size()); ++j) {
    const long idx = center_idx - half + j;
    if (idx >= 0 && idx < static_cast<long>(signal.size()))
      signal[static_cast<std::size_t>(idx)] += pulse[static_cast<std::size_t>(j)];
  }
}

std::vector<double> gaussian_noise(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.gauss();
  return v;
}

// scale so the noise RMS is exactly rel_amp times ref_rms
void scale_to_rms(std::vector<double>& v, double rel_amp, double ref_rms) {
  const double r = rms(v);
  const double k = r > 0.0 ? rel_amp * ref_rms / r : 0.0;
  for (double& x : v) x *= k;
}

} // namespace

SimResult simulate_record(const SimConfig& cfg) {
  validate_sim_config(cfg);
  const std::size_t n = static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.fs));
  if (n == 0) fail(ErrorCode::invalid_argument, "record would be empty");

  SimResult res;
  res.beats = simulate_fhr_trace(cfg);

  // fetal pulses with ground-truth labels snapped to the sample grid
  std::vector<double> clean(n, 0.0);
  std::vector<Event> events;
  const std::vector<double> s1_pulse = gen_heart_sound(cfg.s1_freq_hz, cfg.s1_width_s, 1.0, cfg.fs);
  const std::vector<double> s2_pulse =
      gen_heart_sound(cfg.s2_freq_hz, cfg.s2_width_s, cfg.s2_rel_amp, cfg.fs);
  for (const Beat& b : res.beats) {
    const long s1_idx = std::lround(b.t_s * cfg.fs);
    if (s1_idx >= 0 && s1_idx < static_cast<long>(n)) {
      add_pulse_at(clean, s1_pulse, s1_idx);
      events.push_back(Event{static_cast<double>(s1_idx) / cfg.fs, SoundKind::S1});
      ++res.s1_count;
    }
    if (cfg.s2_enabled) {
      const double cycle = 60.0 / b.bpm;
      const long s2_idx = std::lround((b.t_s + cfg.systole_fraction * cycle) * cfg.fs);
      if (s2_idx >= 0 && s2_idx < static_cast<long>(n)) {
        add_pulse_at(clean, s2_pulse, s2_idx);
        events.push_back(Event{static_cast<double>(s2_idx) / cfg.fs, SoundKind::S2});
        ++res.s2_count;
      }
    }
  }
  const double clean_rms = rms(clean);

  // noise, accumulated separately so the reported SNR is exact
  std::vector<double> noise(n, 0.0);
  const NoiseConfig& nc = cfg.noise;
  if (nc.maternal_hs.enabled && nc.maternal_hs.rel_amp > 0.0) {
    Rng rng(derive_seed(cfg.rng_seed, kMaternal));
    const std::vector<double> mpulse =
        gen_heart_sound(nc.maternal_hs.freq_hz, nc.maternal_hs.width_s, nc.maternal_hs.rel_amp, cfg.fs);
    double t = rng.uniform(0.0, 60.0 / nc.maternal_hs.hr_bpm);
    while (t < cfg.duration_s) {
      add_pulse_at(noise, mpulse, std::lround(t * cfg.fs));
      const double hr = nc.maternal_hs.hr_bpm + rng.gauss() * 1.0;
      t += 60.0 / std::max(30.0, hr);
    }
  }
  {
    Rng rng(derive_seed(cfg.rng_seed, kShaped));
    if (nc.low_freq_internal.enabled && nc.low_freq_internal.rel_amp > 0.0) {
      std::vector<double> v = gaussian_noise(rng, n);
      double cutoff = nc.low_freq_internal.cutoff_hz;
      if (cutoff >= cfg.fs / 2.0) cutoff = 0.45 * cfg.fs;
      const FilterSpec lp = design_butterworth(FilterKind::lowpass, 4, {cutoff}, cfg.fs);
      v = filter_forward(lp, v);
      scale_to_rms(v, nc.low_freq_internal.rel_amp, clean_rms);
      for (std::size_t i = 0; i < n; ++i) noise[i] += v[i];
    }
    if (nc.high_freq_env.enabled && nc.high_freq_env.rel_amp > 0.0) {
      std::vector<double> v = gaussian_noise(rng, n);
      double cutoff = nc.high_freq_env.cutoff_hz;
      if (cutoff >= cfg.fs / 2.0) cutoff = 0.45 * cfg.fs;
      const FilterSpec hp = design_butterworth(FilterKind::highpass, 4, {cutoff}, cfg.fs);
      v = filter_forward(hp, v);
      scale_to_rms(v, nc.high_freq_env.rel_amp, clean_rms);
      for (std::size_t i = 0; i < n; ++i) noise[i] += v[i];
    }
  }
  if (nc.white.enabled && nc.white.rel_amp > 0.0) {
    Rng rng(derive_seed(cfg.rng_seed, kWhite));
    std::vector<double> v = gaussian_noise(rng, n);
    scale_to_rms(v, nc.white.rel_amp, clean_rms);
    for (std::size_t i = 0; i < n; ++i) noise[i] += v[i];
  }

  std::vector<double> total(n);
  for (std::size_t i = 0; i < n; ++i) total[i] = clean[i] + noise[i];

  if (nc.impulse_bursts.enabled && nc.impulse_bursts.rate_per_min > 0.0) {
    Rng rng(derive_seed(cfg.rng_seed, kBursts));
    const int count = rng.poisson(nc.impulse_bursts.rate_per_min * cfg.duration_s / 60.0);
    double peak = 0.0;
    for (double v : total) peak = std::max(peak, std::abs(v));
    const double level = peak > 0.0 ? 1.05 * peak : 1.0;
    for (int b = 0; b < count; ++b) {
      const double onset = rng.uniform(0.0, std::max(0.0, cfg.duration_s - nc.impulse_bursts.duration_s));
      const std::size_t lo = static_cast<std::size_t>(onset * cfg.fs);
      const std::size_t hi =
          std::min(n, lo + static_cast<std::size_t>(std::llround(nc.impulse_bursts.duration_s * cfg.fs)));
      for (std::size_t i = lo; i < hi; ++i) total[i] = rng.uniform() < 0.5 ? -level : level;
    }
  }

  // SNR from the exact clean/noise split, including burst overwrites
  double p_clean = 0.0, p_noise = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p_clean += clean[i] * clean[i];
    const double d = total[i] - clean[i];
    p_noise += d * d;
  }
  if (p_noise > 0.0 && p_clean > 0.0) res.snr_db = 10.0 * std::log10(p_clean / p_noise);

  // normalise to a fixed peak so WAV output cannot clip
  double peak = 0.0;
  for (double v : total) peak = std::max(peak, std::abs(v));
  res.scale = peak > 0.0 ? 0.9 / peak : 1.0;
  for (double& v : total) v *= res.scale;

  res.record = make_record(cfg.id, std::move(total), cfg.fs, Source::synthetic);
  res.annotations = make_annotations(cfg.id, std::move(events));
  res.truth_fhr = fhr_from_events(res.annotations.times_of(SoundKind::S1), cfg.duration_s,
                                  FhrFromLabelsConfig{});
  return res;
}

std::string sim_metadata_json(const SimConfig& cfg, const SimResult& result) {
  nlohmann::ordered_json j;
  j["id"] = cfg.id;
  j["fs"] = cfg.fs;
  j["duration_s"] = cfg.duration_s;
  j["beat_count"] = result.beats.size();
  j["s1_count"] = result.s1_count;
  j["s2_count"] = result.s2_count;
  j["scale"] = result.scale;
  if (result.snr_db)
    j["snr_db"] = *result.snr_db;
  else
    j["snr_db"] = nullptr;
  j["config"] = nlohmann::ordered_json::parse(sim_config_to_json(cfg));
  return j.dump(2);
}

} // namespace fpcg
