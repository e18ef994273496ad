#ifndef FPCG_SYNTH_HPP
#define FPCG_SYNTH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "types.hpp"

namespace fpcg {

struct AccelDecel {
  double start_s = 0.0;
  double duration_s = 0.0;
  double delta_bpm = 0.0; // positive = acceleration, negative = deceleration
};

struct MaternalNoise {
  bool enabled = false;
  double hr_bpm = 72.0;
  double rel_amp = 1.2; // pulse peak relative to the fetal S1 peak
  double freq_hz = 15.0;
  double width_s = 0.10;
};

struct ShapedNoise {
  bool enabled = false;
  double cutoff_hz = 10.0;
  double rel_amp = 0.0; // RMS relative to the clean fetal signal RMS
};

struct WhiteNoise {
  bool enabled = false;
  double rel_amp = 0.0; // RMS relative to the clean fetal signal RMS
};

struct ImpulseBursts {
  bool enabled = false;
  double rate_per_min = 1.0;
  double duration_s = 0.2;
};

struct NoiseConfig {
  MaternalNoise maternal_hs;
  ShapedNoise low_freq_internal;  // low-pass shaped
  ShapedNoise high_freq_env;     // high-pass shaped
  WhiteNoise white;
  ImpulseBursts impulse_bursts;
};

struct SimConfig {
  std::string id = "synthetic";
  double duration_s = 60.0;
  double base_fhr = 140.0;
  double fhr_variability = 0.0; // SD bound of the slow per-beat random walk, bpm
  std::vector<AccelDecel> accel_decel;
  double systole_fraction = 0.35; // k, S1->S2 delay as a fraction of the cycle
  double s1_freq_hz = 30.0;
  double s2_freq_hz = 45.0;
  double s1_width_s = 0.060;
  double s2_width_s = 0.050;
  double s2_rel_amp = 0.7;
  bool s2_enabled = true;
  double fs = 333.0;
  bool allow_extreme_fhr = false; // bradycardia/tachycardia scenarios
  NoiseConfig noise;
  std::uint64_t rng_seed = 1;
};

void validate_sim_config(const SimConfig& cfg);
SimConfig sim_config_from_json(const std::string& json_text);
std::string sim_config_to_json(const SimConfig& cfg);

struct Beat {
  double t_s = 0.0;
  double bpm = 0.0;
};

// Per-beat heart-rate trace: base rate + bounded random walk + accel/decel
// plateaus. Deterministic for a fixed seed; the beat-to-beat interval after
// beat i is 60/bpm_i.
std::vector<Beat> simulate_fhr_trace(const SimConfig& cfg);

// Gaussian-modulated sinusoidal pulse, sigma = width/6, support +-3 sigma,
// peaking exactly at the centre sample.
std::vector<double> gen_heart_sound(double center_freq_hz, double width_s, double amp, double fs);

struct SimResult {
  Record record;
  EventList annotations;
  FhrSeries truth_fhr;
  std::vector<Beat> beats;
  double scale = 1.0;                 // applied to reach the 0.9 peak target
  std::optional<double> snr_db;      // absent when no noise is enabled
  std::size_t s1_count = 0, s2_count = 0;
};

SimResult simulate_record(const SimConfig& cfg);

std::string sim_metadata_json(const SimConfig& cfg, const SimResult& result);

} // namespace fpcg

#endif
