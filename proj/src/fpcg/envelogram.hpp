#ifndef FPCG_ENVELOGRAM_HPP
#define FPCG_ENVELOGRAM_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "types.hpp"

namespace fpcg {

struct EnvelogramConfig {
  double feature_rate = 50.0;
  double homomorphic_lpf_hz = 8.0;
  double psd_band_lo_hz = 40.0;
  double psd_band_hi_hz = 60.0;
  double psd_frame_s = 0.2;
  int dwt_level = 0;             // 0 = pick level nearest dwt_target_hz
  double dwt_target_hz = 40.0;
};

// Four z-normalised feature channels at a common rate, the observation
// sequence for the segmentation models.
struct Envelogram {
  static constexpr std::size_t kChannels = 4;
  static constexpr const char* kNames[kChannels] = {"homomorphic", "hilbert", "psd_energy", "dwt_detail"};

  double feature_rate = 50.0;
  std::array<std::vector<double>, kChannels> channels;
  std::array<double, kChannels> raw_mean{};
  std::array<double, kChannels> raw_sd{};

  std::size_t frames() const { return channels[0].size(); }
  // feature vector of frame t
  std::array<double, kChannels> frame(std::size_t t) const {
    return {channels[0][t], channels[1][t], channels[2][t], channels[3][t]};
  }
};

// The record is expected to be already filtered/despiked per the method
// configuration; this only extracts and normalises the channels.
Envelogram compute_envelogram(const Record& rec, const EnvelogramConfig& cfg);

} // namespace fpcg

#endif
