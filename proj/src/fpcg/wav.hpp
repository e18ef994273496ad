#ifndef FPCG_WAV_HPP
#define FPCG_WAV_HPP

#include <string>

#include "types.hpp"

namespace fpcg {

// PCM WAV reader: 8-bit unsigned, 16-bit signed, or 32-bit IEEE float.
// First channel of multi-channel files is kept. Integer samples are
// normalised by full scale (uint8: (v-128)/128, int16: v/32768).
Record load_wav(const std::string& path);

// bits_per_sample: 8, 16 (default) or 32 (float). Values are clamped to
// [-1, 1] before integer quantisation.
void save_wav(const Record& rec, const std::string& path, int bits_per_sample = 16);

} // namespace fpcg

#endif
