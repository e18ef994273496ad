#ifndef FPCG_SPIKE_HPP
#define FPCG_SPIKE_HPP

#include "types.hpp"

namespace fpcg {

// Iterative spike removal: while any window's maximum absolute amplitude
// exceeds 3x the median of the per-window maxima, zero the worst window's
// spike between its surrounding zero crossings.
Record remove_spikes(const Record& rec, double window_s = 0.5);

std::vector<double> remove_spikes_sequence(std::vector<double> x, double fs, double window_s);

} // namespace fpcg

#endif
