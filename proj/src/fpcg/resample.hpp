#ifndef FPCG_RESAMPLE_HPP
#define FPCG_RESAMPLE_HPP

#include <vector>

#include "types.hpp"

namespace fpcg {

// Windowed-sinc rate conversion (Kaiser beta=8, cutoff 0.45*min(fs, target)).
// Per-output normalisation of the kernel weights keeps DC gain exactly 1,
// including at the edges.
Record resample(const Record& rec, double target_fs);

std::vector<double> resample_sequence(const std::vector<double>& x, double fs_in, double fs_out);

} // namespace fpcg

#endif
