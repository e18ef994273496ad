#include "spike.hpp"

#include <algorithm>
#include <cmath>

#include "mathutil.hpp"

namespace fpcg {

std::vector<double> remove_spikes_sequence(std::vector<double> x, double fs, double window_s) {
  if (!(window_s > 0.0)) fail(ErrorCode::invalid_argument, "window_s must be positive");
  const std::size_t wlen = static_cast<std::size_t>(std::llround(window_s * fs));
  if (wlen < 2) fail(ErrorCode::invalid_argument, "spike window shorter than 2 samples");
  const std::size_t nwin = x.size() / wlen;
  if (nwin < 3) fail(ErrorCode::invalid_argument, "record too short for spike removal (need 3 windows)");

  auto window_maa = [&](std::size_t w, std::size_t& argmax) {
    double maa = 0.0;
    argmax = w * wlen;
    for (std::size_t i = w * wlen; i < (w + 1) * wlen; ++i) {
      const double v = std::abs(x[i]);
      if (v > maa) {
        maa = v;
        argmax = i;
      }
    }
    return maa;
  };

  const std::size_t max_iter = 10 * nwin;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    std::vector<double> maas(nwin);
    std::size_t worst_win = 0, worst_peak = 0;
    double worst = -1.0;
    for (std::size_t w = 0; w < nwin; ++w) {
      std::size_t peak;
      maas[w] = window_maa(w, peak);
      if (maas[w] > worst) {
        worst = maas[w];
        worst_win = w;
        worst_peak = peak;
      }
    }
    const double med = median(maas);
    if (!(worst > 3.0 * med) || worst == 0.0) break;

    // zero between the zero crossings around the spike peak, staying inside
    // the offending window
    const std::size_t lo_bound = worst_win * wlen;
    const std::size_t hi_bound = (worst_win + 1) * wlen - 1;
    std::size_t lo = worst_peak;
    while (lo > lo_bound && x[lo] * x[lo - 1] > 0.0) --lo;
    std::size_t hi = worst_peak;
    while (hi < hi_bound && x[hi] * x[hi + 1] > 0.0) ++hi;
    bool changed = false;
    for (std::size_t i = lo; i <= hi; ++i) {
      if (x[i] != 0.0) changed = true;
      x[i] = 0.0;
    }
    if (!changed) break;
  }
  return x;
}

Record remove_spikes(const Record& rec, double window_s) {
  validate_record(rec);
  Record out = rec;
  out.samples = remove_spikes_sequence(rec.samples, rec.fs, window_s);
  return out;
}

} // namespace fpcg
