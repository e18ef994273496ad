#include "resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fpcg {

namespace {

constexpr double kKaiserBeta = 8.0;
constexpr int kZeroCrossings = 24;

double bessel_i0(double x) {
  // series expansion, converges quickly for the argument range used here
  double sum = 1.0, term = 1.0;
  const double y = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= y / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

} // namespace

std::vector<double> resample_sequence(const std::vector<double>& x, double fs_in, double fs_out) {
  if (!(fs_in > 0.0) || !(fs_out > 0.0))
    fail(ErrorCode::invalid_argument, "sample rates must be positive");
  const std::size_t n_in = x.size();
  if (n_in == 0) return {};
  if (fs_in == fs_out) return x;

  const double cutoff = 0.45 * std::min(fs_in, fs_out);
  // kernel half width in input samples; stretches when downsampling
  const double half_width = kZeroCrossings * fs_in / (2.0 * cutoff);
  const double i0_beta = bessel_i0(kKaiserBeta);

  const std::size_t n_out = static_cast<std::size_t>(std::llround(n_in * fs_out / fs_in));
  std::vector<double> y(std::max<std::size_t>(n_out, 1), 0.0);

  for (std::size_t k = 0; k < y.size(); ++k) {
    const double t_in = static_cast<double>(k) * fs_in / fs_out; // in input samples
    const long lo = std::max(0L, static_cast<long>(std::ceil(t_in - half_width)));
    const long hi = std::min(static_cast<long>(n_in) - 1, static_cast<long>(std::floor(t_in + half_width)));
    double acc = 0.0, wsum = 0.0;
    for (long m = lo; m <= hi; ++m) {
      const double d = (static_cast<double>(m) - t_in) / half_width; // in [-1, 1]
      const double w = bessel_i0(kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - d * d))) / i0_beta;
      const double h = w * sinc(2.0 * cutoff / fs_in * (static_cast<double>(m) - t_in));
      acc += h * x[static_cast<std::size_t>(m)];
      wsum += h;
    }
    y[k] = wsum != 0.0 ? acc / wsum : 0.0;
  }
  return y;
}

Record resample(const Record& rec, double target_fs) {
  validate_record(rec);
  if (!(target_fs > 0.0)) fail(ErrorCode::invalid_argument, "target_fs must be positive");
  Record out;
  out.id = rec.id;
  out.fs = target_fs;
  out.source = rec.source;
  out.samples = resample_sequence(rec.samples, rec.fs, target_fs);
  return out;
}

} // namespace fpcg
