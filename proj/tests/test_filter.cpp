#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fpcg/filter.hpp"
#include "fpcg/mathutil.hpp"
#include "fpcg/rng.hpp"
#include "fpcg/spike.hpp"

using namespace fpcg;

namespace {

std::vector<double> sine(double freq, double fs, double duration) {
  const std::size_t n = static_cast<std::size_t>(duration * fs);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs);
  return x;
}

} // namespace

TEST_CASE("butterworth magnitude hits -3 dB at the cutoffs") {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  {
    const FilterSpec lp = design_butterworth(FilterKind::lowpass, 1, {8.0}, 1000.0);
    CHECK(magnitude_response(lp, 8.0) == doctest::Approx(inv_sqrt2).epsilon(0.01));
    CHECK(magnitude_response(lp, 0.01) == doctest::Approx(1.0).epsilon(0.01));
  }
  {
    const FilterSpec bp = design_butterworth(FilterKind::bandpass, 4, {15.0, 55.0}, 333.0);
    CHECK(magnitude_response(bp, 15.0) == doctest::Approx(inv_sqrt2).epsilon(0.01));
    CHECK(magnitude_response(bp, 55.0) == doctest::Approx(inv_sqrt2).epsilon(0.01));
    CHECK(magnitude_response(bp, 35.0) > 0.99);
    CHECK(magnitude_response(bp, 100.0) < 0.1);
  }
  {
    const FilterSpec bp = design_butterworth(FilterKind::bandpass, 4, {34.0, 54.0}, 333.0);
    CHECK(magnitude_response(bp, 34.0) == doctest::Approx(inv_sqrt2).epsilon(0.01));
    CHECK(magnitude_response(bp, 54.0) == doctest::Approx(inv_sqrt2).epsilon(0.01));
  }
  {
    const FilterSpec hp = design_butterworth(FilterKind::highpass, 4, {35.0}, 333.0);
    CHECK(magnitude_response(hp, 35.0) == doctest::Approx(inv_sqrt2).epsilon(0.01));
    CHECK(magnitude_response(hp, 1.0) < 1e-4);
  }
  {
    const FilterSpec bs = design_butterworth(FilterKind::bandstop, 2, {45.0, 55.0}, 1000.0);
    CHECK(magnitude_response(bs, 50.0) < 0.05);
    CHECK(magnitude_response(bs, 10.0) == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("all designs are stable") {
  for (int order : {1, 2, 3, 4, 7, 10}) {
    CHECK(design_butterworth(FilterKind::lowpass, order, {30.0}, 333.0).max_pole_magnitude() < 1.0);
    CHECK(design_butterworth(FilterKind::highpass, order, {30.0}, 333.0).max_pole_magnitude() < 1.0);
    CHECK(design_butterworth(FilterKind::bandpass, order, {15.0, 55.0}, 333.0).max_pole_magnitude() < 1.0);
    CHECK(design_butterworth(FilterKind::bandstop, order, {15.0, 55.0}, 333.0).max_pole_magnitude() < 1.0);
  }
}

TEST_CASE("design rejects cutoffs at or beyond Nyquist") {
  CHECK_THROWS_AS(design_butterworth(FilterKind::lowpass, 4, {200.0}, 333.0), Error);
  CHECK_THROWS_AS(design_butterworth(FilterKind::bandpass, 4, {25.0, 400.0}, 333.0), Error);
  CHECK_THROWS_AS(design_butterworth(FilterKind::lowpass, 0, {10.0}, 333.0), Error);
  CHECK_THROWS_AS(design_butterworth(FilterKind::lowpass, 11, {10.0}, 333.0), Error);
}

TEST_CASE("band clamp helper") {
  const auto [lo, hi] = clamp_band_to_nyquist(25.0, 400.0, 333.0);
  CHECK(lo == 25.0);
  CHECK(hi == doctest::Approx(0.45 * 333.0));
  const auto [lo2, hi2] = clamp_band_to_nyquist(25.0, 120.0, 333.0);
  CHECK(hi2 == 120.0);
  CHECK(lo2 == 25.0);
}

TEST_CASE("zero-phase highpass removes DC") {
  const FilterSpec hp = design_butterworth(FilterKind::highpass, 4, {20.0}, 333.0);
  const Record rec = make_record("dc", std::vector<double>(1000, 1.0), 333.0, Source::file);
  const Record out = apply_filter(hp, rec, true);
  double peak = 0.0;
  for (std::size_t i = 50; i + 50 < out.samples.size(); ++i) peak = std::max(peak, std::abs(out.samples[i]));
  CHECK(peak < 1e-3);
}

TEST_CASE("zero-phase filtering introduces no lag") {
  const double fs = 333.0;
  const FilterSpec bp = design_butterworth(FilterKind::bandpass, 4, {15.0, 55.0}, fs);
  const std::vector<double> x = sine(35.0, fs, 3.0);
  const std::vector<double> y = filter_zero_phase(bp, x);
  // argmax of the cross correlation over a +-20 sample lag range
  int best_lag = -100;
  double best = -1e300;
  for (int lag = -20; lag <= 20; ++lag) {
    double acc = 0.0;
    for (std::size_t i = 100; i + 100 < x.size(); ++i) {
      const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + lag;
      acc += x[i] * y[static_cast<std::size_t>(j)];
    }
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  CHECK(best_lag == 0);
}

TEST_CASE("forward filtering matches the b/a polynomial recursion") {
  // the expanded coefficients and the cascaded sections describe the same
  // transfer function
  const FilterSpec bp = design_butterworth(FilterKind::bandpass, 3, {20.0, 60.0}, 333.0);
  Rng rng(11);
  std::vector<double> x(400);
  for (double& v : x) v = rng.gauss();
  const std::vector<double> via_sos = filter_forward(bp, x);
  std::vector<double> via_ba(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < bp.b.size(); ++k)
      if (i >= k) acc += bp.b[k] * x[i - k];
    for (std::size_t k = 1; k < bp.a.size(); ++k)
      if (i >= k) acc -= bp.a[k] * via_ba[i - k];
    via_ba[i] = acc;
  }
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(via_sos[i] == doctest::Approx(via_ba[i]).epsilon(1e-6).scale(1.0));
}

TEST_CASE("spike removal leaves clean signals alone") {
  const double fs = 333.0;
  const std::vector<double> x = sine(30.0, fs, 3.0);
  const Record rec = make_record("clean", x, fs, Source::file);
  const Record out = remove_spikes(rec, 0.5);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(out.samples[i] == x[i]);
}

TEST_CASE("spike removal zeroes a large spike and little else") {
  const double fs = 333.0;
  std::vector<double> x = sine(30.0, fs, 3.0);
  const std::size_t spike_at = 500;
  x[spike_at] = 10.0;
  const Record out = remove_spikes(make_record("spiky", x, fs, Source::file), 0.5);
  CHECK(out.samples[spike_at] == 0.0);
  std::size_t unchanged = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (out.samples[i] == x[i]) ++unchanged;
  CHECK(static_cast<double>(unchanged) / static_cast<double>(x.size()) > 0.95);
}

TEST_CASE("spike removal on all-zero input") {
  const Record rec = make_record("zero", std::vector<double>(1000, 0.0), 333.0, Source::file);
  const Record out = remove_spikes(rec, 0.5);
  for (double v : out.samples) CHECK(v == 0.0);
}

TEST_CASE("spike removal needs three windows") {
  const Record rec = make_record("short", std::vector<double>(100, 0.1), 333.0, Source::file);
  CHECK_THROWS_AS(remove_spikes(rec, 0.5), Error);
}
