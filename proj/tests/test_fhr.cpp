#include <doctest.h>

#include <cmath>

#include "fpcg/eval.hpp"
#include "fpcg/fhr.hpp"
#include "fpcg/mathutil.hpp"
#include "fpcg/synth.hpp"

using namespace fpcg;

namespace {

std::vector<double> regular_times(double interval, double duration, double start = 0.2) {
  std::vector<double> t;
  for (double x = start; x < duration; x += interval) t.push_back(x);
  return t;
}

Record pulse_train(const std::vector<double>& times, double fs, double duration, double freq = 30.0) {
  std::vector<double> x(static_cast<std::size_t>(duration * fs), 0.0);
  const auto pulse = gen_heart_sound(freq, 0.06, 1.0, fs);
  for (double t : times) {
    const long c = std::lround(t * fs);
    const long half = static_cast<long>(pulse.size() / 2);
    for (long j = 0; j < static_cast<long>(pulse.size()); ++j) {
      const long idx = c - half + j;
      if (idx >= 0 && idx < static_cast<long>(x.size()))
        x[static_cast<std::size_t>(idx)] += pulse[static_cast<std::size_t>(j)];
    }
  }
  return make_record("train", x, fs, Source::synthetic);
}

} // namespace

TEST_CASE("label-based rate: constant spacing gives the exact rate") {
  const auto times = regular_times(60.0 / 140.0, 60.0);
  const FhrSeries s = fhr_from_events(times, 60.0);
  REQUIRE(s.size() == 11); // 10 s windows, 50% overlap over 60 s
  for (double v : s.bpm) CHECK(v == doctest::Approx(140.0).epsilon(1e-12));
}

TEST_CASE("label-based rate: implausible intervals are dropped") {
  auto times = regular_times(60.0 / 140.0, 60.0);
  times.push_back(times[30] + 0.1); // a 600 bpm interval
  const FhrSeries with_spur = fhr_from_events(times, 60.0);
  const FhrSeries clean = fhr_from_events(regular_times(60.0 / 140.0, 60.0), 60.0);
  REQUIRE(same_grid(with_spur, clean));
  for (std::size_t i = 0; i < clean.size(); ++i)
    CHECK(with_spur.bpm[i] == doctest::Approx(clean.bpm[i]).epsilon(1e-9));
}

TEST_CASE("label-based rate: too few intervals produce a gap") {
  const FhrSeries s = fhr_from_events({5.0}, 20.0);
  REQUIRE(s.size() == 3);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(FhrSeries::is_gap(s.bpm[i]));
}

TEST_CASE("label-based rate is order-insensitive") {
  std::vector<double> shuffled{5.1, 2.3, 7.4, 3.7, 6.0, 1.0, 4.4, 8.9, 10.2, 11.6, 13.0, 14.4, 15.8,
                               17.2, 18.6};
  std::vector<double> sorted = shuffled;
  std::sort(sorted.begin(), sorted.end());
  const FhrSeries a = fhr_from_events(shuffled, 20.0);
  const FhrSeries b = fhr_from_events(sorted, 20.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (FhrSeries::is_gap(a.bpm[i]))
      CHECK(FhrSeries::is_gap(b.bpm[i]));
    else
      CHECK(a.bpm[i] == b.bpm[i]);
  }
}

TEST_CASE("cyclic-spectrum estimator nails a clean constant-rate record") {
  SimConfig cfg;
  cfg.duration_s = 60.0;
  cfg.base_fhr = 140.0;
  cfg.rng_seed = 77;
  const SimResult res = simulate_record(cfg);
  const FhrSeries s = fhr_tang_cyclic(res.record);
  REQUIRE(s.size() == 11);
  for (double v : s.bpm) {
    REQUIRE(!FhrSeries::is_gap(v));
    CHECK(v == doctest::Approx(140.0).epsilon(2.0 / 140.0));
  }
}

TEST_CASE("cyclic-spectrum estimator finds an impulse train's repetition rate") {
  const double fs = 200.0;
  std::vector<double> x(static_cast<std::size_t>(20.0 * fs), 0.0);
  for (double t = 0.1; t < 20.0; t += 0.5) x[static_cast<std::size_t>(std::llround(t * fs))] = 1.0;
  const Record rec = make_record("imp", x, fs, Source::synthetic);
  TangConfig cfg;
  const FhrSeries s = fhr_tang_cyclic(rec, cfg);
  for (double v : s.bpm) {
    REQUIRE(!FhrSeries::is_gap(v));
    CHECK(v == doctest::Approx(120.0).epsilon(0.01)); // 2 Hz
  }
}

TEST_CASE("cyclic-spectrum estimator rejects windows shorter than two cycles") {
  SimConfig cfg;
  cfg.duration_s = 12.0;
  const SimResult res = simulate_record(cfg);
  TangConfig tangcfg;
  tangcfg.window_s = 1.0; // under two cycles at 80 bpm
  CHECK_THROWS_AS(fhr_tang_cyclic(res.record, tangcfg), Error);
}

TEST_CASE("autocorrelation estimator tracks a clean record") {
  SimConfig cfg;
  cfg.duration_s = 60.0;
  cfg.base_fhr = 140.0;
  cfg.rng_seed = 78;
  const SimResult res = simulate_record(cfg);
  const ZahorianResult zr = fhr_zahorian(res.record);
  REQUIRE(zr.series.size() == 11);
  for (double v : zr.series.bpm) {
    REQUIRE(!FhrSeries::is_gap(v));
    CHECK(v == doctest::Approx(140.0).epsilon(3.0 / 140.0));
  }
}

TEST_CASE("autocorrelation estimator rejects rates below its lower bound") {
  // 75 bpm S1-only train: every autocorrelation peak sits beyond the 90 bpm
  // lag bound, so every frame must be a gap
  const double fs = 333.0;
  const auto times = regular_times(60.0 / 75.0, 60.0);
  const Record rec = pulse_train(times, fs, 60.0);
  const ZahorianResult zr = fhr_zahorian(rec);
  for (double v : zr.series.bpm) CHECK(FhrSeries::is_gap(v));
}

TEST_CASE("a rate jump dents the figure of merit") {
  const double fs = 333.0;
  std::vector<double> times;
  for (double t = 0.2; t < 30.0; t += 60.0 / 140.0) times.push_back(t);
  for (double t = times.back() + 60.0 / 200.0; t < 60.0; t += 60.0 / 200.0) times.push_back(t);
  const Record rec = pulse_train(times, fs, 60.0);
  const ZahorianResult zr = fhr_zahorian(rec);
  REQUIRE(zr.merit.size() == zr.series.size());
  // settled merit before the jump, a visible dent after it
  double pre_min = 1.0, post_min = 1.0;
  for (std::size_t i = 0; i < zr.series.size(); ++i) {
    const double c = zr.series.center_s[i];
    if (c > 10.0 && c < 25.0) pre_min = std::min(pre_min, zr.merit[i]);
    if (c > 28.0 && c < 40.0) post_min = std::min(post_min, zr.merit[i]);
  }
  CHECK(pre_min > 0.85);
  CHECK(post_min < 0.8);
}

TEST_CASE("estimators share the window grid") {
  SimConfig cfg;
  cfg.duration_s = 40.0;
  cfg.rng_seed = 79;
  const SimResult res = simulate_record(cfg);
  const FhrSeries tang = fhr_tang_cyclic(res.record);
  const ZahorianResult zr = fhr_zahorian(res.record);
  const FhrSeries labels = fhr_from_events(res.annotations.times_of(SoundKind::S1), cfg.duration_s);
  CHECK(same_grid(tang, labels));
  CHECK(same_grid(zr.series, labels));
}

TEST_CASE("estimators agree with the truth on a clean constant-rate record") {
  SimConfig cfg;
  cfg.duration_s = 60.0;
  cfg.base_fhr = 140.0;
  cfg.rng_seed = 80;
  const SimResult res = simulate_record(cfg);
  const FhrSeries truth = res.truth_fhr;
  const FhrSeries tang = fhr_tang_cyclic(res.record);
  const ZahorianResult zr = fhr_zahorian(res.record);
  const FhrSeries labels = fhr_from_events(res.annotations.times_of(SoundKind::S1), cfg.duration_s);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    CHECK(std::abs(labels.bpm[i] - truth.bpm[i]) < 1e-12);
    CHECK(std::abs(tang.bpm[i] - truth.bpm[i]) < 3.0);
    if (!FhrSeries::is_gap(zr.series.bpm[i])) CHECK(std::abs(zr.series.bpm[i] - truth.bpm[i]) < 3.0);
  }
}
