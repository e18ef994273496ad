#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fpcg/detect.hpp"
#include "fpcg/eval.hpp"
#include "fpcg/mathutil.hpp"
#include "fpcg/rng.hpp"
#include "fpcg/synth.hpp"

using namespace fpcg;

namespace {

SimConfig clean_config(std::uint64_t seed, double duration = 40.0) {
  SimConfig cfg;
  cfg.duration_s = duration;
  cfg.base_fhr = 140.0;
  cfg.rng_seed = seed;
  return cfg;
}

// detector parameters matched to the simulator's pulse spectra (S1 at 30 Hz,
// S2 at 45 Hz)
TeagerTrackerConfig teager_for_sim() {
  TeagerTrackerConfig cfg;
  cfg.band_lo_hz = 20.0;
  cfg.band_hi_hz = 40.0;
  return cfg;
}

RmsDetectorConfig rms_for_sim() {
  RmsDetectorConfig cfg;
  cfg.hp_hz = 25.0;
  return cfg;
}

double s1_recall(const EventList& annotations, const EventList& detections, double tol) {
  const auto m = match_detections(annotations.times_of(SoundKind::S1),
                                  detections.times_of(SoundKind::S1), tol);
  return static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
}

} // namespace

TEST_CASE("teager tracker finds nearly every beat on a clean record") {
  const SimResult res = simulate_record(clean_config(1001));
  const EventList dets = detect_teager_tracker(res.record, teager_for_sim());
  CHECK(s1_recall(res.annotations, dets, 0.03) >= 0.95);
}

TEST_CASE("teager tracker stops detecting when the signal goes silent") {
  // beats for 8 s, then silence
  SimConfig cfg = clean_config(1002, 8.0);
  const SimResult res = simulate_record(cfg);
  std::vector<double> x = res.record.samples;
  x.resize(static_cast<std::size_t>(20.0 * cfg.fs), 0.0);
  const Record rec = make_record("halfsilent", x, cfg.fs, Source::synthetic);
  const EventList dets = detect_teager_tracker(rec, teager_for_sim());
  std::size_t late = 0;
  for (const Event& e : dets.items)
    if (e.t > 9.0) ++late;
  CHECK(late == 0);
}

TEST_CASE("teager tracker prefers the candidate nearest the prediction") {
  // regular beats, then one beat replaced by two equal pulses offset +20 ms
  // and +80 ms from the expected position (far enough apart that the bursts
  // stay separate after band-pass filtering)
  const double fs = 333.0;
  const double interval = 60.0 / 140.0;
  const std::size_t n = static_cast<std::size_t>(30.0 * fs);
  std::vector<double> x(n, 0.0);
  const auto pulse = gen_heart_sound(30.0, 0.06, 1.0, fs);
  auto add_at = [&](double t) {
    const long c = std::lround(t * fs);
    const long half = static_cast<long>(pulse.size() / 2);
    for (long j = 0; j < static_cast<long>(pulse.size()); ++j) {
      const long idx = c - half + j;
      if (idx >= 0 && idx < static_cast<long>(n)) x[static_cast<std::size_t>(idx)] += pulse[static_cast<std::size_t>(j)];
    }
  };
  const double special = 20.0 * interval + 0.2; // a beat index well past training
  double t = 0.2;
  std::vector<double> beat_times;
  while (t < 30.0 - 0.1) {
    if (std::abs(t - special) < 1e-9) {
      add_at(t + 0.020);
      add_at(t + 0.080);
    } else {
      add_at(t);
    }
    beat_times.push_back(t);
    t += interval;
  }
  const Record rec = make_record("twocand", x, fs, Source::synthetic);
  const EventList dets = detect_teager_tracker(rec, teager_for_sim());
  bool near_found = false, far_found = false;
  for (const Event& e : dets.items) {
    if (std::abs(e.t - (special + 0.020)) < 0.015) near_found = true;
    if (std::abs(e.t - (special + 0.080)) < 0.015) far_found = true;
  }
  CHECK(near_found);
  CHECK(!far_found);
}

TEST_CASE("rms detector on a clean record keeps intervals in the plausible range") {
  const SimResult res = simulate_record(clean_config(1003));
  const EventList dets = detect_rms_threshold(res.record, rms_for_sim());
  CHECK(s1_recall(res.annotations, dets, 0.03) >= 0.95);
  REQUIRE(dets.items.size() >= 2);
  for (std::size_t i = 1; i < dets.items.size(); ++i) {
    const double iv = dets.items[i].t - dets.items[i - 1].t;
    CHECK(iv >= 60.0 / 200.0);
    CHECK(iv <= 60.0 / 100.0);
  }
}

TEST_CASE("rms detector merges close peaks keeping the larger") {
  // two bursts 20 ms apart with amplitudes 1.0 and 0.6
  const double fs = 333.0;
  std::vector<double> x(static_cast<std::size_t>(10.0 * fs), 0.0);
  const auto big = gen_heart_sound(45.0, 0.04, 1.0, fs);
  const auto small = gen_heart_sound(45.0, 0.04, 0.6, fs);
  auto add_at = [&](const std::vector<double>& pulse, double t) {
    const long c = std::lround(t * fs);
    const long half = static_cast<long>(pulse.size() / 2);
    for (long j = 0; j < static_cast<long>(pulse.size()); ++j) {
      const long idx = c - half + j;
      if (idx >= 0 && idx < static_cast<long>(x.size()))
        x[static_cast<std::size_t>(idx)] += pulse[static_cast<std::size_t>(j)];
    }
  };
  for (double t = 0.5; t < 9.0; t += 0.45) add_at(big, t);
  add_at(small, 5.0 + 0.02); // rides next to the burst at t=5.0
  const Record rec = make_record("merge", x, fs, Source::synthetic);
  RmsDetectorConfig cfg = rms_for_sim();
  const EventList dets = detect_rms_threshold(rec, cfg);
  std::size_t hits = 0;
  for (const Event& e : dets.items)
    if (e.t > 4.95 && e.t < 5.07) ++hits;
  CHECK(hits == 1);
}

TEST_CASE("rms detector stays quiet on pure noise") {
  Rng rng(4242);
  const double fs = 333.0;
  std::vector<double> x(static_cast<std::size_t>(60.0 * fs));
  for (double& v : x) v = rng.gauss();
  const Record rec = make_record("noise", x, fs, Source::file);
  const EventList dets = detect_rms_threshold(rec, rms_for_sim());
  CHECK(dets.items.size() < 5);
}

TEST_CASE("heuristic detector counts the beats of a clean record") {
  const SimResult res = simulate_record(clean_config(1004));
  const EventList dets = detect_heuristic_intensity(res.record);
  const std::ptrdiff_t diff = static_cast<std::ptrdiff_t>(dets.count_of(SoundKind::S1)) -
                              static_cast<std::ptrdiff_t>(res.annotations.count_of(SoundKind::S1));
  CHECK(std::abs(diff) <= 2);
  CHECK(s1_recall(res.annotations, dets, 0.03) >= 0.9);
}

TEST_CASE("heuristic detector returns nothing for an all-zero record") {
  const Record rec = make_record("zero", std::vector<double>(10000, 0.0), 333.0, Source::file);
  CHECK(detect_heuristic_intensity(rec).items.empty());
}

TEST_CASE("gap rule labels the short interval as systole") {
  // alternating gaps 0.15 / 0.28 s
  std::vector<double> times;
  double t = 0.5;
  for (int i = 0; i < 10; ++i) {
    times.push_back(t);
    times.push_back(t + 0.15);
    t += 0.43;
  }
  const auto events = assign_kinds_by_gap(times);
  for (std::size_t i = 0; i < events.size(); ++i)
    CHECK(events[i].kind == (i % 2 == 0 ? SoundKind::S1 : SoundKind::S2));
}

TEST_CASE("katz fractal dimension identities") {
  // monotone ramp is a straight path: D = 1
  std::vector<double> ramp(100);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.37 * static_cast<double>(i);
  CHECK(katz_fd(ramp) == doctest::Approx(1.0).epsilon(1e-9));
  // constant window: defined as 1
  CHECK(katz_fd(std::vector<double>(10, 2.0)) == 1.0);
  CHECK_THROWS_AS(katz_fd(std::vector<double>{1.0, 2.0}), Error);
}

TEST_CASE("katz fractal dimension equals an independent recomputation") {
  Rng rng(909);
  std::vector<double> walk(200);
  double acc = 0.0;
  for (double& v : walk) v = (acc += rng.gauss());
  const double got = katz_fd(walk);
  // direct formula, written separately
  double length = 0.0, dmax = 0.0;
  for (std::size_t i = 1; i < walk.size(); ++i) {
    length += std::hypot(1.0, walk[i] - walk[i - 1]);
    dmax = std::max(dmax, std::hypot(static_cast<double>(i), walk[i] - walk[0]));
  }
  const double a = length / static_cast<double>(walk.size() - 1);
  const double expected = std::log10(length / a) / std::log10(dmax / a);
  CHECK(got == expected);
}

TEST_CASE("peak peeling terminates with a settling energy difference") {
  // realistic fractal-dimension profile: smooth bumps on a near-flat baseline
  Rng rng(911);
  std::vector<double> fd(4000);
  for (std::size_t i = 0; i < fd.size(); ++i) fd[i] = 1.0 + 0.002 * rng.gauss();
  for (double c = 0.3; c < 39.0; c += 0.43) {
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const double t = static_cast<double>(i) * 0.01;
      fd[i] += 0.6 * std::exp(-(t - c) * (t - c) / (2.0 * 0.03 * 0.03));
    }
  }
  const PeelResult peel = kfd_peel(fd, 1e-4, 50);
  CHECK(peel.converged);
  CHECK(peel.energy_diffs.size() <= 50);
  REQUIRE(peel.energy_diffs.size() >= 3);
  // settles monotonically once the first layers are off
  for (std::size_t i = 3; i < peel.energy_diffs.size(); ++i)
    CHECK(peel.energy_diffs[i] <= peel.energy_diffs[i - 1] + 1e-12);
}

TEST_CASE("kfd detector reaches a usable S1 score on clean input") {
  const SimResult res = simulate_record(clean_config(1005));
  const EventList dets = detect_kfd_peakpeel(res.record);
  const auto m = match_detections(res.annotations.times_of(SoundKind::S1),
                                  dets.times_of(SoundKind::S1), 0.03);
  const Scores s = scores(m);
  REQUIRE(s.f1.has_value());
  CHECK(*s.f1 >= 0.8);
}

TEST_CASE("kfd detector returns nothing for an all-zero record") {
  const Record rec = make_record("zero", std::vector<double>(10000, 0.0), 333.0, Source::file);
  CHECK(detect_kfd_peakpeel(rec).items.empty());
}

TEST_CASE("detectors are deterministic") {
  const SimResult res = simulate_record(clean_config(1006, 20.0));
  const EventList a = detect_teager_tracker(res.record, teager_for_sim());
  const EventList b = detect_teager_tracker(res.record, teager_for_sim());
  REQUIRE(a.items.size() == b.items.size());
  for (std::size_t i = 0; i < a.items.size(); ++i) CHECK(a.items[i].t == b.items[i].t);
  const EventList c = detect_rms_threshold(res.record, rms_for_sim());
  const EventList d = detect_rms_threshold(res.record, rms_for_sim());
  REQUIRE(c.items.size() == d.items.size());
  const EventList e = detect_heuristic_intensity(res.record);
  const EventList f = detect_heuristic_intensity(res.record);
  REQUIRE(e.items.size() == f.items.size());
}
