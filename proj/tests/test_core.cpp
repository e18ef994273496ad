#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "fpcg/csvio.hpp"
#include "fpcg/mathutil.hpp"
#include "fpcg/resample.hpp"
#include "fpcg/rng.hpp"
#include "fpcg/types.hpp"
#include "fpcg/wav.hpp"

using namespace fpcg;

namespace {

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "fpcg_test_core";
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<double> sine(double freq, double fs, double duration, double amp = 1.0) {
  const std::size_t n = static_cast<std::size_t>(duration * fs);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs);
  return x;
}

} // namespace

TEST_CASE("record validation") {
  CHECK_THROWS_AS(make_record("x", {}, 100.0, Source::file), Error);
  CHECK_THROWS_AS(make_record("x", {1.0}, 0.0, Source::file), Error);
  CHECK_THROWS_AS(make_record("x", {std::nan("")}, 100.0, Source::file), Error);
  const Record rec = make_record("x", {0.0, 0.5}, 100.0, Source::file);
  CHECK(rec.duration_s() == doctest::Approx(0.02));
}

TEST_CASE("annotation invariants") {
  CHECK_THROWS_AS(make_annotations("r", {{0.1, SoundKind::S1}, {0.15, SoundKind::S1}}), Error);
  CHECK_THROWS_AS(make_annotations("r", {{-0.1, SoundKind::S1}}), Error);
  // S1/S2 may interleave closely, the floor applies per kind
  const EventList a = make_annotations("r", {{0.25, SoundKind::S2}, {0.10, SoundKind::S1}});
  CHECK(a.items[0].t == 0.10);
  CHECK(a.items[1].t == 0.25);
}

TEST_CASE("wav 16-bit half scale and 8-bit midpoint") {
  const auto dir = temp_dir();
  {
    // value 16384 at fs 1000 -> sample 0.5
    std::vector<double> x{16384.0 / 32768.0, -0.25, 0.0};
    save_wav(make_record("w16", x, 1000.0, Source::file), (dir / "w16.wav").string(), 16);
    const Record r = load_wav((dir / "w16.wav").string());
    CHECK(r.fs == 1000.0);
    CHECK(r.samples[0] == doctest::Approx(0.5).epsilon(1e-12));
  }
  {
    // constant 128 in unsigned 8-bit -> all zeros
    save_wav(make_record("w8", std::vector<double>(50, 0.0), 500.0, Source::file),
             (dir / "w8.wav").string(), 8);
    const Record r = load_wav((dir / "w8.wav").string());
    for (double v : r.samples) CHECK(v == 0.0);
  }
}

TEST_CASE("wav round trip within one quantisation step") {
  const auto dir = temp_dir();
  Rng rng(7);
  std::vector<double> x(500);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  for (int bits : {8, 16, 32}) {
    const auto path = (dir / ("rt" + std::to_string(bits) + ".wav")).string();
    save_wav(make_record("rt", x, 333.0, Source::synthetic), path, bits);
    const Record r = load_wav(path);
    REQUIRE(r.samples.size() == x.size());
    CHECK(r.fs == 333.0);
    const double lsb = bits == 8 ? 1.0 / 128.0 : bits == 16 ? 1.0 / 32768.0 : 1e-7;
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(r.samples[i] - x[i]) <= lsb);
  }
}

TEST_CASE("wav error paths") {
  const auto dir = temp_dir();
  CHECK_THROWS_AS(load_wav((dir / "missing.wav").string()), Error);
  std::ofstream os(dir / "garbage.wav", std::ios::binary);
  os << "not a wav file";
  os.close();
  CHECK_THROWS_AS(load_wav((dir / "garbage.wav").string()), Error);
}

TEST_CASE("annotation csv round trip and sorting") {
  const auto dir = temp_dir();
  const auto path = (dir / "ann.csv").string();
  {
    std::ofstream os(path);
    os << "t_s,kind\n0.100000,S1\n0.250000,S2\n";
  }
  const EventList a = load_annotations_csv(path);
  REQUIRE(a.items.size() == 2);
  CHECK(a.items[0].kind == SoundKind::S1);

  // out-of-order rows load to the same canonical form
  {
    std::ofstream os(path);
    os << "t_s,kind\n0.250000,S2\n0.100000,S1\n";
  }
  const EventList b = load_annotations_csv(path);
  REQUIRE(b.items.size() == 2);
  CHECK(b.items[0].t == a.items[0].t);
  CHECK(b.items[1].t == a.items[1].t);

  {
    std::ofstream os(path);
    os << "t_s,kind\n0.100000,S3\n";
  }
  CHECK_THROWS_WITH_AS(load_annotations_csv(path), doctest::Contains("unknown kind"), Error);

  {
    std::ofstream os(path);
    os << "t_s,kind\nnot_a_number,S1\n";
  }
  CHECK_THROWS_AS(load_annotations_csv(path), Error);
}

TEST_CASE("events csv save/load round trip") {
  const auto dir = temp_dir();
  const EventList d = make_detections("rec7", "teager",
                                      {{0.5, SoundKind::S1}, {0.65, SoundKind::S2}, {0.9, SoundKind::S1}});
  const auto path = (dir / "rec7_detections.csv").string();
  save_events_csv(d, path);
  const EventList r = load_detections_csv(path);
  CHECK(r.record_id == "rec7");
  REQUIRE(r.items.size() == 3);
  CHECK(r.items[1].kind == SoundKind::S2);
  CHECK(r.items[2].t == doctest::Approx(0.9));
}

TEST_CASE("manifest round trip") {
  const auto dir = temp_dir();
  std::vector<ManifestEntry> entries{{"a", (dir / "a.wav").string(), (dir / "a.csv").string()},
                                     {"b", (dir / "b.wav").string(), ""}};
  const auto path = (dir / "manifest.json").string();
  save_manifest(entries, path);
  const auto loaded = load_manifest(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].id == "a");
  CHECK(loaded[0].wav_path == entries[0].wav_path);
  CHECK(loaded[1].annotations_path.empty());
}

TEST_CASE("resample preserves DC exactly") {
  const Record rec = make_record("dc", std::vector<double>(1000, 1.0), 1000.0, Source::file);
  const Record out = resample(rec, 500.0);
  REQUIRE(out.samples.size() == 500);
  for (std::size_t i = 5; i + 5 < out.samples.size(); ++i)
    CHECK(out.samples[i] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("resample keeps in-band RMS and kills out-of-band content") {
  // 10 Hz tone survives 1000 -> 333 with its RMS intact
  {
    const Record rec = make_record("s10", sine(10.0, 1000.0, 4.0), 1000.0, Source::file);
    const Record out = resample(rec, 333.0);
    const std::size_t margin = 40;
    std::vector<double> mid(out.samples.begin() + margin, out.samples.end() - margin);
    const double expected = 1.0 / std::sqrt(2.0);
    CHECK(rms(mid) == doctest::Approx(expected).epsilon(0.01));
  }
  // 200 Hz exceeds the 333 Hz Nyquist and must be attenuated
  {
    const Record rec = make_record("s200", sine(200.0, 1000.0, 4.0), 1000.0, Source::file);
    const Record out = resample(rec, 333.0);
    const double expected = 1.0 / std::sqrt(2.0);
    CHECK(rms(out.samples) < 0.05 * expected);
  }
}

TEST_CASE("resample duration round trip") {
  Rng rng(3);
  std::vector<double> x(997);
  for (double& v : x) v = rng.gauss();
  const Record rec = make_record("rt", x, 1000.0, Source::file);
  const Record down = resample(rec, 333.0);
  const Record back = resample(down, 1000.0);
  CHECK(std::abs(back.duration_s() - rec.duration_s()) <= 1.0 / 1000.0);
}

TEST_CASE("fhr series validation") {
  FhrSeries s;
  s.window_s = 10.0;
  s.overlap = 0.5;
  s.center_s = {5.0, 10.0, 15.0};
  s.bpm = {140.0, std::nan(""), 150.0};
  CHECK_NOTHROW(validate_fhr_series(s));
  s.bpm[0] = 500.0;
  CHECK_THROWS_AS(validate_fhr_series(s), Error);
  s.bpm[0] = 140.0;
  s.center_s[2] = 14.0;
  CHECK_THROWS_AS(validate_fhr_series(s), Error);
}
