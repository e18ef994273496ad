#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "fpcg/envelope.hpp"
#include "fpcg/fft.hpp"
#include "fpcg/mathutil.hpp"
#include "fpcg/rng.hpp"

using namespace fpcg;

namespace {

std::vector<double> sine(double freq, double fs, double duration, double amp = 1.0) {
  const std::size_t n = static_cast<std::size_t>(duration * fs);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs);
  return x;
}

} // namespace

TEST_CASE("fft matches a naive DFT on awkward lengths") {
  Rng rng(5);
  for (std::size_t n : {2u, 3u, 7u, 16u, 30u, 61u, 128u}) {
    std::vector<cplx> data(n);
    for (auto& v : data) v = cplx(rng.gauss(), rng.gauss());
    std::vector<cplx> got = data;
    fft(got, false);
    for (std::size_t k = 0; k < n; ++k) {
      cplx ref(0.0, 0.0);
      for (std::size_t t = 0; t < n; ++t) {
        const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n);
        ref += data[t] * cplx(std::cos(ang), std::sin(ang));
      }
      CHECK(std::abs(got[k] - ref) < 1e-9 * (1.0 + std::abs(ref)));
    }
    fft(got, true);
    for (std::size_t t = 0; t < n; ++t) CHECK(std::abs(got[t] - data[t]) < 1e-10);
  }
}

TEST_CASE("energy is preserved between time and frequency domains") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 16 + static_cast<std::size_t>(rng.below(400));
    std::vector<double> x(n);
    for (double& v : x) v = rng.gauss();
    const auto spec = fft_real(x);
    double e_time = 0.0, e_freq = 0.0;
    for (double v : x) e_time += v * v;
    for (const auto& v : spec) e_freq += std::norm(v);
    e_freq /= static_cast<double>(n);
    CHECK(std::abs(e_time - e_freq) <= 1e-9 * e_time);
  }
}

TEST_CASE("hilbert envelope of a tone is its amplitude") {
  const double fs = 333.0, amp = 0.8;
  const std::vector<double> x = sine(40.0, fs, 3.0, amp);
  const std::vector<double> env = hilbert_envelope(x);
  const std::size_t margin = x.size() / 10;
  for (std::size_t i = margin; i + margin < env.size(); ++i)
    CHECK(std::abs(env[i] - amp) < 0.02 * amp);
}

TEST_CASE("hilbert envelope bounds") {
  // zero in, zero out; and the envelope dominates |x| pointwise
  const std::vector<double> zeros(64, 0.0);
  for (double v : hilbert_envelope(zeros)) CHECK(v == 0.0);

  Rng rng(23);
  std::vector<double> x(257);
  for (double& v : x) v = rng.gauss();
  const std::vector<double> env = hilbert_envelope(x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(env[i] + 1e-9 >= std::abs(x[i]));
}

TEST_CASE("homomorphic envelope tracks a constant and stays positive") {
  const double fs = 333.0;
  std::vector<double> x = sine(40.0, fs, 4.0, 0.6);
  const std::vector<double> env = homomorphic_envelope(x, fs);
  const std::size_t margin = x.size() / 8;
  for (std::size_t i = margin; i + margin < env.size(); ++i)
    CHECK(env[i] == doctest::Approx(0.6).epsilon(0.01));
  for (double v : env) CHECK(v > 0.0);
}

TEST_CASE("homomorphic envelope smooths more than the hilbert envelope") {
  // amplitude-modulated tone: total variation must drop
  const double fs = 333.0;
  const std::size_t n = static_cast<std::size_t>(6.0 * fs);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    x[i] = (1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * 3.0 * t)) *
           std::sin(2.0 * std::numbers::pi * 40.0 * t);
  }
  const std::vector<double> hil = hilbert_envelope(x);
  const std::vector<double> hom = homomorphic_envelope(x, fs);
  auto total_variation = [](const std::vector<double>& v) {
    double tv = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) tv += std::abs(v[i] - v[i - 1]);
    return tv;
  };
  CHECK(total_variation(hom) < total_variation(hil));
}

TEST_CASE("teager energy identities") {
  // linear ramp: x^2 - (x-1)(x+1) = 1
  std::vector<double> ramp(100);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
  for (double v : teager_energy(ramp)) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  // constant: zero
  for (double v : teager_energy(std::vector<double>(50, 3.3))) CHECK(v == doctest::Approx(0.0));

  // tone: psi ~ A^2 sin^2(w0), constant over the interior
  const double fs = 1000.0, f = 25.0, amp = 2.0;
  const std::vector<double> x = sine(f, fs, 1.0, amp);
  const std::vector<double> psi = teager_energy(x);
  const double w0 = 2.0 * std::numbers::pi * f / fs;
  const double expected = amp * amp * std::sin(w0) * std::sin(w0);
  for (std::size_t i = 1; i + 1 < psi.size(); ++i)
    CHECK(psi[i] == doctest::Approx(expected).epsilon(0.01));

  CHECK_THROWS_AS(teager_energy(std::vector<double>{1.0, 2.0}), Error);
}

TEST_CASE("teager energy equals a direct reference on random input") {
  Rng rng(31);
  std::vector<double> x(500);
  for (double& v : x) v = rng.gauss();
  const std::vector<double> psi = teager_energy(x);
  for (std::size_t i = 1; i + 1 < x.size(); ++i)
    CHECK(psi[i] == x[i] * x[i] - x[i - 1] * x[i + 1]);
}

TEST_CASE("windowed rms") {
  // constant
  for (double v : rms_envelope(std::vector<double>(1000, -0.4), 333.0, 0.1, 0.05))
    CHECK(v == doctest::Approx(0.4).epsilon(1e-12));
  // full-record window over integer periods of a sinusoid: A/sqrt(2)
  const double fs = 1000.0;
  const std::vector<double> x = sine(10.0, fs, 2.0, 1.5);
  const auto r = rms_envelope(x, fs, 2.0, 1.0);
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(1.5 / std::sqrt(2.0)).epsilon(0.01));
  // all zero
  for (double v : rms_envelope(std::vector<double>(400, 0.0), 333.0, 0.05, 0.02)) CHECK(v == 0.0);
  CHECK_THROWS_AS(rms_envelope(std::vector<double>(10, 1.0), 333.0, 1.0, 0.5), Error);
}

TEST_CASE("psd band energy separates in-band and out-of-band tones") {
  const double fs = 333.0;
  const auto in_band = psd_energy_envelope(sine(50.0, fs, 4.0), fs, 40.0, 60.0, 0.2, 0.02);
  const auto out_band = psd_energy_envelope(sine(10.0, fs, 4.0), fs, 40.0, 60.0, 0.2, 0.02);
  const std::size_t margin = in_band.size() / 8;
  double in_mean = 0.0, out_mean = 0.0;
  std::size_t count = 0;
  for (std::size_t i = margin; i + margin < in_band.size(); ++i) {
    in_mean += in_band[i];
    out_mean += out_band[i];
    ++count;
  }
  in_mean /= static_cast<double>(count);
  out_mean /= static_cast<double>(count);
  CHECK(in_mean > 10.0 * out_mean);

  for (double v : psd_energy_envelope(std::vector<double>(1332, 0.0), fs, 40.0, 60.0, 0.2, 0.02))
    CHECK(v == 0.0);
}

TEST_CASE("band energies over a partition add up to the frame energy") {
  const double fs = 333.0;
  Rng rng(41);
  std::vector<double> x(666);
  for (double& v : x) v = rng.gauss();
  // single frame covering the whole signal, hop beyond the end
  const double frame_s = static_cast<double>(x.size()) / fs;
  double band_total = 0.0;
  const double step = 10.0;
  for (double lo = 0.0; lo < fs; lo += step) {
    const auto frames = stft_band_energy(x, fs, lo, lo + step, frame_s, frame_s * 2.0);
    band_total += frames[0].sum;
  }
  // compare against the windowed frame energy via the transform itself
  const auto all = stft_band_energy(x, fs, 0.0, fs, frame_s, frame_s * 2.0);
  CHECK(band_total == doctest::Approx(all[0].sum).epsilon(1e-9));
  // and the all-bin sum obeys the energy identity with the time domain
  std::vector<double> w(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ham = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                              static_cast<double>(x.size() - 1));
    w[i] = x[i] * ham;
  }
  double e_time = 0.0;
  for (double v : w) e_time += v * v;
  const auto spec = fft_real(w);
  double e_all = 0.0;
  for (const auto& v : spec) e_all += std::norm(v);
  e_all /= static_cast<double>(x.size());
  CHECK(e_time == doctest::Approx(e_all).epsilon(1e-9));
}
