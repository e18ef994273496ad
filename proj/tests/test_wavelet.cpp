#include <doctest.h>

#include <cmath>

#include "fpcg/mathutil.hpp"
#include "fpcg/rng.hpp"
#include "fpcg/wavelet.hpp"

using namespace fpcg;

TEST_CASE("filter banks reconstruct random signals exactly") {
  // validates the frozen coefficient tables end to end
  Rng rng(13);
  for (const char* name : {"rbio3.9", "db4"}) {
    const WaveletBank& wb = wavelet_bank(name);
    for (std::size_t n : {53u, 64u, 200u, 333u}) {
      std::vector<double> x(n);
      for (double& v : x) v = rng.gauss();
      std::vector<double> a, d;
      dwt_single(x, wb, a, d);
      const std::vector<double> back = idwt_single(a, d, wb, n);
      REQUIRE(back.size() == n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(back[i] - x[i]) < 1e-8);
    }
  }
}

TEST_CASE("cascade reconstructs from all detail components plus approximation") {
  Rng rng(29);
  const WaveletBank& wb = wavelet_bank("db4");
  std::vector<double> x(400);
  for (double& v : x) v = rng.gauss();
  const int levels = 3;
  const DwtDecomposition dec = dwt_cascade(x, wb, levels);

  // sum of single-detail components plus the approximation-only inverse
  std::vector<double> sum(x.size(), 0.0);
  for (int l = 1; l <= levels; ++l) {
    const std::vector<double> comp = wavelet_detail_component(dec, wb, l);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += comp[i];
  }
  // approximation branch: inverse with every detail zeroed
  std::vector<double> approx = dec.approx;
  for (int l = levels; l >= 1; --l) {
    const std::vector<double> zero(dec.details[static_cast<std::size_t>(l) - 1].size(), 0.0);
    approx = idwt_single(approx, zero, wb, dec.lengths[static_cast<std::size_t>(l) - 1]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(sum[i] + approx[i] - x[i]) < 1e-8);
}

TEST_CASE("detail envelope basics") {
  // zero in, zero out; always non-negative
  const std::vector<double> zeros(1000, 0.0);
  for (double v : dwt_detail_envelope(zeros, 333.0, 2, 50.0, 150)) CHECK(v == 0.0);

  Rng rng(37);
  std::vector<double> x(1000);
  for (double& v : x) v = rng.gauss();
  for (double v : dwt_detail_envelope(x, 333.0, 2, 50.0, 150)) CHECK(v >= 0.0);

  CHECK_THROWS_AS(dwt_detail_envelope(std::vector<double>(8, 1.0), 333.0, 5, 50.0, 10), Error);
}

TEST_CASE("detail level selection targets the 40 Hz band") {
  CHECK(select_detail_level(333.0, 40.0, 6) == 2);
  CHECK(select_detail_level(1000.0, 40.0, 8) == 4);
  // level capped by the decomposition depth
  CHECK(select_detail_level(333.0, 40.0, 1) == 1);
}

TEST_CASE("detail envelope peaks align with a burst") {
  // a short 40 Hz burst should light up the selected detail near its centre
  const double fs = 333.0;
  const std::size_t n = 999;
  std::vector<double> x(n, 0.0);
  const std::size_t c = 500;
  for (std::size_t i = c - 30; i <= c + 30; ++i) {
    const double t = (static_cast<double>(i) - static_cast<double>(c)) / fs;
    x[i] = std::exp(-t * t / (2.0 * 0.01 * 0.01)) * std::cos(2.0 * std::numbers::pi * 40.0 * t);
  }
  const double feature_rate = 50.0;
  const auto env = dwt_detail_envelope(x, fs, 2, feature_rate, 150);
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < env.size(); ++i)
    if (env[i] > env[argmax]) argmax = i;
  const double t_peak = static_cast<double>(argmax) / feature_rate;
  const double t_true = static_cast<double>(c) / fs;
  CHECK(std::abs(t_peak - t_true) < 0.05);
}
