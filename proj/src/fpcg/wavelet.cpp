#include "wavelet.hpp"

#include <algorithm>
#include <cmath>

#include "common.hpp"

namespace fpcg {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

// Cubic-spline low-pass [1 3 3 1]/(4*sqrt(2)) and its 20-tap dual (CDF spline
// construction, exact dyadic rationals over 65536*sqrt(2)).
const double kSpline3Lo[4] = {1.0 / (4.0 * kSqrt2), 3.0 / (4.0 * kSqrt2), 3.0 / (4.0 * kSqrt2),
                              1.0 / (4.0 * kSqrt2)};

const double kDual39Lo[20] = {
    -63.0 / 65536.0 / kSqrt2,    189.0 / 65536.0 / kSqrt2,   469.0 / 65536.0 / kSqrt2,
    -1911.0 / 65536.0 / kSqrt2,  -1308.0 / 65536.0 / kSqrt2, 9188.0 / 65536.0 / kSqrt2,
    1140.0 / 65536.0 / kSqrt2,   -29676.0 / 65536.0 / kSqrt2, 190.0 / 65536.0 / kSqrt2,
    87318.0 / 65536.0 / kSqrt2,  87318.0 / 65536.0 / kSqrt2, 190.0 / 65536.0 / kSqrt2,
    -29676.0 / 65536.0 / kSqrt2, 1140.0 / 65536.0 / kSqrt2,  9188.0 / 65536.0 / kSqrt2,
    -1308.0 / 65536.0 / kSqrt2,  -1911.0 / 65536.0 / kSqrt2, 469.0 / 65536.0 / kSqrt2,
    189.0 / 65536.0 / kSqrt2,    -63.0 / 65536.0 / kSqrt2};

// Daubechies-4 scaling filter (8 taps, sum sqrt(2)).
const double kDb4[8] = {0.23037781330885523,   0.7148465705525415,   0.6308807679295904,
                        -0.02798376941698385,  -0.18703481171888114, 0.030841381835986965,
                        0.032883011666982945,  -0.010597401784997278};

// high-pass from the opposite branch's low-pass by sign alternation:
// dec_hi[k] = +(-1)^k rec_lo[k], rec_hi[k] = -(-1)^k dec_lo[k]
std::vector<double> alternate_signs(const std::vector<double>& lo, double sign) {
  std::vector<double> hi(lo.size());
  for (std::size_t k = 0; k < lo.size(); ++k) {
    const double phase = (k % 2 == 0) ? 1.0 : -1.0;
    hi[k] = sign * phase * lo[k];
  }
  return hi;
}

WaveletBank build_rbio39() {
  WaveletBank wb;
  wb.name = "rbio3.9";
  wb.dec_lo.assign(20, 0.0);
  for (int i = 0; i < 4; ++i) wb.dec_lo[8 + i] = kSpline3Lo[i]; // centred in the 20-tap frame
  wb.rec_lo.assign(kDual39Lo, kDual39Lo + 20);
  wb.dec_hi = alternate_signs(wb.rec_lo, 1.0);
  wb.rec_hi = alternate_signs(wb.dec_lo, -1.0);
  return wb;
}

WaveletBank build_db4() {
  WaveletBank wb;
  wb.name = "db4";
  wb.rec_lo.assign(kDb4, kDb4 + 8);
  wb.dec_lo.assign(wb.rec_lo.rbegin(), wb.rec_lo.rend());
  wb.dec_hi = alternate_signs(wb.rec_lo, 1.0);
  wb.rec_hi = alternate_signs(wb.dec_lo, -1.0);
  return wb;
}

std::vector<double> conv_full(const std::vector<double>& x, const std::vector<double>& h) {
  std::vector<double> y(x.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xv = x[i];
    if (xv == 0.0) continue;
    for (std::size_t k = 0; k < h.size(); ++k) y[i + k] += xv * h[k];
  }
  return y;
}

std::vector<double> downsample_odd(const std::vector<double>& y) {
  std::vector<double> out;
  out.reserve(y.size() / 2);
  for (std::size_t i = 1; i < y.size(); i += 2) out.push_back(y[i]);
  return out;
}

} // namespace

const WaveletBank& wavelet_bank(const std::string& name) {
  static const WaveletBank rbio39 = build_rbio39();
  static const WaveletBank db4 = build_db4();
  if (name == "rbio3.9") return rbio39;
  if (name == "db4") return db4;
  fail(ErrorCode::invalid_argument, "unknown wavelet '" + name + "'");
}

void dwt_single(const std::vector<double>& x, const WaveletBank& wb, std::vector<double>& approx,
                std::vector<double>& detail) {
  if (x.size() < 2) fail(ErrorCode::invalid_argument, "signal too short for DWT stage");
  approx = downsample_odd(conv_full(x, wb.dec_lo));
  detail = downsample_odd(conv_full(x, wb.dec_hi));
}

std::vector<double> idwt_single(const std::vector<double>& approx, const std::vector<double>& detail,
                                const WaveletBank& wb, std::size_t n) {
  const std::size_t L = wb.rec_lo.size();
  const std::size_t m = std::max(approx.size(), detail.size());
  std::vector<double> ua(2 * m, 0.0), ud(2 * m, 0.0);
  for (std::size_t i = 0; i < approx.size(); ++i) ua[2 * i] = approx[i];
  for (std::size_t i = 0; i < detail.size(); ++i) ud[2 * i] = detail[i];
  const std::vector<double> ya = conv_full(ua, wb.rec_lo);
  const std::vector<double> yd = conv_full(ud, wb.rec_hi);
  std::vector<double> out(n, 0.0);
  const std::size_t trim = L - 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + trim;
    double v = 0.0;
    if (j < ya.size()) v += ya[j];
    if (j < yd.size()) v += yd[j];
    out[i] = v;
  }
  return out;
}

DwtDecomposition dwt_cascade(const std::vector<double>& x, const WaveletBank& wb, int levels) {
  if (levels < 1) fail(ErrorCode::invalid_argument, "need at least one DWT level");
  DwtDecomposition dec;
  std::vector<double> cur = x;
  for (int l = 0; l < levels; ++l) {
    if (cur.size() < 2) fail(ErrorCode::invalid_argument, "record too short for requested DWT depth");
    dec.lengths.push_back(cur.size());
    std::vector<double> a, d;
    dwt_single(cur, wb, a, d);
    dec.details.push_back(std::move(d));
    cur = std::move(a);
  }
  dec.approx = std::move(cur);
  return dec;
}

std::vector<double> wavelet_detail_component(const DwtDecomposition& dec, const WaveletBank& wb, int level) {
  const int levels = static_cast<int>(dec.details.size());
  if (level < 1 || level > levels) fail(ErrorCode::invalid_argument, "detail level out of range");
  // start one stage below `level` with a zero approximation
  std::vector<double> cur(dec.details[static_cast<std::size_t>(level) - 1].size(), 0.0);
  std::vector<double> zero;
  for (int l = level; l >= 1; --l) {
    const auto& d = dec.details[static_cast<std::size_t>(l) - 1];
    zero.assign(d.size(), 0.0);
    const std::vector<double>& detail = (l == level) ? d : zero;
    cur = idwt_single(cur, detail, wb, dec.lengths[static_cast<std::size_t>(l) - 1]);
  }
  return cur;
}

int max_dwt_levels(std::size_t n, const WaveletBank& wb) {
  int levels = 0;
  std::size_t len = n;
  const std::size_t L = wb.dec_lo.size();
  while (len >= L) {
    len = (len + L - 1) / 2;
    ++levels;
  }
  return levels;
}

int select_detail_level(double fs, double target_hz, int max_level) {
  int best = 1;
  double best_err = 1e300;
  for (int l = 1; l <= std::max(1, max_level); ++l) {
    const double fc = fs / std::pow(2.0, l + 1);
    const double err = std::abs(fc - target_hz);
    if (err < best_err) {
      best_err = err;
      best = l;
    }
  }
  return best;
}

std::vector<double> dwt_detail_envelope(const std::vector<double>& x, double fs, int level,
                                        double feature_rate, std::size_t n_out) {
  const WaveletBank& wb = wavelet_bank("rbio3.9");
  if (level < 1) fail(ErrorCode::invalid_argument, "detail level must be >= 1");
  if (max_dwt_levels(x.size(), wb) < level)
    fail(ErrorCode::invalid_argument, "record too short for DWT level " + std::to_string(level));
  const DwtDecomposition dec = dwt_cascade(x, wb, level);
  const std::vector<double>& d = dec.details.back();
  if (d.empty()) fail(ErrorCode::invalid_argument, "empty detail band");

  // coefficient i of level l sits at input sample 2^l * i - D*(2^l - 1),
  // D = (L-1)/2 - 1 for the odd-phase downsampling used here
  const double scale = std::pow(2.0, level);
  const double delay = (static_cast<double>(wb.dec_lo.size()) - 1.0) / 2.0 - 1.0;
  const double offset = delay * (scale - 1.0);

  std::vector<double> out(n_out, 0.0);
  for (std::size_t k = 0; k < n_out; ++k) {
    const double u = static_cast<double>(k) / feature_rate * fs; // original sample position
    const double idx = (u + offset) / scale;
    double v;
    if (idx <= 0.0) {
      v = d.front();
    } else if (idx >= static_cast<double>(d.size() - 1)) {
      v = d.back();
    } else {
      const std::size_t i0 = static_cast<std::size_t>(idx);
      const double frac = idx - static_cast<double>(i0);
      v = d[i0] + frac * (d[i0 + 1] - d[i0]);
    }
    out[k] = std::abs(v);
  }
  return out;
}

} // namespace fpcg
