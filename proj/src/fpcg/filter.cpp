#include "filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fpcg {

namespace {

using cd = std::complex<double>;

struct Zpk {
  std::vector<cd> z, p;
  double k = 1.0;
};

Zpk butter_prototype(int order) {
  Zpk out;
  for (int i = 0; i < order; ++i) {
    const double theta = std::numbers::pi * (2.0 * i + 1.0) / (2.0 * order) + std::numbers::pi / 2.0;
    out.p.emplace_back(std::cos(theta), std::sin(theta));
  }
  out.k = 1.0;
  return out;
}

cd prod_neg(const std::vector<cd>& roots) {
  cd acc(1.0, 0.0);
  for (const cd& r : roots) acc *= -r;
  return acc;
}

Zpk lp_to_lp(const Zpk& in, double w0) {
  Zpk out;
  for (const cd& z : in.z) out.z.push_back(z * w0);
  for (const cd& p : in.p) out.p.push_back(p * w0);
  const int degree = static_cast<int>(in.p.size() - in.z.size());
  out.k = in.k * std::pow(w0, degree);
  return out;
}

Zpk lp_to_hp(const Zpk& in, double w0) {
  Zpk out;
  for (const cd& z : in.z) out.z.push_back(w0 / z);
  for (const cd& p : in.p) out.p.push_back(w0 / p);
  const int degree = static_cast<int>(in.p.size() - in.z.size());
  for (int i = 0; i < degree; ++i) out.z.emplace_back(0.0, 0.0);
  out.k = in.k * (prod_neg(in.z) / prod_neg(in.p)).real();
  return out;
}

Zpk lp_to_bp(const Zpk& in, double w0, double bw) {
  Zpk out;
  auto transform = [&](const cd& r, std::vector<cd>& dst) {
    const cd t = r * (bw / 2.0);
    const cd disc = std::sqrt(t * t - w0 * w0);
    dst.push_back(t + disc);
    dst.push_back(t - disc);
  };
  for (const cd& z : in.z) transform(z, out.z);
  for (const cd& p : in.p) transform(p, out.p);
  const int degree = static_cast<int>(in.p.size() - in.z.size());
  for (int i = 0; i < degree; ++i) out.z.emplace_back(0.0, 0.0);
  out.k = in.k * std::pow(bw, degree);
  return out;
}

Zpk lp_to_bs(const Zpk& in, double w0, double bw) {
  Zpk out;
  auto transform = [&](const cd& r, std::vector<cd>& dst) {
    const cd t = (bw / 2.0) / r;
    const cd disc = std::sqrt(t * t - w0 * w0);
    dst.push_back(t + disc);
    dst.push_back(t - disc);
  };
  for (const cd& z : in.z) transform(z, out.z);
  for (const cd& p : in.p) transform(p, out.p);
  const int degree = static_cast<int>(in.p.size() - in.z.size());
  for (int i = 0; i < degree; ++i) {
    out.z.emplace_back(0.0, w0);
    out.z.emplace_back(0.0, -w0);
  }
  out.k = in.k * (prod_neg(in.z) / prod_neg(in.p)).real();
  return out;
}

Zpk bilinear(const Zpk& in, double fs) {
  const double fs2 = 2.0 * fs;
  Zpk out;
  cd num(1.0, 0.0), den(1.0, 0.0);
  for (const cd& z : in.z) {
    out.z.push_back((fs2 + z) / (fs2 - z));
    num *= (fs2 - z);
  }
  for (const cd& p : in.p) {
    out.p.push_back((fs2 + p) / (fs2 - p));
    den *= (fs2 - p);
  }
  const int degree = static_cast<int>(in.p.size() - in.z.size());
  for (int i = 0; i < degree; ++i) out.z.emplace_back(-1.0, 0.0);
  out.k = in.k * (num / den).real();
  return out;
}

std::vector<double> poly_from_roots(const std::vector<cd>& roots) {
  std::vector<cd> coeffs{cd(1.0, 0.0)};
  for (const cd& r : roots) {
    std::vector<cd> next(coeffs.size() + 1, cd(0.0, 0.0));
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      next[i] += coeffs[i];
      next[i + 1] -= coeffs[i] * r;
    }
    coeffs = std::move(next);
  }
  std::vector<double> out(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) out[i] = coeffs[i].real();
  return out;
}

// group complex-conjugate pairs (and real roots in pairs), closest to the
// unit circle first, so each biquad stays well conditioned
std::vector<std::pair<cd, cd>> pair_roots(std::vector<cd> roots) {
  std::vector<std::pair<cd, cd>> pairs;
  std::sort(roots.begin(), roots.end(), [](const cd& a, const cd& b) {
    if (std::abs(std::abs(a) - std::abs(b)) > 1e-12) return std::abs(a) > std::abs(b);
    return a.imag() > b.imag();
  });
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    if (std::abs(roots[i].imag()) < 1e-10) {
      // find another real root
      std::size_t j = i + 1;
      while (j < roots.size() && (used[j] || std::abs(roots[j].imag()) >= 1e-10)) ++j;
      if (j < roots.size()) {
        used[j] = true;
        pairs.emplace_back(roots[i], roots[j]);
      } else {
        pairs.emplace_back(roots[i], cd(0.0, 0.0)); // odd leftover, pair with origin "no-op"
      }
    } else {
      // conjugate partner
      std::size_t j = i + 1;
      for (; j < roots.size(); ++j) {
        if (!used[j] && std::abs(roots[j] - std::conj(roots[i])) < 1e-8) break;
      }
      if (j >= roots.size()) fail(ErrorCode::numeric, "unpaired complex root in filter design");
      used[j] = true;
      pairs.emplace_back(roots[i], roots[j]);
    }
  }
  return pairs;
}

std::vector<Biquad> zpk_to_sos(const Zpk& zpk) {
  // deal with odd orders by padding with a root at the origin on both sides
  std::vector<cd> z = zpk.z, p = zpk.p;
  while (z.size() < p.size()) z.emplace_back(0.0, 0.0);
  while (p.size() < z.size()) p.emplace_back(0.0, 0.0);
  if (z.size() % 2 == 1) {
    z.emplace_back(0.0, 0.0);
    p.emplace_back(0.0, 0.0);
  }
  auto zp = pair_roots(z);
  auto pp = pair_roots(p);
  std::vector<Biquad> sos(pp.size());
  for (std::size_t i = 0; i < pp.size(); ++i) {
    const auto [p1, p2] = pp[i];
    const auto [z1, z2] = i < zp.size() ? zp[i] : std::make_pair(cd(0, 0), cd(0, 0));
    Biquad bq;
    bq.b0 = 1.0;
    bq.b1 = -(z1 + z2).real();
    bq.b2 = (z1 * z2).real();
    bq.a1 = -(p1 + p2).real();
    bq.a2 = (p1 * p2).real();
    sos[i] = bq;
  }
  if (!sos.empty()) {
    sos[0].b0 *= zpk.k;
    sos[0].b1 *= zpk.k;
    sos[0].b2 *= zpk.k;
  }
  return sos;
}

} // namespace

FilterKind filter_kind_from_string(const std::string& s) {
  if (s == "lowpass") return FilterKind::lowpass;
  if (s == "highpass") return FilterKind::highpass;
  if (s == "bandpass") return FilterKind::bandpass;
  if (s == "bandstop") return FilterKind::bandstop;
  fail(ErrorCode::invalid_argument, "unknown filter kind '" + s + "'");
}

double FilterSpec::max_pole_magnitude() const {
  double m = 0.0;
  for (const Biquad& s : sos) {
    // roots of z^2 + a1 z + a2
    const cd disc = std::sqrt(cd(s.a1 * s.a1 / 4.0 - s.a2, 0.0));
    m = std::max(m, std::abs(cd(-s.a1 / 2.0, 0.0) + disc));
    m = std::max(m, std::abs(cd(-s.a1 / 2.0, 0.0) - disc));
  }
  return m;
}

FilterSpec design_butterworth(FilterKind kind, int order, const std::vector<double>& cutoffs_hz, double fs) {
  if (!(fs > 0.0)) fail(ErrorCode::invalid_argument, "fs must be positive");
  if (order < 1 || order > 10) fail(ErrorCode::invalid_argument, "filter order must be in [1, 10]");
  const bool band = kind == FilterKind::bandpass || kind == FilterKind::bandstop;
  if (cutoffs_hz.size() != (band ? 2u : 1u))
    fail(ErrorCode::invalid_argument, "wrong number of cutoff frequencies");
  for (double f : cutoffs_hz) {
    if (!(f > 0.0) || !(f < fs / 2.0))
      fail(ErrorCode::invalid_argument,
           "cutoff " + std::to_string(f) + " Hz outside (0, fs/2) at fs=" + std::to_string(fs));
  }
  if (band && !(cutoffs_hz[0] < cutoffs_hz[1]))
    fail(ErrorCode::invalid_argument, "band cutoffs must be increasing");

  auto warp = [&](double f) { return 2.0 * fs * std::tan(std::numbers::pi * f / fs); };

  Zpk analog = butter_prototype(order);
  if (kind == FilterKind::lowpass) {
    analog = lp_to_lp(analog, warp(cutoffs_hz[0]));
  } else if (kind == FilterKind::highpass) {
    analog = lp_to_hp(analog, warp(cutoffs_hz[0]));
  } else {
    const double w1 = warp(cutoffs_hz[0]), w2 = warp(cutoffs_hz[1]);
    const double w0 = std::sqrt(w1 * w2), bw = w2 - w1;
    analog = kind == FilterKind::bandpass ? lp_to_bp(analog, w0, bw) : lp_to_bs(analog, w0, bw);
  }
  const Zpk digital = bilinear(analog, fs);

  FilterSpec spec;
  spec.kind = kind;
  spec.order = order;
  spec.cutoffs_hz = cutoffs_hz;
  spec.fs = fs;
  spec.sos = zpk_to_sos(digital);
  spec.b = poly_from_roots(digital.z);
  for (double& v : spec.b) v *= digital.k;
  spec.a = poly_from_roots(digital.p);

  if (spec.max_pole_magnitude() >= 1.0)
    fail(ErrorCode::numeric, "designed filter is unstable");
  return spec;
}

double magnitude_response(const FilterSpec& spec, double freq_hz) {
  const double w = 2.0 * std::numbers::pi * freq_hz / spec.fs;
  const cd z1 = std::polar(1.0, -w);
  const cd z2 = z1 * z1;
  cd h(1.0, 0.0);
  for (const Biquad& s : spec.sos)
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return std::abs(h);
}

namespace {

// steady-state DF2T state for a unit-amplitude constant input
std::array<double, 2> biquad_zi(const Biquad& s) {
  const double h1 = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  const double w2 = s.b2 - s.a2 * h1;
  const double w1 = s.b1 - s.a1 * h1 + w2;
  return {w1, w2};
}

void sos_filter_inplace(const std::vector<Biquad>& sos, std::vector<double>& x, bool use_zi) {
  for (const Biquad& s : sos) {
    double w1 = 0.0, w2 = 0.0;
    if (use_zi && !x.empty()) {
      const auto zi = biquad_zi(s);
      w1 = zi[0] * x[0];
      w2 = zi[1] * x[0];
    }
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + w1;
      w1 = s.b1 * in - s.a1 * out + w2;
      w2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

} // namespace

std::vector<double> filter_forward(const FilterSpec& spec, const std::vector<double>& x) {
  std::vector<double> y = x;
  sos_filter_inplace(spec.sos, y, false);
  return y;
}

std::vector<double> filter_zero_phase(const FilterSpec& spec, const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  std::size_t padlen = 3 * (2 * spec.sos.size() + 1);
  if (padlen >= n) padlen = n - 1;

  // odd reflection about the end points
  std::vector<double> ext;
  ext.reserve(n + 2 * padlen);
  for (std::size_t i = 0; i < padlen; ++i) ext.push_back(2.0 * x[0] - x[padlen - i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 0; i < padlen; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 2 - i]);

  sos_filter_inplace(spec.sos, ext, true);
  std::reverse(ext.begin(), ext.end());
  sos_filter_inplace(spec.sos, ext, true);
  std::reverse(ext.begin(), ext.end());

  return std::vector<double>(ext.begin() + padlen, ext.begin() + padlen + n);
}

Record apply_filter(const FilterSpec& spec, const Record& rec, bool zero_phase) {
  validate_record(rec);
  if (std::abs(spec.fs - rec.fs) > 1e-9)
    fail(ErrorCode::invalid_argument, "filter designed at different sample rate");
  if (spec.max_pole_magnitude() >= 1.0) fail(ErrorCode::numeric, "unstable filter");
  Record out = rec;
  out.samples = zero_phase ? filter_zero_phase(spec, rec.samples) : filter_forward(spec, rec.samples);
  return out;
}

std::pair<double, double> clamp_band_to_nyquist(double lo_hz, double hi_hz, double fs) {
  double hi = hi_hz;
  if (hi >= fs / 2.0) {
    hi = 0.45 * fs;
    warn("band upper edge " + std::to_string(hi_hz) + " Hz clamped to " + std::to_string(hi) +
         " Hz at fs=" + std::to_string(fs));
  }
  if (lo_hz >= hi) fail(ErrorCode::invalid_argument, "band lower edge above clamped upper edge");
  return {lo_hz, hi};
}

} // namespace fpcg
