#include "eval.hpp"

#include <algorithm>
#include <cmath>

#include "mathutil.hpp"

namespace fpcg {

MatchResult match_detections(const std::vector<double>& label_times,
                             const std::vector<double>& detection_times, double tolerance_s) {
  if (!(tolerance_s > 0.0)) fail(ErrorCode::invalid_argument, "tolerance must be positive");
  std::vector<double> labels = label_times, dets = detection_times;
  std::sort(labels.begin(), labels.end());
  std::sort(dets.begin(), dets.end());
  const std::size_t n = labels.size(), m = dets.size();

  struct Cell {
    int count = 0;
    double dist = 0.0;
    unsigned char step = 0; // 0: skip label, 1: skip detection, 2: match
  };
  std::vector<Cell> dp((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> Cell& { return dp[i * (m + 1) + j]; };

  auto better = [](int c1, double d1, int c2, double d2) {
    if (c1 != c2) return c1 > c2;
    return d1 < d2 - 1e-15;
  };

  for (std::size_t i = 1; i <= n; ++i) at(i, 0) = Cell{0, 0.0, 0};
  for (std::size_t j = 1; j <= m; ++j) at(0, j) = Cell{0, 0.0, 1};
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      Cell best = at(i - 1, j); // skip label i
      best.step = 0;
      const Cell& skip_det = at(i, j - 1);
      if (better(skip_det.count, skip_det.dist, best.count, best.dist)) {
        best = skip_det;
        best.step = 1;
      }
      const double d = std::abs(labels[i - 1] - dets[j - 1]);
      if (d <= tolerance_s) {
        const Cell& prev = at(i - 1, j - 1);
        if (better(prev.count + 1, prev.dist + d, best.count, best.dist)) {
          best.count = prev.count + 1;
          best.dist = prev.dist + d;
          best.step = 2;
        }
      }
      at(i, j) = best;
    }
  }

  MatchResult res;
  res.tolerance_s = tolerance_s;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const Cell& c = at(i, j);
    if (i > 0 && (j == 0 || c.step == 0)) {
      --i;
    } else if (j > 0 && (i == 0 || c.step == 1)) {
      --j;
    } else {
      res.matched_pairs.emplace_back(labels[i - 1], dets[j - 1]);
      --i;
      --j;
    }
  }
  std::reverse(res.matched_pairs.begin(), res.matched_pairs.end());
  res.tp = res.matched_pairs.size();
  res.fp = m - res.tp;
  res.fn = n - res.tp;

  // count identities, checked on every construction
  if (res.tp + res.fn != n || res.tp + res.fp != m)
    fail(ErrorCode::numeric, "matching count identity violated");
  for (const auto& [lt, dt] : res.matched_pairs) {
    if (std::abs(lt - dt) > tolerance_s + 1e-12)
      fail(ErrorCode::numeric, "matched pair outside tolerance");
  }
  return res;
}

Scores scores(const MatchResult& m) {
  Scores s;
  const double tp = static_cast<double>(m.tp);
  if (m.tp + m.fp > 0) s.ppv = tp / static_cast<double>(m.tp + m.fp);
  if (m.tp + m.fn > 0) s.tpr = tp / static_cast<double>(m.tp + m.fn);
  const std::size_t denom = 2 * m.tp + m.fp + m.fn;
  if (denom > 0) s.f1 = 2.0 * tp / static_cast<double>(denom);
  return s;
}

std::optional<MaeStats> mae(const MatchResult& m) {
  if (m.matched_pairs.empty()) return std::nullopt;
  std::vector<double> errs;
  errs.reserve(m.matched_pairs.size());
  for (const auto& [lt, dt] : m.matched_pairs) errs.push_back(std::abs(lt - dt) * 1000.0);
  return MaeStats{mean(errs), stddev_pop(errs)};
}

ToleranceCurve score_vs_tolerance(const std::vector<double>& label_times,
                                  const std::vector<double>& detection_times,
                                  const std::vector<double>& tolerances_s) {
  for (std::size_t i = 1; i < tolerances_s.size(); ++i)
    if (!(tolerances_s[i] > tolerances_s[i - 1]))
      fail(ErrorCode::invalid_argument, "tolerances must be sorted ascending");
  ToleranceCurve curve;
  for (double tol : tolerances_s) {
    const MatchResult m = match_detections(label_times, detection_times, tol);
    const Scores s = scores(m);
    curve.points.push_back(TolerancePoint{tol, s.ppv, s.f1});
    if (s.f1 && *s.f1 > curve.plateau_f1) curve.plateau_f1 = *s.f1;
  }
  curve.rise_tolerance_s = tolerances_s.empty() ? 0.0 : tolerances_s.back();
  for (const auto& p : curve.points) {
    if (p.f1 && *p.f1 >= 0.9 * curve.plateau_f1) {
      curve.rise_tolerance_s = p.tolerance_s;
      break;
    }
  }
  return curve;
}

ErrorRates error_rates(const EventList& labels, const EventList& detections, double tolerance_s) {
  if (!(tolerance_s > 0.0)) fail(ErrorCode::invalid_argument, "tolerance must be positive");
  if (labels.items.empty()) fail(ErrorCode::invalid_argument, "error rates need a non-empty label set");
  const double n_labels = static_cast<double>(labels.items.size());

  std::size_t ins = 0, del = 0, sub = 0;
  for (const Event& lab : labels.items) {
    bool any = false, right_kind = false;
    for (const Event& det : detections.items) {
      if (std::abs(det.t - lab.t) <= tolerance_s) {
        any = true;
        if (det.kind == lab.kind) right_kind = true;
      }
    }
    if (!any)
      ++del;
    else if (!right_kind)
      ++sub;
  }
  for (const Event& det : detections.items) {
    bool inside = false;
    for (const Event& lab : labels.items) {
      if (std::abs(det.t - lab.t) <= tolerance_s) {
        inside = true;
        break;
      }
    }
    if (!inside) ++ins;
  }
  ErrorRates rates;
  rates.ins = ins / n_labels;
  rates.del = del / n_labels;
  rates.sub = sub / n_labels;
  return rates;
}

std::optional<double> fhr_mse(const FhrSeries& est, const FhrSeries& ref) {
  if (!same_grid(est, ref)) fail(ErrorCode::invalid_argument, "FHR series on different window grids");
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (FhrSeries::is_gap(est.bpm[i]) || FhrSeries::is_gap(ref.bpm[i])) continue;
    const double d = est.bpm[i] - ref.bpm[i];
    acc += d * d;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return acc / static_cast<double>(count);
}

FhrErrorStats aggregate_fhr_stats(const std::vector<double>& mse_values) {
  if (mse_values.empty()) fail(ErrorCode::invalid_argument, "no MSE values to aggregate");
  std::vector<double> sorted = mse_values;
  std::sort(sorted.begin(), sorted.end());
  FhrErrorStats st;
  st.count = sorted.size();
  st.mean = mean(sorted);
  st.sd = stddev_pop(sorted);
  st.min = sorted.front();
  st.max = sorted.back();
  st.iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  return st;
}

} // namespace fpcg
