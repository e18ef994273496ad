#ifndef FPCG_EVAL_HPP
#define FPCG_EVAL_HPP

#include <optional>
#include <utility>
#include <vector>

#include "types.hpp"

namespace fpcg {

struct MatchResult {
  double tolerance_s = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
  std::vector<std::pair<double, double>> matched_pairs; // (label_t, detection_t)
};

// Maximum-cardinality one-to-one matching under |label - detection| <=
// tolerance; among maximum matchings the total |dt| is minimal. Points on a
// line admit a non-crossing optimum, solved by DP over the two sorted lists.
MatchResult match_detections(const std::vector<double>& label_times, const std::vector<double>& detection_times,
                             double tolerance_s);

struct Scores {
  std::optional<double> ppv;
  std::optional<double> tpr;
  std::optional<double> f1;
};

Scores scores(const MatchResult& m);

struct MaeStats {
  double mean_ms = 0.0;
  double sd_ms = 0.0; // population SD
};

std::optional<MaeStats> mae(const MatchResult& m);

struct TolerancePoint {
  double tolerance_s = 0.0;
  std::optional<double> ppv;
  std::optional<double> f1;
};

struct ToleranceCurve {
  std::vector<TolerancePoint> points;
  double plateau_f1 = 0.0;    // maximum F1 over the sweep
  double rise_tolerance_s = 0.0; // smallest tolerance reaching 90% of the plateau
};

ToleranceCurve score_vs_tolerance(const std::vector<double>& label_times,
                                  const std::vector<double>& detection_times,
                                  const std::vector<double>& tolerances_s);

struct ErrorRates {
  double ins = 0.0, del = 0.0, sub = 0.0;
  double sum() const { return ins + del + sub; }
};

// Word-error-rate style event taxonomy over both kinds: a label interval with
// no detection is a deletion, with only wrong-kind detections a substitution;
// detections outside every interval are insertions. Rates are fractions of
// the total manual label count.
ErrorRates error_rates(const EventList& labels, const EventList& detections, double tolerance_s);

// Mean squared difference over windows where both series have a value;
// nullopt when they never overlap. Series must share the window grid.
std::optional<double> fhr_mse(const FhrSeries& est, const FhrSeries& ref);

struct FhrErrorStats {
  std::size_t count = 0;
  double mean = 0.0, sd = 0.0, min = 0.0, max = 0.0, iqr = 0.0;
};

FhrErrorStats aggregate_fhr_stats(const std::vector<double>& mse_values);

} // namespace fpcg

#endif
