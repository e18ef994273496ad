#ifndef FPCG_BENCH_HPP
#define FPCG_BENCH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "detect.hpp"
#include "envelogram.hpp"
#include "eval.hpp"
#include "fhr.hpp"
#include "hsmm.hpp"
#include "types.hpp"

namespace fpcg {

enum class Method { teager, rms, heuristic, hsmm, lr_hsmm, kfd };

Method method_from_string(const std::string& s);
const char* to_string(Method m);
bool method_is_trainable(Method m);

// Preprocessing in front of the segmentation models; stored next to the
// trained model so decoding always reproduces the training-time features.
struct SegmenterPreprocess {
  double band_lo_hz = 25.0;
  double band_hi_hz = 400.0; // clamped to 0.45*fs when above Nyquist
  int band_order = 4;
  bool spike_removal = true;
  double spike_window_s = 0.5;
  EnvelogramConfig envelogram;
};

Envelogram preprocess_and_envelogram(const Record& rec, const SegmenterPreprocess& prep);

struct TrainedSegmenter {
  SegmenterPreprocess preprocess;
  HsmmModel model;
};

std::string segmenter_to_json(const TrainedSegmenter& seg);
TrainedSegmenter segmenter_from_json(const std::string& text);
void save_segmenter(const TrainedSegmenter& seg, const std::string& path);
TrainedSegmenter load_segmenter(const std::string& path);

// Method configuration: a named preset overlaid with JSON overrides.
// Presets: "schmidt" (gaussian emissions, wide band), "springer" (logistic,
// wide band), "mueller" (logistic, 15-55 Hz fetal band) for the segmenters;
// detector methods have a single preset each carrying their published
// parameters.
struct MethodConfig {
  Method method = Method::teager;
  std::string preset; // empty = method default
  std::string overrides_json; // empty = none

  TeagerTrackerConfig teager;
  RmsDetectorConfig rms;
  HeuristicConfig heuristic;
  KfdConfig kfd;
  SegmenterPreprocess segmenter_prep;
  HsmmTrainConfig train;
};

MethodConfig make_method_config(Method method, const std::string& preset = "",
                                const std::string& overrides_json = "");

TrainedSegmenter train_segmenter(const std::vector<Record>& records, const std::vector<EventList>& annotations,
                                 const MethodConfig& cfg);

EventList run_detector(const Record& rec, const MethodConfig& cfg, const TrainedSegmenter* segmenter);

// ---- evaluation reports ----

struct KindEval {
  std::size_t tp = 0, fp = 0, fn = 0;
  Scores score;
  std::optional<MaeStats> mae_stats;
  std::vector<std::pair<double, double>> pairs; // for pooling
};

struct RecordEval {
  std::string id;
  std::size_t n_labels = 0;
  std::optional<KindEval> s1, s2;
  std::optional<ErrorRates> rates;
  std::optional<double> fhr_mse_value;
};

struct AggregateEval {
  std::optional<KindEval> s1, s2;
  std::optional<ErrorRates> rates;
  std::optional<FhrErrorStats> fhr_stats;
};

struct EvalReport {
  std::string method;
  double tolerance_ms = 30.0;
  std::vector<RecordEval> records;
  AggregateEval aggregate;
};

RecordEval evaluate_record(const EventList& labels, const EventList& detections, double duration_s,
                           double tolerance_s, const FhrFromLabelsConfig& fhr_cfg = {});

EvalReport assemble_report(const std::string& method, double tolerance_s, std::vector<RecordEval> records);

std::string report_to_json(const EvalReport& report);

// Pooled Score-vs-Tolerance over many records: TP/FP/FN are summed per
// tolerance before the scores are formed.
ToleranceCurve pooled_score_vs_tolerance(const std::vector<std::vector<double>>& labels_per_record,
                                         const std::vector<std::vector<double>>& dets_per_record,
                                         const std::vector<double>& tolerances_s);

std::string tolerance_curve_csv(const ToleranceCurve& curve);

// ---- cross validation ----

struct CrossValFold {
  std::vector<std::size_t> test_indices;
};

// Deterministic seeded partition into k folds of near-equal size.
std::vector<CrossValFold> make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

struct CrossValReport {
  EvalReport overall;                       // every record scored once as test
  std::vector<std::vector<std::size_t>> folds;
};

CrossValReport kfold_cross_validate(const std::vector<Record>& records,
                                    const std::vector<EventList>& annotations, std::size_t k,
                                    const MethodConfig& cfg, double tolerance_s, std::uint64_t seed);

std::string crossval_report_to_json(const CrossValReport& report);

} // namespace fpcg

#endif
