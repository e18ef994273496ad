#include "bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "filter.hpp"
#include "mathutil.hpp"
#include "rng.hpp"
#include "spike.hpp"

namespace fpcg {

Method method_from_string(const std::string& s) {
  if (s == "teager") return Method::teager;
  if (s == "rms") return Method::rms;
  if (s == "heuristic") return Method::heuristic;
  if (s == "hsmm") return Method::hsmm;
  if (s == "lr-hsmm") return Method::lr_hsmm;
  if (s == "kfd") return Method::kfd;
  fail(ErrorCode::invalid_argument, "unknown method '" + s + "'");
}

const char* to_string(Method m) {
  switch (m) {
    case Method::teager: return "teager";
    case Method::rms: return "rms";
    case Method::heuristic: return "heuristic";
    case Method::hsmm: return "hsmm";
    case Method::lr_hsmm: return "lr-hsmm";
    case Method::kfd: return "kfd";
  }
  return "?";
}

bool method_is_trainable(Method m) { return m == Method::hsmm || m == Method::lr_hsmm; }

Envelogram preprocess_and_envelogram(const Record& rec, const SegmenterPreprocess& prep) {
  const auto [lo, hi] = clamp_band_to_nyquist(prep.band_lo_hz, prep.band_hi_hz, rec.fs);
  const FilterSpec bp = design_butterworth(FilterKind::bandpass, prep.band_order, {lo, hi}, rec.fs);
  Record filtered = apply_filter(bp, rec, true);
  if (prep.spike_removal) filtered = remove_spikes(filtered, prep.spike_window_s);
  return compute_envelogram(filtered, prep.envelogram);
}

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json prep_to_json(const SegmenterPreprocess& p) {
  ordered_json j;
  j["band_lo_hz"] = p.band_lo_hz;
  j["band_hi_hz"] = p.band_hi_hz;
  j["band_order"] = p.band_order;
  j["spike_removal"] = p.spike_removal;
  j["spike_window_s"] = p.spike_window_s;
  j["feature_rate"] = p.envelogram.feature_rate;
  j["homomorphic_lpf_hz"] = p.envelogram.homomorphic_lpf_hz;
  j["psd_band_lo_hz"] = p.envelogram.psd_band_lo_hz;
  j["psd_band_hi_hz"] = p.envelogram.psd_band_hi_hz;
  j["psd_frame_s"] = p.envelogram.psd_frame_s;
  j["dwt_level"] = p.envelogram.dwt_level;
  j["dwt_target_hz"] = p.envelogram.dwt_target_hz;
  return j;
}

SegmenterPreprocess prep_from_json(const json& j, SegmenterPreprocess p = {}) {
  if (j.contains("band_lo_hz")) p.band_lo_hz = j.at("band_lo_hz").get<double>();
  if (j.contains("band_hi_hz")) p.band_hi_hz = j.at("band_hi_hz").get<double>();
  if (j.contains("band_order")) p.band_order = j.at("band_order").get<int>();
  if (j.contains("spike_removal")) p.spike_removal = j.at("spike_removal").get<bool>();
  if (j.contains("spike_window_s")) p.spike_window_s = j.at("spike_window_s").get<double>();
  if (j.contains("feature_rate")) p.envelogram.feature_rate = j.at("feature_rate").get<double>();
  if (j.contains("homomorphic_lpf_hz")) p.envelogram.homomorphic_lpf_hz = j.at("homomorphic_lpf_hz").get<double>();
  if (j.contains("psd_band_lo_hz")) p.envelogram.psd_band_lo_hz = j.at("psd_band_lo_hz").get<double>();
  if (j.contains("psd_band_hi_hz")) p.envelogram.psd_band_hi_hz = j.at("psd_band_hi_hz").get<double>();
  if (j.contains("psd_frame_s")) p.envelogram.psd_frame_s = j.at("psd_frame_s").get<double>();
  if (j.contains("dwt_level")) p.envelogram.dwt_level = j.at("dwt_level").get<int>();
  if (j.contains("dwt_target_hz")) p.envelogram.dwt_target_hz = j.at("dwt_target_hz").get<double>();
  return p;
}

} // namespace

std::string segmenter_to_json(const TrainedSegmenter& seg) {
  ordered_json j;
  j["schema_version"] = 1;
  j["preprocess"] = prep_to_json(seg.preprocess);
  j["model"] = ordered_json::parse(model_to_json(seg.model));
  return j.dump(2);
}

TrainedSegmenter segmenter_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::format, std::string("segmenter JSON: ") + e.what());
  }
  TrainedSegmenter seg;
  seg.preprocess = prep_from_json(j.at("preprocess"));
  seg.model = model_from_json(j.at("model").dump());
  return seg;
}

void save_segmenter(const TrainedSegmenter& seg, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::io, "cannot write model file: " + path);
  os << segmenter_to_json(seg) << '\n';
}

TrainedSegmenter load_segmenter(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::io, "cannot open model file: " + path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return segmenter_from_json(text);
}

namespace {

void apply_preset(MethodConfig& cfg, const std::string& preset) {
  if (preset.empty()) {
    // method defaults double as presets
    if (cfg.method == Method::hsmm) return apply_preset(cfg, "schmidt");
    if (cfg.method == Method::lr_hsmm) return apply_preset(cfg, "mueller");
    return;
  }
  if (preset == "cesarelli" && cfg.method == Method::teager) return;
  if (preset == "chen" && cfg.method == Method::rms) return;
  if (preset == "balogh" && cfg.method == Method::heuristic) return;
  if (preset == "koutsiana" && cfg.method == Method::kfd) return;
  if (preset == "schmidt" && (cfg.method == Method::hsmm || cfg.method == Method::lr_hsmm)) {
    cfg.segmenter_prep.band_lo_hz = 25.0;
    cfg.segmenter_prep.band_hi_hz = 400.0;
    cfg.train.emission = cfg.method == Method::hsmm ? EmissionKind::gaussian : EmissionKind::logistic;
    return;
  }
  if (preset == "springer" && (cfg.method == Method::hsmm || cfg.method == Method::lr_hsmm)) {
    cfg.segmenter_prep.band_lo_hz = 25.0;
    cfg.segmenter_prep.band_hi_hz = 400.0;
    cfg.train.emission = EmissionKind::logistic;
    return;
  }
  if (preset == "mueller" && (cfg.method == Method::hsmm || cfg.method == Method::lr_hsmm)) {
    cfg.segmenter_prep.band_lo_hz = 15.0;
    cfg.segmenter_prep.band_hi_hz = 55.0;
    cfg.train.emission = EmissionKind::logistic;
    cfg.train.expected_hr_lo = 80.0;
    cfg.train.expected_hr_hi = 210.0;
    return;
  }
  fail(ErrorCode::invalid_argument, "unknown preset '" + preset + "' for method " + to_string(cfg.method));
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_overrides(MethodConfig& cfg, const std::string& overrides_json) {
  if (overrides_json.empty()) return;
  json j;
  try {
    j = json::parse(overrides_json);
  } catch (const std::exception& e) {
    fail(ErrorCode::format, std::string("method config: invalid JSON: ") + e.what());
  }
  switch (cfg.method) {
    case Method::teager:
      maybe(j, "band_lo_hz", cfg.teager.band_lo_hz);
      maybe(j, "band_hi_hz", cfg.teager.band_hi_hz);
      maybe(j, "band_order", cfg.teager.band_order);
      maybe(j, "train_s", cfg.teager.train_s);
      maybe(j, "window_frac", cfg.teager.window_frac);
      maybe(j, "history", cfg.teager.history);
      maybe(j, "smooth_s", cfg.teager.smooth_s);
      maybe(j, "hr_lo_bpm", cfg.teager.hr_lo_bpm);
      maybe(j, "hr_hi_bpm", cfg.teager.hr_hi_bpm);
      break;
    case Method::rms:
      maybe(j, "lp_hz", cfg.rms.lp_hz);
      maybe(j, "hp_hz", cfg.rms.hp_hz);
      maybe(j, "order", cfg.rms.order);
      maybe(j, "rms_window_s", cfg.rms.rms_window_s);
      maybe(j, "merge_gap_s", cfg.rms.merge_gap_s);
      maybe(j, "threshold_frac", cfg.rms.threshold_frac);
      maybe(j, "threshold_pctl", cfg.rms.threshold_pctl);
      maybe(j, "hr_lo_bpm", cfg.rms.hr_lo_bpm);
      maybe(j, "hr_hi_bpm", cfg.rms.hr_hi_bpm);
      maybe(j, "prominence_window_s", cfg.rms.prominence_window_s);
      maybe(j, "regularity_frac", cfg.rms.regularity_frac);
      maybe(j, "regularity_history", cfg.rms.regularity_history);
      break;
    case Method::heuristic:
      maybe(j, "long_window_s", cfg.heuristic.long_window_s);
      maybe(j, "short_window_s", cfg.heuristic.short_window_s);
      maybe(j, "min_region_s", cfg.heuristic.min_region_s);
      break;
    case Method::kfd:
      maybe(j, "max_level", cfg.kfd.max_level);
      maybe(j, "select_p", cfg.kfd.select_p);
      maybe(j, "window_s", cfg.kfd.window_s);
      maybe(j, "hop_s", cfg.kfd.hop_s);
      maybe(j, "epsilon", cfg.kfd.epsilon);
      maybe(j, "max_iter", cfg.kfd.max_iter);
      maybe(j, "min_region_s", cfg.kfd.min_region_s);
      break;
    case Method::hsmm:
    case Method::lr_hsmm: {
      cfg.segmenter_prep = prep_from_json(j, cfg.segmenter_prep);
      maybe(j, "s1_expand_s", cfg.train.s1_expand_s);
      maybe(j, "s2_expand_s", cfg.train.s2_expand_s);
      maybe(j, "cov_regularization", cfg.train.cov_regularization);
      maybe(j, "logistic_l2", cfg.train.logistic_l2);
      maybe(j, "logistic_tol", cfg.train.logistic_tol);
      maybe(j, "logistic_max_iter", cfg.train.logistic_max_iter);
      maybe(j, "expected_hr_lo", cfg.train.expected_hr_lo);
      maybe(j, "expected_hr_hi", cfg.train.expected_hr_hi);
      break;
    }
  }
}

} // namespace

MethodConfig make_method_config(Method method, const std::string& preset, const std::string& overrides_json) {
  MethodConfig cfg;
  cfg.method = method;
  cfg.preset = preset;
  cfg.overrides_json = overrides_json;
  cfg.train.kind = ModelKind::hsmm;
  cfg.train.emission = method == Method::hsmm ? EmissionKind::gaussian : EmissionKind::logistic;
  apply_preset(cfg, preset);
  apply_overrides(cfg, overrides_json);
  return cfg;
}

TrainedSegmenter train_segmenter(const std::vector<Record>& records, const std::vector<EventList>& annotations,
                                 const MethodConfig& cfg) {
  if (!method_is_trainable(cfg.method))
    fail(ErrorCode::invalid_argument, std::string("method ") + to_string(cfg.method) + " is not trainable");
  if (records.size() != annotations.size())
    fail(ErrorCode::invalid_argument, "records/annotations size mismatch");
  std::vector<Envelogram> envs;
  envs.reserve(records.size());
  for (const Record& rec : records) envs.push_back(preprocess_and_envelogram(rec, cfg.segmenter_prep));
  TrainedSegmenter seg;
  seg.preprocess = cfg.segmenter_prep;
  seg.model = train_hsmm(envs, annotations, cfg.train);
  return seg;
}

EventList run_detector(const Record& rec, const MethodConfig& cfg, const TrainedSegmenter* segmenter) {
  switch (cfg.method) {
    case Method::teager: return detect_teager_tracker(rec, cfg.teager);
    case Method::rms: return detect_rms_threshold(rec, cfg.rms);
    case Method::heuristic: return detect_heuristic_intensity(rec, cfg.heuristic);
    case Method::kfd: return detect_kfd_peakpeel(rec, cfg.kfd);
    case Method::hsmm:
    case Method::lr_hsmm: {
      if (segmenter == nullptr)
        fail(ErrorCode::invalid_argument, std::string(to_string(cfg.method)) +
                                              " needs a trained model (or a training manifest)");
      const Envelogram env = preprocess_and_envelogram(rec, segmenter->preprocess);
      const StateSequence seq = extended_viterbi(segmenter->model, env);
      return states_to_detections(seq, rec.id, to_string(cfg.method));
    }
  }
  fail(ErrorCode::invalid_argument, "bad method");
}

RecordEval evaluate_record(const EventList& labels, const EventList& detections, double duration_s,
                           double tolerance_s, const FhrFromLabelsConfig& fhr_cfg) {
  RecordEval ev;
  ev.id = labels.record_id;
  ev.n_labels = labels.items.size();

  for (SoundKind kind : {SoundKind::S1, SoundKind::S2}) {
    const std::vector<double> lab = labels.times_of(kind);
    const std::vector<double> det = detections.times_of(kind);
    if (lab.empty() && det.empty()) continue;
    const MatchResult m = match_detections(lab, det, tolerance_s);
    KindEval ke;
    ke.tp = m.tp;
    ke.fp = m.fp;
    ke.fn = m.fn;
    ke.score = scores(m);
    ke.mae_stats = mae(m);
    ke.pairs = m.matched_pairs;
    if (kind == SoundKind::S1)
      ev.s1 = std::move(ke);
    else
      ev.s2 = std::move(ke);
  }

  if (!labels.items.empty()) ev.rates = error_rates(labels, detections, tolerance_s);

  const std::vector<double> lab_s1 = labels.times_of(SoundKind::S1);
  if (!lab_s1.empty()) {
    const FhrSeries ref = fhr_from_events(lab_s1, duration_s, fhr_cfg);
    const FhrSeries est = fhr_from_events(detections.times_of(SoundKind::S1), duration_s, fhr_cfg);
    ev.fhr_mse_value = fhr_mse(est, ref);
  }
  return ev;
}

namespace {

KindEval pool_kind(const std::vector<const KindEval*>& parts) {
  KindEval out;
  std::vector<double> errs;
  for (const KindEval* p : parts) {
    out.tp += p->tp;
    out.fp += p->fp;
    out.fn += p->fn;
    for (const auto& pr : p->pairs) {
      out.pairs.push_back(pr);
      errs.push_back(std::abs(pr.first - pr.second) * 1000.0);
    }
  }
  MatchResult m;
  m.tp = out.tp;
  m.fp = out.fp;
  m.fn = out.fn;
  out.score = scores(m);
  if (!errs.empty()) out.mae_stats = MaeStats{mean(errs), stddev_pop(errs)};
  return out;
}

ordered_json kind_to_json(const KindEval& k) {
  ordered_json j;
  j["tp"] = k.tp;
  j["fp"] = k.fp;
  j["fn"] = k.fn;
  j["ppv"] = k.score.ppv ? ordered_json(*k.score.ppv) : ordered_json(nullptr);
  j["tpr"] = k.score.tpr ? ordered_json(*k.score.tpr) : ordered_json(nullptr);
  j["f1"] = k.score.f1 ? ordered_json(*k.score.f1) : ordered_json(nullptr);
  if (k.mae_stats) {
    j["mae_ms"] = k.mae_stats->mean_ms;
    j["mae_sd_ms"] = k.mae_stats->sd_ms;
  } else {
    j["mae_ms"] = nullptr;
    j["mae_sd_ms"] = nullptr;
  }
  return j;
}

ordered_json rates_to_json(const ErrorRates& r) {
  ordered_json j;
  j["ins"] = r.ins;
  j["del"] = r.del;
  j["sub"] = r.sub;
  j["sum"] = r.sum();
  return j;
}

} // namespace

EvalReport assemble_report(const std::string& method, double tolerance_s, std::vector<RecordEval> records) {
  EvalReport rep;
  rep.method = method;
  rep.tolerance_ms = tolerance_s * 1000.0;
  rep.records = std::move(records);

  std::vector<const KindEval*> s1_parts, s2_parts;
  double ins_count = 0.0, del_count = 0.0, sub_count = 0.0;
  double label_total = 0.0;
  bool any_rates = false;
  std::vector<double> mses;
  for (const RecordEval& ev : rep.records) {
    if (ev.s1) s1_parts.push_back(&*ev.s1);
    if (ev.s2) s2_parts.push_back(&*ev.s2);
    if (ev.rates && ev.n_labels > 0) {
      any_rates = true;
      ins_count += ev.rates->ins * static_cast<double>(ev.n_labels);
      del_count += ev.rates->del * static_cast<double>(ev.n_labels);
      sub_count += ev.rates->sub * static_cast<double>(ev.n_labels);
      label_total += static_cast<double>(ev.n_labels);
    }
    if (ev.fhr_mse_value) mses.push_back(*ev.fhr_mse_value);
  }
  if (!s1_parts.empty()) rep.aggregate.s1 = pool_kind(s1_parts);
  if (!s2_parts.empty()) rep.aggregate.s2 = pool_kind(s2_parts);
  if (any_rates && label_total > 0.0) {
    ErrorRates r;
    r.ins = ins_count / label_total;
    r.del = del_count / label_total;
    r.sub = sub_count / label_total;
    rep.aggregate.rates = r;
  }
  if (!mses.empty()) rep.aggregate.fhr_stats = aggregate_fhr_stats(mses);
  return rep;
}

std::string report_to_json(const EvalReport& report) {
  ordered_json j;
  j["schema_version"] = 1;
  j["method"] = report.method;
  j["tolerance_ms"] = report.tolerance_ms;
  j["tolerance_semantics"] = "plus_minus"; // interval is [label - tol, label + tol]
  j["sd_convention"] = "population";
  j["records"] = ordered_json::array();
  for (const RecordEval& ev : report.records) {
    ordered_json r;
    r["id"] = ev.id;
    r["n_labels"] = ev.n_labels;
    r["s1"] = ev.s1 ? kind_to_json(*ev.s1) : ordered_json(nullptr);
    r["s2"] = ev.s2 ? kind_to_json(*ev.s2) : ordered_json(nullptr);
    r["error_rates"] = ev.rates ? rates_to_json(*ev.rates) : ordered_json(nullptr);
    r["fhr_mse"] = ev.fhr_mse_value ? ordered_json(*ev.fhr_mse_value) : ordered_json(nullptr);
    j["records"].push_back(r);
  }
  ordered_json agg;
  agg["s1"] = report.aggregate.s1 ? kind_to_json(*report.aggregate.s1) : ordered_json(nullptr);
  agg["s2"] = report.aggregate.s2 ? kind_to_json(*report.aggregate.s2) : ordered_json(nullptr);
  agg["error_rates"] = report.aggregate.rates ? rates_to_json(*report.aggregate.rates) : ordered_json(nullptr);
  if (report.aggregate.fhr_stats) {
    const FhrErrorStats& st = *report.aggregate.fhr_stats;
    agg["fhr_mse"] = {{"count", st.count}, {"mean", st.mean}, {"sd", st.sd},
                      {"min", st.min},     {"max", st.max},   {"iqr", st.iqr}};
  } else {
    agg["fhr_mse"] = nullptr;
  }
  j["aggregate"] = agg;
  return j.dump(2);
}

ToleranceCurve pooled_score_vs_tolerance(const std::vector<std::vector<double>>& labels_per_record,
                                         const std::vector<std::vector<double>>& dets_per_record,
                                         const std::vector<double>& tolerances_s) {
  if (labels_per_record.size() != dets_per_record.size())
    fail(ErrorCode::invalid_argument, "labels/detections record count mismatch");
  ToleranceCurve curve;
  for (double tol : tolerances_s) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t r = 0; r < labels_per_record.size(); ++r) {
      const MatchResult m = match_detections(labels_per_record[r], dets_per_record[r], tol);
      tp += m.tp;
      fp += m.fp;
      fn += m.fn;
    }
    MatchResult pooled;
    pooled.tp = tp;
    pooled.fp = fp;
    pooled.fn = fn;
    const Scores s = scores(pooled);
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

std::string tolerance_curve_csv(const ToleranceCurve& curve) {
  std::string out = "tolerance_ms,ppv,f1\n";
  char buf[128];
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%.3f,", p.tolerance_s * 1000.0);
    out += buf;
    if (p.ppv) {
      std::snprintf(buf, sizeof buf, "%.6f", *p.ppv);
      out += buf;
    }
    out += ',';
    if (p.f1) {
      std::snprintf(buf, sizeof buf, "%.6f", *p.f1);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::vector<CrossValFold> make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) fail(ErrorCode::invalid_argument, "fold count must be in [2, dataset size]");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0xF01D));
  for (std::size_t i = n; i > 1; --i) { // Fisher-Yates, implementation independent
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  std::vector<CrossValFold> folds(k);
  for (std::size_t i = 0; i < n; ++i) folds[i % k].test_indices.push_back(order[i]);
  for (auto& f : folds) std::sort(f.test_indices.begin(), f.test_indices.end());
  return folds;
}

CrossValReport kfold_cross_validate(const std::vector<Record>& records,
                                    const std::vector<EventList>& annotations, std::size_t k,
                                    const MethodConfig& cfg, double tolerance_s, std::uint64_t seed) {
  if (records.size() != annotations.size())
    fail(ErrorCode::invalid_argument, "records/annotations size mismatch");
  if (records.size() < k) fail(ErrorCode::invalid_argument, "dataset smaller than fold count");
  if (!method_is_trainable(cfg.method))
    fail(ErrorCode::invalid_argument, "cross validation needs a trainable method");

  const std::vector<CrossValFold> folds = make_folds(records.size(), k, seed);
  std::vector<RecordEval> evals(records.size());
  for (const CrossValFold& fold : folds) {
    std::vector<Record> train_recs;
    std::vector<EventList> train_annots;
    std::vector<bool> is_test(records.size(), false);
    for (std::size_t idx : fold.test_indices) is_test[idx] = true;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!is_test[i]) {
        train_recs.push_back(records[i]);
        train_annots.push_back(annotations[i]);
      }
    }
    const TrainedSegmenter seg = train_segmenter(train_recs, train_annots, cfg);
    for (std::size_t idx : fold.test_indices) {
      const EventList dets = run_detector(records[idx], cfg, &seg);
      evals[idx] = evaluate_record(annotations[idx], dets, records[idx].duration_s(), tolerance_s);
    }
  }

  CrossValReport out;
  out.overall = assemble_report(to_string(cfg.method), tolerance_s, std::move(evals));
  for (const CrossValFold& f : folds) out.folds.push_back(f.test_indices);
  return out;
}

std::string crossval_report_to_json(const CrossValReport& report) {
  ordered_json j = ordered_json::parse(report_to_json(report.overall));
  ordered_json folds = ordered_json::array();
  for (const auto& f : report.folds) folds.push_back(f);
  j["folds"] = folds;
  return j.dump(2);
}

} // namespace fpcg
