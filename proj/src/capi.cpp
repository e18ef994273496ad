#include "fpcg.h"

#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "fpcg/bench.hpp"
#include "fpcg/csvio.hpp"
#include "fpcg/envelope.hpp"
#include "fpcg/fhr.hpp"
#include "fpcg/resample.hpp"
#include "fpcg/synth.hpp"
#include "fpcg/wav.hpp"
#include "fpcg/wavelet.hpp"

using namespace fpcg;

struct fpcg_record {
  Record rec;
};
struct fpcg_events {
  EventList events;
};
struct fpcg_fhr_series {
  FhrSeries series;
};
struct fpcg_model {
  TrainedSegmenter seg;
};

namespace {

thread_local std::string t_last_error;

fpcg_status to_status(const Error& e) {
  switch (e.code()) {
    case ErrorCode::invalid_argument: return FPCG_ERR_INVALID;
    case ErrorCode::io: return FPCG_ERR_IO;
    case ErrorCode::format: return FPCG_ERR_FORMAT;
    case ErrorCode::numeric: return FPCG_ERR_NUMERIC;
    case ErrorCode::not_found: return FPCG_ERR_IO;
  }
  return FPCG_ERR_UNKNOWN;
}

template <typename F>
fpcg_status guarded(F&& fn) {
  try {
    fn();
    return FPCG_OK;
  } catch (const Error& e) {
    t_last_error = e.what();
    return to_status(e);
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return FPCG_ERR_UNKNOWN;
  } catch (...) {
    t_last_error = "unknown error";
    return FPCG_ERR_UNKNOWN;
  }
}

fpcg_status invalid(const char* msg) {
  t_last_error = msg;
  return FPCG_ERR_INVALID;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

} // namespace

extern "C" {

const char* fpcg_version(void) { return "0.1.0"; }

const char* fpcg_last_error(void) { return t_last_error.c_str(); }

/* ---- records ---- */

fpcg_status fpcg_record_load_wav(const char* path, fpcg_record** out) {
  if (path == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] { *out = new fpcg_record{load_wav(path)}; });
}

fpcg_status fpcg_record_save_wav(const fpcg_record* rec, const char* path, int bits_per_sample) {
  if (rec == nullptr || path == nullptr) return invalid("null argument");
  return guarded([&] { save_wav(rec->rec, path, bits_per_sample); });
}

fpcg_status fpcg_record_create(const char* id, const double* samples, size_t n, double fs,
                               fpcg_record** out) {
  if (id == nullptr || samples == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    *out = new fpcg_record{make_record(id, std::vector<double>(samples, samples + n), fs, Source::file)};
  });
}

double fpcg_record_fs(const fpcg_record* rec) { return rec != nullptr ? rec->rec.fs : 0.0; }

size_t fpcg_record_size(const fpcg_record* rec) { return rec != nullptr ? rec->rec.samples.size() : 0; }

const char* fpcg_record_id(const fpcg_record* rec) { return rec != nullptr ? rec->rec.id.c_str() : ""; }

fpcg_status fpcg_record_samples(const fpcg_record* rec, double* buf, size_t bufcap) {
  if (rec == nullptr || buf == nullptr) return invalid("null argument");
  if (bufcap < rec->rec.samples.size()) return invalid("buffer too small");
  std::memcpy(buf, rec->rec.samples.data(), rec->rec.samples.size() * sizeof(double));
  return FPCG_OK;
}

fpcg_status fpcg_record_resample(const fpcg_record* rec, double target_fs, fpcg_record** out) {
  if (rec == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] { *out = new fpcg_record{resample(rec->rec, target_fs)}; });
}

void fpcg_record_free(fpcg_record* rec) { delete rec; }

/* ---- events ---- */

fpcg_status fpcg_events_load_annotations(const char* path, fpcg_events** out) {
  if (path == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] { *out = new fpcg_events{load_annotations_csv(path)}; });
}

fpcg_status fpcg_events_load_detections(const char* path, fpcg_events** out) {
  if (path == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] { *out = new fpcg_events{load_detections_csv(path)}; });
}

fpcg_status fpcg_events_save_csv(const fpcg_events* events, const char* path) {
  if (events == nullptr || path == nullptr) return invalid("null argument");
  return guarded([&] { save_events_csv(events->events, path); });
}

fpcg_status fpcg_events_create(const double* times_s, const int* kinds, size_t n, fpcg_events** out) {
  if (times_s == nullptr || kinds == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    std::vector<Event> items(n);
    for (size_t i = 0; i < n; ++i) {
      if (kinds[i] != FPCG_S1 && kinds[i] != FPCG_S2) fail(ErrorCode::invalid_argument, "bad kind value");
      items[i] = Event{times_s[i], kinds[i] == FPCG_S1 ? SoundKind::S1 : SoundKind::S2};
    }
    *out = new fpcg_events{make_detections("", "", std::move(items))};
  });
}

size_t fpcg_events_size(const fpcg_events* events) {
  return events != nullptr ? events->events.items.size() : 0;
}

fpcg_status fpcg_events_get(const fpcg_events* events, size_t index, double* t_s, int* kind) {
  if (events == nullptr || t_s == nullptr || kind == nullptr) return invalid("null argument");
  if (index >= events->events.items.size()) return invalid("index out of range");
  *t_s = events->events.items[index].t;
  *kind = events->events.items[index].kind == SoundKind::S1 ? FPCG_S1 : FPCG_S2;
  return FPCG_OK;
}

void fpcg_events_free(fpcg_events* events) { delete events; }

/* ---- simulation ---- */

fpcg_status fpcg_simulate(const char* config_json, fpcg_record** rec, fpcg_events** annotations,
                          fpcg_fhr_series** truth_fhr, char** meta_json) {
  if (config_json == nullptr) return invalid("null config");
  return guarded([&] {
    const SimConfig cfg = sim_config_from_json(config_json);
    SimResult res = simulate_record(cfg);
    if (meta_json != nullptr) *meta_json = dup_string(sim_metadata_json(cfg, res));
    if (rec != nullptr) *rec = new fpcg_record{std::move(res.record)};
    if (annotations != nullptr) *annotations = new fpcg_events{std::move(res.annotations)};
    if (truth_fhr != nullptr) *truth_fhr = new fpcg_fhr_series{std::move(res.truth_fhr)};
  });
}

/* ---- detection ---- */

fpcg_status fpcg_detect(const fpcg_record* rec, const char* method, const char* preset,
                        const char* config_json, const fpcg_model* model, fpcg_events** out) {
  if (rec == nullptr || method == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    const MethodConfig cfg = make_method_config(method_from_string(method), preset ? preset : "",
                                                config_json ? config_json : "");
    *out = new fpcg_events{run_detector(rec->rec, cfg, model ? &model->seg : nullptr)};
  });
}

/* ---- models ---- */

fpcg_status fpcg_train(const fpcg_record* const* recs, const fpcg_events* const* annotations, size_t n,
                       const char* method, const char* preset, const char* config_json, fpcg_model** out) {
  if (recs == nullptr || annotations == nullptr || method == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    const MethodConfig cfg = make_method_config(method_from_string(method), preset ? preset : "",
                                                config_json ? config_json : "");
    std::vector<Record> rs;
    std::vector<EventList> as;
    for (size_t i = 0; i < n; ++i) {
      if (recs[i] == nullptr || annotations[i] == nullptr) fail(ErrorCode::invalid_argument, "null entry");
      rs.push_back(recs[i]->rec);
      as.push_back(annotations[i]->events);
    }
    *out = new fpcg_model{train_segmenter(rs, as, cfg)};
  });
}

fpcg_status fpcg_model_save(const fpcg_model* model, const char* path) {
  if (model == nullptr || path == nullptr) return invalid("null argument");
  return guarded([&] { save_segmenter(model->seg, path); });
}

fpcg_status fpcg_model_load(const char* path, fpcg_model** out) {
  if (path == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] { *out = new fpcg_model{load_segmenter(path)}; });
}

void fpcg_model_free(fpcg_model* model) { delete model; }

/* ---- heart-rate series ---- */

namespace {

FhrFromLabelsConfig labels_cfg_from_json(const char* config_json) {
  FhrFromLabelsConfig cfg;
  if (config_json == nullptr || config_json[0] == '\0') return cfg;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_json);
  } catch (const std::exception& e) {
    fail(ErrorCode::format, std::string("fhr config: ") + e.what());
  }
  if (j.contains("window_s")) cfg.window_s = j.at("window_s").get<double>();
  if (j.contains("overlap")) cfg.overlap = j.at("overlap").get<double>();
  if (j.contains("hr_lo_bpm")) cfg.hr_lo_bpm = j.at("hr_lo_bpm").get<double>();
  if (j.contains("hr_hi_bpm")) cfg.hr_hi_bpm = j.at("hr_hi_bpm").get<double>();
  return cfg;
}

} // namespace

fpcg_status fpcg_fhr_from_events(const fpcg_events* events, double duration_s, const char* config_json,
                                 fpcg_fhr_series** out) {
  if (events == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    const FhrFromLabelsConfig cfg = labels_cfg_from_json(config_json);
    *out = new fpcg_fhr_series{
        fhr_from_events(events->events.times_of(SoundKind::S1), duration_s, cfg)};
  });
}

fpcg_status fpcg_fhr_estimate(const fpcg_record* rec, const char* method, const char* config_json,
                              fpcg_fhr_series** out) {
  if (rec == nullptr || method == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    const std::string m = method;
    nlohmann::json j = nlohmann::json::object();
    if (config_json != nullptr && config_json[0] != '\0') {
      try {
        j = nlohmann::json::parse(config_json);
      } catch (const std::exception& e) {
        fail(ErrorCode::format, std::string("fhr config: ") + e.what());
      }
    }
    if (m == "tang") {
      TangConfig cfg;
      if (j.contains("window_s")) cfg.window_s = j.at("window_s").get<double>();
      if (j.contains("overlap")) cfg.overlap = j.at("overlap").get<double>();
      if (j.contains("hr_lo_bpm")) cfg.hr_lo_bpm = j.at("hr_lo_bpm").get<double>();
      if (j.contains("hr_hi_bpm")) cfg.hr_hi_bpm = j.at("hr_hi_bpm").get<double>();
      if (j.contains("grid_bpm")) cfg.grid_bpm = j.at("grid_bpm").get<double>();
      *out = new fpcg_fhr_series{fhr_tang_cyclic(rec->rec, cfg)};
    } else if (m == "zahorian") {
      ZahorianConfig cfg;
      if (j.contains("band_lo_hz")) cfg.band_lo_hz = j.at("band_lo_hz").get<double>();
      if (j.contains("band_hi_hz")) cfg.band_hi_hz = j.at("band_hi_hz").get<double>();
      if (j.contains("frame_s")) cfg.frame_s = j.at("frame_s").get<double>();
      if (j.contains("hr_lo_bpm")) cfg.hr_lo_bpm = j.at("hr_lo_bpm").get<double>();
      if (j.contains("hr_hi_bpm")) cfg.hr_hi_bpm = j.at("hr_hi_bpm").get<double>();
      if (j.contains("template_freq_hz")) cfg.template_freq_hz = j.at("template_freq_hz").get<double>();
      if (j.contains("template_width_s")) cfg.template_width_s = j.at("template_width_s").get<double>();
      *out = new fpcg_fhr_series{fhr_zahorian(rec->rec, cfg).series};
    } else {
      fail(ErrorCode::invalid_argument, "unknown FHR method '" + m + "'");
    }
  });
}

size_t fpcg_fhr_size(const fpcg_fhr_series* series) {
  return series != nullptr ? series->series.size() : 0;
}

fpcg_status fpcg_fhr_get(const fpcg_fhr_series* series, size_t index, double* center_s, double* bpm,
                         int* is_gap) {
  if (series == nullptr || center_s == nullptr || bpm == nullptr || is_gap == nullptr)
    return invalid("null argument");
  if (index >= series->series.size()) return invalid("index out of range");
  *center_s = series->series.center_s[index];
  const double v = series->series.bpm[index];
  *is_gap = FhrSeries::is_gap(v) ? 1 : 0;
  *bpm = FhrSeries::is_gap(v) ? 0.0 : v;
  return FPCG_OK;
}

fpcg_status fpcg_fhr_save_csv(const fpcg_fhr_series* series, const char* path) {
  if (series == nullptr || path == nullptr) return invalid("null argument");
  return guarded([&] { save_fhr_csv(series->series, path); });
}

fpcg_status fpcg_fhr_load_csv(const char* path, double window_s, double overlap, fpcg_fhr_series** out) {
  if (path == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] { *out = new fpcg_fhr_series{load_fhr_csv(path, window_s, overlap)}; });
}

fpcg_status fpcg_fhr_mse(const fpcg_fhr_series* est, const fpcg_fhr_series* ref, double* mse, int* is_gap) {
  if (est == nullptr || ref == nullptr || mse == nullptr || is_gap == nullptr)
    return invalid("null argument");
  return guarded([&] {
    const auto v = fhr_mse(est->series, ref->series);
    *is_gap = v ? 0 : 1;
    *mse = v ? *v : 0.0;
  });
}

void fpcg_fhr_free(fpcg_fhr_series* series) { delete series; }

/* ---- evaluation ---- */

fpcg_status fpcg_evaluate(const fpcg_events* labels, const fpcg_events* detections, double duration_s,
                          double tolerance_s, char** report_json) {
  if (labels == nullptr || detections == nullptr || report_json == nullptr) return invalid("null argument");
  return guarded([&] {
    RecordEval ev = evaluate_record(labels->events, detections->events, duration_s, tolerance_s);
    EvalReport rep = assemble_report(detections->events.method, tolerance_s, {std::move(ev)});
    *report_json = dup_string(report_to_json(rep));
  });
}

fpcg_status fpcg_aggregate_reports(const char* const* report_jsons, size_t n, const char* method,
                                   double tolerance_s, char** report_json) {
  if (report_jsons == nullptr || report_json == nullptr) return invalid("null argument");
  return guarded([&] {
    std::vector<RecordEval> evals;
    for (size_t i = 0; i < n; ++i) {
      if (report_jsons[i] == nullptr) fail(ErrorCode::invalid_argument, "null report");
      nlohmann::json j = nlohmann::json::parse(report_jsons[i]);
      for (const auto& r : j.at("records")) {
        RecordEval ev;
        ev.id = r.at("id").get<std::string>();
        ev.n_labels = r.at("n_labels").get<std::size_t>();
        auto parse_kind = [&](const nlohmann::json& k) {
          KindEval ke;
          ke.tp = k.at("tp").get<std::size_t>();
          ke.fp = k.at("fp").get<std::size_t>();
          ke.fn = k.at("fn").get<std::size_t>();
          MatchResult m;
          m.tp = ke.tp;
          m.fp = ke.fp;
          m.fn = ke.fn;
          ke.score = scores(m);
          if (!k.at("mae_ms").is_null())
            ke.mae_stats = MaeStats{k.at("mae_ms").get<double>(), k.at("mae_sd_ms").get<double>()};
          return ke;
        };
        if (!r.at("s1").is_null()) ev.s1 = parse_kind(r.at("s1"));
        if (!r.at("s2").is_null()) ev.s2 = parse_kind(r.at("s2"));
        if (!r.at("error_rates").is_null()) {
          ErrorRates rates;
          rates.ins = r.at("error_rates").at("ins").get<double>();
          rates.del = r.at("error_rates").at("del").get<double>();
          rates.sub = r.at("error_rates").at("sub").get<double>();
          ev.rates = rates;
        }
        if (!r.at("fhr_mse").is_null()) ev.fhr_mse_value = r.at("fhr_mse").get<double>();
        evals.push_back(std::move(ev));
      }
    }
    EvalReport rep = assemble_report(method ? method : "", tolerance_s, std::move(evals));
    *report_json = dup_string(report_to_json(rep));
  });
}

fpcg_status fpcg_score_vs_tolerance(const fpcg_events* labels, const fpcg_events* detections, int kind,
                                    const double* tolerances_s, size_t n, char** csv_out) {
  if (labels == nullptr || detections == nullptr || tolerances_s == nullptr || csv_out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    const SoundKind k = kind == FPCG_S1 ? SoundKind::S1 : SoundKind::S2;
    const ToleranceCurve curve = score_vs_tolerance(
        labels->events.times_of(k), detections->events.times_of(k),
        std::vector<double>(tolerances_s, tolerances_s + n));
    *csv_out = dup_string(tolerance_curve_csv(curve));
  });
}

fpcg_status fpcg_score_vs_tolerance_pooled(const fpcg_events* const* labels,
                                           const fpcg_events* const* detections, size_t n_records,
                                           int kind, const double* tolerances_s, size_t n, char** csv_out) {
  if (labels == nullptr || detections == nullptr || tolerances_s == nullptr || csv_out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    const SoundKind k = kind == FPCG_S1 ? SoundKind::S1 : SoundKind::S2;
    std::vector<std::vector<double>> lab(n_records), det(n_records);
    for (size_t r = 0; r < n_records; ++r) {
      if (labels[r] == nullptr || detections[r] == nullptr) fail(ErrorCode::invalid_argument, "null entry");
      lab[r] = labels[r]->events.times_of(k);
      det[r] = detections[r]->events.times_of(k);
    }
    const ToleranceCurve curve =
        pooled_score_vs_tolerance(lab, det, std::vector<double>(tolerances_s, tolerances_s + n));
    *csv_out = dup_string(tolerance_curve_csv(curve));
  });
}

fpcg_status fpcg_crossval(const fpcg_record* const* recs, const fpcg_events* const* annotations, size_t n,
                          const char* method, const char* preset, const char* config_json, int k,
                          double tolerance_s, uint64_t seed, char** report_json) {
  if (recs == nullptr || annotations == nullptr || method == nullptr || report_json == nullptr)
    return invalid("null argument");
  return guarded([&] {
    const MethodConfig cfg = make_method_config(method_from_string(method), preset ? preset : "",
                                                config_json ? config_json : "");
    std::vector<Record> rs;
    std::vector<EventList> as;
    for (size_t i = 0; i < n; ++i) {
      if (recs[i] == nullptr || annotations[i] == nullptr) fail(ErrorCode::invalid_argument, "null entry");
      rs.push_back(recs[i]->rec);
      as.push_back(annotations[i]->events);
    }
    if (k < 2) fail(ErrorCode::invalid_argument, "fold count must be at least 2");
    const CrossValReport rep =
        kfold_cross_validate(rs, as, static_cast<std::size_t>(k), cfg, tolerance_s, seed);
    *report_json = dup_string(crossval_report_to_json(rep));
  });
}

fpcg_status fpcg_fhr_aggregate_stats(const double* mse_values, size_t n, char** stats_json) {
  if (mse_values == nullptr || stats_json == nullptr) return invalid("null argument");
  return guarded([&] {
    const FhrErrorStats st = aggregate_fhr_stats(std::vector<double>(mse_values, mse_values + n));
    nlohmann::ordered_json j;
    j["count"] = st.count;
    j["mean"] = st.mean;
    j["sd"] = st.sd;
    j["min"] = st.min;
    j["max"] = st.max;
    j["iqr"] = st.iqr;
    *stats_json = dup_string(j.dump(2));
  });
}

/* ---- envelopes ---- */

fpcg_status fpcg_envelope(const fpcg_record* rec, const char* name, const char* config_json,
                          double** values, size_t* n, double* rate_hz) {
  if (rec == nullptr || name == nullptr || values == nullptr || n == nullptr || rate_hz == nullptr)
    return invalid("null argument");
  return guarded([&] {
    nlohmann::json j = nlohmann::json::object();
    if (config_json != nullptr && config_json[0] != '\0') j = nlohmann::json::parse(config_json);
    const std::string which = name;
    std::vector<double> v;
    double rate = rec->rec.fs;
    if (which == "hilbert") {
      v = hilbert_envelope(rec->rec.samples);
    } else if (which == "homomorphic") {
      const double lpf = j.value("lpf_cutoff_hz", 8.0);
      v = homomorphic_envelope(rec->rec.samples, rec->rec.fs, lpf);
    } else if (which == "teager") {
      v = teager_energy(rec->rec.samples);
    } else if (which == "rms") {
      const double window_s = j.value("window_s", 0.05);
      const double hop_s = j.value("hop_s", 0.02);
      v = rms_envelope(rec->rec.samples, rec->rec.fs, window_s, hop_s);
      rate = 1.0 / hop_s;
    } else if (which == "psd") {
      const double lo = j.value("band_lo_hz", 40.0);
      const double hi = j.value("band_hi_hz", 60.0);
      const double frame_s = j.value("frame_s", 0.2);
      const double hop_s = j.value("hop_s", 0.02);
      v = psd_energy_envelope(rec->rec.samples, rec->rec.fs, lo, hi, frame_s, hop_s);
      rate = 1.0 / hop_s;
    } else if (which == "dwt") {
      EnvelogramConfig ec;
      const double feature_rate = j.value("feature_rate", 50.0);
      const int level = j.value("level", 0);
      const std::size_t n_out = static_cast<std::size_t>(
          rec->rec.duration_s() * feature_rate);
      int lvl = level;
      if (lvl <= 0)
        lvl = select_detail_level(rec->rec.fs, ec.dwt_target_hz,
                                  max_dwt_levels(rec->rec.samples.size(), wavelet_bank("rbio3.9")));
      v = dwt_detail_envelope(rec->rec.samples, rec->rec.fs, lvl, feature_rate, n_out);
      rate = feature_rate;
    } else {
      fail(ErrorCode::invalid_argument, "unknown envelope '" + which + "'");
    }
    double* buf = new double[v.size()];
    std::memcpy(buf, v.data(), v.size() * sizeof(double));
    *values = buf;
    *n = v.size();
    *rate_hz = rate;
  });
}

void fpcg_string_free(char* s) { delete[] s; }

void fpcg_buffer_free(double* p) { delete[] p; }

} // extern "C"
