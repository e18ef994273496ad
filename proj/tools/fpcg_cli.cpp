// Batch front end for the fpcg library: seeded simulation, detection,
// training, evaluation, cross validation and heart-rate estimation over
// dataset manifests. Exit codes: 0 ok, 2 config error, 3 data error,
// 4 numerical failure.
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpcg.h"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct CliError : std::runtime_error {
  int exit_code;
  CliError(int code, const std::string& what) : std::runtime_error(what), exit_code(code) {}
};

int exit_code_for(fpcg_status st) {
  switch (st) {
    case FPCG_OK: return 0;
    case FPCG_ERR_INVALID: return 2;
    case FPCG_ERR_IO:
    case FPCG_ERR_FORMAT: return 3;
    case FPCG_ERR_NUMERIC: return 4;
    default: return 4;
  }
}

void check(fpcg_status st, const std::string& context) {
  if (st != FPCG_OK) throw CliError(exit_code_for(st), context + ": " + fpcg_last_error());
}

// RAII wrappers over the C handles
struct RecordPtr {
  fpcg_record* p = nullptr;
  ~RecordPtr() { fpcg_record_free(p); }
};
struct EventsPtr {
  fpcg_events* p = nullptr;
  ~EventsPtr() { fpcg_events_free(p); }
};
struct FhrPtr {
  fpcg_fhr_series* p = nullptr;
  ~FhrPtr() { fpcg_fhr_free(p); }
};
struct ModelPtr {
  fpcg_model* p = nullptr;
  ~ModelPtr() { fpcg_model_free(p); }
};
struct StringPtr {
  char* p = nullptr;
  ~StringPtr() { fpcg_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw CliError(3, "cannot open file: " + path);
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

// atomic write: temp file in the same directory, then rename
void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw CliError(3, "cannot write file: " + path.string());
    os << content;
  }
  fs::rename(tmp, path);
}

struct ManifestEntry {
  std::string id;
  std::string wav;
  std::string annotations;
};

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw CliError(3, path + ": invalid JSON: " + e.what());
  }
  if (!doc.is_array()) throw CliError(3, path + ": manifest must be a JSON array");
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    if (p.empty()) return p;
    const fs::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };
  std::vector<ManifestEntry> out;
  for (const auto& item : doc) {
    ManifestEntry e;
    e.id = item.at("id").get<std::string>();
    e.wav = resolve(item.at("wav").get<std::string>());
    if (item.contains("annotations")) e.annotations = resolve(item.at("annotations").get<std::string>());
    out.push_back(std::move(e));
  }
  return out;
}

void for_each_record(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& work) {
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::unique_ptr<CliError> first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        work(i);
      } catch (const CliError& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::make_unique<CliError>(e);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) throw *first_error;
}

void write_run_log(const fs::path& out_dir, const std::string& command, const ordered_json& params) {
  ordered_json run;
  run["command"] = command;
  run["version"] = fpcg_version();
  run["params"] = params;
  write_file(out_dir / "run.json", run.dump(2) + "\n");
}

std::string load_optional_config(const std::string& path) {
  if (path.empty()) return "";
  const std::string text = read_file(path);
  try {
    const auto parsed = json::parse(text);
    (void)parsed;
  } catch (const json::exception& e) {
    throw CliError(2, path + ": invalid JSON: " + e.what());
  }
  return text;
}

/* ---- simulate ---- */

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int count,
                 std::uint64_t base_seed, unsigned jobs) {
  json cfg = json::object();
  if (!config_path.empty()) {
    try {
      cfg = json::parse(read_file(config_path));
    } catch (const json::exception& e) {
      throw CliError(2, config_path + ": invalid JSON: " + e.what());
    }
  }
  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  std::vector<ordered_json> manifest_entries(static_cast<std::size_t>(count));
  for_each_record(static_cast<std::size_t>(count), jobs, [&](std::size_t i) {
    char id[32];
    std::snprintf(id, sizeof id, "rec%04zu", i);
    json rec_cfg = cfg;
    rec_cfg["id"] = id;
    rec_cfg["rng_seed"] = base_seed + i;
    RecordPtr rec;
    EventsPtr annots;
    FhrPtr truth;
    StringPtr meta;
    check(fpcg_simulate(rec_cfg.dump().c_str(), &rec.p, &annots.p, &truth.p, &meta.p),
          std::string("simulate ") + id);
    check(fpcg_record_save_wav(rec.p, (out / (std::string(id) + ".wav")).string().c_str(), 16),
          std::string("write wav ") + id);
    check(fpcg_events_save_csv(annots.p, (out / (std::string(id) + "_annotations.csv")).string().c_str()),
          std::string("write annotations ") + id);
    check(fpcg_fhr_save_csv(truth.p, (out / (std::string(id) + "_fhr.csv")).string().c_str()),
          std::string("write fhr ") + id);
    write_file(out / (std::string(id) + "_meta.json"), meta.str() + "\n");
    ordered_json entry;
    entry["id"] = id;
    entry["wav"] = std::string(id) + ".wav";
    entry["annotations"] = std::string(id) + "_annotations.csv";
    manifest_entries[i] = entry;
  });

  ordered_json manifest = ordered_json::array();
  for (auto& e : manifest_entries) manifest.push_back(e);
  write_file(out / "manifest.json", manifest.dump(2) + "\n");

  ordered_json params;
  params["config"] = cfg;
  params["count"] = count;
  params["base_seed"] = base_seed;
  write_run_log(out, "simulate", params);
  return 0;
}

/* ---- train ---- */

struct Dataset {
  std::vector<std::unique_ptr<RecordPtr>> records;
  std::vector<std::unique_ptr<EventsPtr>> annotations;
  std::vector<ManifestEntry> entries;
  std::vector<const fpcg_record*> record_ptrs;
  std::vector<const fpcg_events*> annotation_ptrs;
};

Dataset load_dataset(const std::string& manifest_path, bool need_annotations) {
  Dataset ds;
  ds.entries = read_manifest(manifest_path);
  if (ds.entries.empty()) throw CliError(3, manifest_path + ": empty manifest");
  for (const auto& e : ds.entries) {
    auto rec = std::make_unique<RecordPtr>();
    check(fpcg_record_load_wav(e.wav.c_str(), &rec->p), "load " + e.wav);
    ds.record_ptrs.push_back(rec->p);
    ds.records.push_back(std::move(rec));
    auto ann = std::make_unique<EventsPtr>();
    if (!e.annotations.empty()) {
      check(fpcg_events_load_annotations(e.annotations.c_str(), &ann->p), "load " + e.annotations);
    } else if (need_annotations) {
      throw CliError(3, "record '" + e.id + "' has no annotations in the manifest");
    }
    ds.annotation_ptrs.push_back(ann->p);
    ds.annotations.push_back(std::move(ann));
  }
  return ds;
}

ModelPtr train_from_manifest(const std::string& manifest_path, const std::string& method,
                             const std::string& preset, const std::string& config_json) {
  const Dataset ds = load_dataset(manifest_path, true);
  ModelPtr model;
  check(fpcg_train(ds.record_ptrs.data(), ds.annotation_ptrs.data(), ds.record_ptrs.size(),
                   method.c_str(), preset.c_str(), config_json.c_str(), &model.p),
        "train " + method);
  return model;
}

int cmd_train(const std::string& manifest_path, const std::string& method, const std::string& preset,
              const std::string& config_path, const std::string& out_path) {
  const std::string config_json = load_optional_config(config_path);
  const ModelPtr model = train_from_manifest(manifest_path, method, preset, config_json);
  check(fpcg_model_save(model.p, out_path.c_str()), "save model");
  return 0;
}

/* ---- detect ---- */

int cmd_detect(const std::string& manifest_path, const std::string& method, const std::string& preset,
               const std::string& config_path, const std::string& model_path,
               const std::string& train_manifest, const std::string& out_dir, unsigned jobs) {
  const std::string config_json = load_optional_config(config_path);
  ModelPtr model;
  if (!model_path.empty()) {
    check(fpcg_model_load(model_path.c_str(), &model.p), "load model");
  } else if (!train_manifest.empty()) {
    model = train_from_manifest(train_manifest, method, preset, config_json);
  }
  if ((method == "hsmm" || method == "lr-hsmm") && model.p == nullptr)
    throw CliError(2, method + " needs --model or --train-manifest");

  const auto entries = read_manifest(manifest_path);
  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  for_each_record(entries.size(), jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    RecordPtr rec;
    check(fpcg_record_load_wav(e.wav.c_str(), &rec.p), "load " + e.wav);
    EventsPtr dets;
    check(fpcg_detect(rec.p, method.c_str(), preset.c_str(), config_json.c_str(), model.p, &dets.p),
          "detect " + e.id);
    check(fpcg_events_save_csv(dets.p, (out / (e.id + "_detections.csv")).string().c_str()),
          "write detections " + e.id);
  });

  ordered_json params;
  params["manifest"] = manifest_path;
  params["method"] = method;
  params["preset"] = preset;
  params["config"] = config_json.empty() ? json::object() : json::parse(config_json);
  params["model"] = model_path;
  params["train_manifest"] = train_manifest;
  write_run_log(out, "detect", params);
  return 0;
}

/* ---- evaluate ---- */

int cmd_evaluate(const std::string& manifest_path, const std::string& detections_dir,
                 const std::string& out_dir, double tolerance_ms, bool sweep,
                 const std::string& method_name) {
  const auto entries = read_manifest(manifest_path);
  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  const fs::path det_dir(detections_dir);

  std::vector<std::string> reports;
  std::vector<std::unique_ptr<EventsPtr>> all_labels, all_dets;
  std::vector<const fpcg_events*> label_ptrs, det_ptrs;
  for (const auto& e : entries) {
    if (e.annotations.empty()) throw CliError(3, "record '" + e.id + "' has no annotations");
    const fs::path det_path = det_dir / (e.id + "_detections.csv");
    if (!fs::exists(det_path)) throw CliError(3, "missing detections for record '" + e.id + "'");
    RecordPtr rec;
    check(fpcg_record_load_wav(e.wav.c_str(), &rec.p), "load " + e.wav);
    const double duration = static_cast<double>(fpcg_record_size(rec.p)) / fpcg_record_fs(rec.p);
    auto labels = std::make_unique<EventsPtr>();
    check(fpcg_events_load_annotations(e.annotations.c_str(), &labels->p), "load " + e.annotations);
    auto dets = std::make_unique<EventsPtr>();
    check(fpcg_events_load_detections(det_path.string().c_str(), &dets->p), "load " + det_path.string());
    StringPtr report;
    check(fpcg_evaluate(labels->p, dets->p, duration, tolerance_ms / 1000.0, &report.p),
          "evaluate " + e.id);
    reports.push_back(report.str());
    label_ptrs.push_back(labels->p);
    det_ptrs.push_back(dets->p);
    all_labels.push_back(std::move(labels));
    all_dets.push_back(std::move(dets));
  }

  std::vector<const char*> report_ptrs;
  for (const auto& r : reports) report_ptrs.push_back(r.c_str());
  StringPtr merged;
  check(fpcg_aggregate_reports(report_ptrs.data(), report_ptrs.size(), method_name.c_str(),
                               tolerance_ms / 1000.0, &merged.p),
        "aggregate report");
  write_file(out / "report.json", merged.str() + "\n");

  if (sweep) {
    std::vector<double> tols;
    for (int ms = 1; ms <= 100; ++ms) tols.push_back(ms * 1e-3);
    for (int kind : {FPCG_S1, FPCG_S2}) {
      StringPtr csv;
      check(fpcg_score_vs_tolerance_pooled(label_ptrs.data(), det_ptrs.data(), label_ptrs.size(), kind,
                                           tols.data(), tols.size(), &csv.p),
            "tolerance sweep");
      write_file(out / (kind == FPCG_S1 ? "svt_s1.csv" : "svt_s2.csv"), csv.str());
    }
  }

  ordered_json params;
  params["manifest"] = manifest_path;
  params["detections"] = detections_dir;
  params["tolerance_ms"] = tolerance_ms;
  params["sweep"] = sweep;
  params["method"] = method_name;
  write_run_log(out, "evaluate", params);
  return 0;
}

/* ---- crossval ---- */

int cmd_crossval(const std::string& manifest_path, const std::string& method, const std::string& preset,
                 const std::string& config_path, int k, double tolerance_ms, std::uint64_t seed,
                 const std::string& out_dir) {
  const std::string config_json = load_optional_config(config_path);
  const Dataset ds = load_dataset(manifest_path, true);
  if (static_cast<int>(ds.records.size()) < k)
    throw CliError(2, "fold count exceeds the dataset size");
  StringPtr report;
  check(fpcg_crossval(ds.record_ptrs.data(), ds.annotation_ptrs.data(), ds.record_ptrs.size(),
                      method.c_str(), preset.c_str(), config_json.c_str(), k, tolerance_ms / 1000.0, seed,
                      &report.p),
        "crossval");
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "crossval_report.json", report.str() + "\n");

  ordered_json params;
  params["manifest"] = manifest_path;
  params["method"] = method;
  params["preset"] = preset;
  params["k"] = k;
  params["tolerance_ms"] = tolerance_ms;
  params["seed"] = seed;
  write_run_log(fs::path(out_dir), "crossval", params);
  return 0;
}

/* ---- fhr ---- */

int cmd_fhr(const std::string& manifest_path, const std::string& method, const std::string& config_path,
            const std::string& detections_dir, const std::string& out_dir, bool with_mse, unsigned jobs) {
  const std::string config_json = load_optional_config(config_path);
  const auto entries = read_manifest(manifest_path);
  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  std::vector<double> mses(entries.size(), -1.0);
  std::vector<std::string> mse_ids(entries.size());
  for_each_record(entries.size(), jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    RecordPtr rec;
    check(fpcg_record_load_wav(e.wav.c_str(), &rec.p), "load " + e.wav);
    const double duration = static_cast<double>(fpcg_record_size(rec.p)) / fpcg_record_fs(rec.p);

    FhrPtr series;
    if (method == "labels") {
      EventsPtr events;
      if (!detections_dir.empty()) {
        const fs::path det_path = fs::path(detections_dir) / (e.id + "_detections.csv");
        check(fpcg_events_load_detections(det_path.string().c_str(), &events.p),
              "load " + det_path.string());
      } else if (!e.annotations.empty()) {
        check(fpcg_events_load_annotations(e.annotations.c_str(), &events.p), "load " + e.annotations);
      } else {
        throw CliError(3, "record '" + e.id + "' has neither annotations nor detections");
      }
      check(fpcg_fhr_from_events(events.p, duration, config_json.c_str(), &series.p), "fhr " + e.id);
    } else {
      check(fpcg_fhr_estimate(rec.p, method.c_str(), config_json.c_str(), &series.p), "fhr " + e.id);
    }
    check(fpcg_fhr_save_csv(series.p, (out / (e.id + "_fhr.csv")).string().c_str()), "write fhr " + e.id);

    if (with_mse) {
      if (e.annotations.empty()) throw CliError(3, "record '" + e.id + "' lacks annotations for MSE");
      EventsPtr labels;
      check(fpcg_events_load_annotations(e.annotations.c_str(), &labels.p), "load " + e.annotations);
      FhrPtr ref;
      check(fpcg_fhr_from_events(labels.p, duration, config_json.c_str(), &ref.p), "reference " + e.id);
      double mse = 0.0;
      int gap = 1;
      check(fpcg_fhr_mse(series.p, ref.p, &mse, &gap), "mse " + e.id);
      mses[i] = gap ? -1.0 : mse;
      mse_ids[i] = e.id;
    }
  });

  if (with_mse) {
    ordered_json per_record = ordered_json::array();
    std::vector<double> valid;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      ordered_json item;
      item["id"] = entries[i].id;
      if (mses[i] >= 0.0) {
        item["mse"] = mses[i];
        valid.push_back(mses[i]);
      } else {
        item["mse"] = nullptr;
      }
      per_record.push_back(item);
    }
    ordered_json doc;
    doc["method"] = method;
    doc["records"] = per_record;
    if (!valid.empty()) {
      StringPtr stats;
      check(fpcg_fhr_aggregate_stats(valid.data(), valid.size(), &stats.p), "aggregate stats");
      doc["aggregate"] = json::parse(stats.str());
    } else {
      doc["aggregate"] = nullptr;
    }
    write_file(out / "fhr_report.json", doc.dump(2) + "\n");
  }

  ordered_json params;
  params["manifest"] = manifest_path;
  params["method"] = method;
  params["detections"] = detections_dir;
  params["mse"] = with_mse;
  write_run_log(out, "fhr", params);
  return 0;
}

/* ---- envelope ---- */

int cmd_envelope(const std::string& wav_path, const std::string& kind, const std::string& config_path,
                 const std::string& out_path) {
  const std::string config_json = load_optional_config(config_path);
  RecordPtr rec;
  check(fpcg_record_load_wav(wav_path.c_str(), &rec.p), "load " + wav_path);
  double* values = nullptr;
  size_t n = 0;
  double rate = 0.0;
  check(fpcg_envelope(rec.p, kind.c_str(), config_json.c_str(), &values, &n, &rate), "envelope " + kind);
  std::string csv = "t_s,value\n";
  char buf[64];
  for (size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%.6f,%.9g\n", static_cast<double>(i) / rate, values[i]);
    csv += buf;
  }
  fpcg_buffer_free(values);
  write_file(out_path, csv);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"fetal phonocardiography benchmarking harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir, manifest_path, method, preset, model_path, train_manifest;
  std::string detections_dir, wav_path, env_kind, out_path;
  int count = 1, k = 10;
  double tolerance_ms = 30.0;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  bool sweep = false, with_mse = false;

  auto* sim = app.add_subcommand("simulate", "generate labelled synthetic records");
  sim->add_option("--config", config_path, "simulation config JSON");
  sim->add_option("--out", out_dir, "output directory")->required();
  sim->add_option("--count", count, "number of records")->default_val(1);
  sim->add_option("--base-seed", seed, "seed for record 0; record i uses base+i")->default_val(1);
  sim->add_option("--jobs", jobs, "parallel workers")->default_val(1);

  auto* det = app.add_subcommand("detect", "run a heart-sound detector over a manifest");
  det->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
  det->add_option("--method", method, "teager|rms|heuristic|hsmm|lr-hsmm|kfd")->required();
  det->add_option("--preset", preset, "named parameter preset (schmidt, springer, mueller, ...)");
  det->add_option("--config", config_path, "method parameter overrides JSON");
  det->add_option("--model", model_path, "trained model JSON (hsmm/lr-hsmm)");
  det->add_option("--train-manifest", train_manifest, "train on this manifest instead of --model");
  det->add_option("--out", out_dir, "output directory")->required();
  det->add_option("--jobs", jobs, "parallel workers")->default_val(1);

  auto* train = app.add_subcommand("train", "train a segmentation model");
  train->add_option("--manifest", manifest_path, "training manifest JSON")->required();
  train->add_option("--method", method, "hsmm|lr-hsmm")->required();
  train->add_option("--preset", preset, "named parameter preset");
  train->add_option("--config", config_path, "method parameter overrides JSON");
  train->add_option("--out", out_path, "model output path")->required();

  auto* eval = app.add_subcommand("evaluate", "score detections against the manifest labels");
  eval->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
  eval->add_option("--detections", detections_dir, "directory of <id>_detections.csv")->required();
  eval->add_option("--out", out_dir, "output directory")->required();
  eval->add_option("--tolerance-ms", tolerance_ms, "matching tolerance")->default_val(30.0);
  eval->add_flag("--sweep", sweep, "emit Score-vs-Tolerance curves (1-100 ms)");
  eval->add_option("--method-name", method, "method name recorded in the report")->default_val("");

  auto* cv = app.add_subcommand("crossval", "k-fold cross validation of a trainable method");
  cv->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
  cv->add_option("--method", method, "hsmm|lr-hsmm")->required();
  cv->add_option("--preset", preset, "named parameter preset");
  cv->add_option("--config", config_path, "method parameter overrides JSON");
  cv->add_option("--k", k, "fold count")->default_val(10);
  cv->add_option("--tolerance-ms", tolerance_ms, "matching tolerance")->default_val(30.0);
  cv->add_option("--seed", seed, "fold assignment seed")->default_val(1);
  cv->add_option("--out", out_dir, "output directory")->required();

  auto* fhr = app.add_subcommand("fhr", "estimate heart-rate series over a manifest");
  fhr->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
  fhr->add_option("--method", method, "labels|tang|zahorian")->required();
  fhr->add_option("--config", config_path, "estimator config JSON");
  fhr->add_option("--detections", detections_dir, "use detections instead of annotations (labels method)");
  fhr->add_option("--out", out_dir, "output directory")->required();
  fhr->add_flag("--mse", with_mse, "also report MSE against the label-derived reference");
  fhr->add_option("--jobs", jobs, "parallel workers")->default_val(1);

  auto* env = app.add_subcommand("envelope", "dump an envelope/energy sequence as CSV");
  env->add_option("--wav", wav_path, "input WAV file")->required();
  env->add_option("--kind", env_kind, "hilbert|homomorphic|teager|rms|psd|dwt")->required();
  env->add_option("--config", config_path, "envelope config JSON");
  env->add_option("--out", out_path, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_dir, count, seed, jobs);
    if (det->parsed())
      return cmd_detect(manifest_path, method, preset, config_path, model_path, train_manifest, out_dir,
                        jobs);
    if (train->parsed()) return cmd_train(manifest_path, method, preset, config_path, out_path);
    if (eval->parsed())
      return cmd_evaluate(manifest_path, detections_dir, out_dir, tolerance_ms, sweep, method);
    if (cv->parsed())
      return cmd_crossval(manifest_path, method, preset, config_path, k, tolerance_ms, seed, out_dir);
    if (fhr->parsed())
      return cmd_fhr(manifest_path, method, config_path, detections_dir, out_dir, with_mse, jobs);
    if (env->parsed()) return cmd_envelope(wav_path, env_kind, config_path, out_path);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 2;
}
