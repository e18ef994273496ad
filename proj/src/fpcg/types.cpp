#include "types.hpp"

#include <algorithm>
#include <mutex>

namespace fpcg {

namespace {
std::function<void(const std::string&)> g_warning_handler;
std::mutex g_warning_mutex;
} // namespace

void set_warning_handler(std::function<void(const std::string&)> handler) {
  std::lock_guard<std::mutex> lock(g_warning_mutex);
  g_warning_handler = std::move(handler);
}

void warn(const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_warning_mutex);
  if (g_warning_handler) g_warning_handler(msg);
}

void validate_record(const Record& rec) {
  if (!(rec.fs > 0.0)) fail(ErrorCode::invalid_argument, "record '" + rec.id + "': fs must be positive");
  if (rec.samples.empty()) fail(ErrorCode::invalid_argument, "record '" + rec.id + "': no samples");
  for (double v : rec.samples) {
    if (!std::isfinite(v)) fail(ErrorCode::numeric, "record '" + rec.id + "': non-finite sample");
  }
}

Record make_record(std::string id, std::vector<double> samples, double fs, Source source) {
  Record rec{std::move(id), std::move(samples), fs, source};
  validate_record(rec);
  return rec;
}

const char* to_string(SoundKind kind) { return kind == SoundKind::S1 ? "S1" : "S2"; }

SoundKind sound_kind_from_string(const std::string& s) {
  if (s == "S1") return SoundKind::S1;
  if (s == "S2") return SoundKind::S2;
  fail(ErrorCode::format, "unknown kind '" + s + "'");
}

std::vector<double> EventList::times_of(SoundKind kind) const {
  std::vector<double> out;
  for (const Event& e : items)
    if (e.kind == kind) out.push_back(e.t);
  return out;
}

std::size_t EventList::count_of(SoundKind kind) const {
  std::size_t n = 0;
  for (const Event& e : items)
    if (e.kind == kind) ++n;
  return n;
}

namespace {

void sort_events(std::vector<Event>& items) {
  std::stable_sort(items.begin(), items.end(), [](const Event& a, const Event& b) {
    if (a.t != b.t) return a.t < b.t;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
}

} // namespace

EventList make_annotations(std::string record_id, std::vector<Event> items, double min_spacing_s) {
  for (const Event& e : items) {
    if (!std::isfinite(e.t) || e.t < 0.0)
      fail(ErrorCode::format, "annotation time must be finite and non-negative");
  }
  sort_events(items);
  double last[2] = {-1e30, -1e30};
  for (const Event& e : items) {
    double& prev = last[static_cast<int>(e.kind)];
    if (e.t - prev < min_spacing_s) {
      fail(ErrorCode::format, std::string("annotations of kind ") + to_string(e.kind) +
                                  " closer than minimum spacing near t=" + std::to_string(e.t));
    }
    prev = e.t;
  }
  return EventList{std::move(record_id), "", std::move(items)};
}

EventList make_detections(std::string record_id, std::string method, std::vector<Event> items) {
  for (const Event& e : items) {
    if (!std::isfinite(e.t) || e.t < 0.0)
      fail(ErrorCode::format, "detection time must be finite and non-negative");
  }
  sort_events(items);
  return EventList{std::move(record_id), std::move(method), std::move(items)};
}

void check_within_duration(const EventList& events, double duration_s) {
  for (const Event& e : events.items) {
    if (e.t > duration_s)
      fail(ErrorCode::invalid_argument, "event at t=" + std::to_string(e.t) + " beyond record end");
  }
}

void validate_fhr_series(const FhrSeries& series) {
  if (series.center_s.size() != series.bpm.size())
    fail(ErrorCode::invalid_argument, "fhr series: centers/values size mismatch");
  if (!(series.window_s > 0.0) || series.overlap < 0.0 || series.overlap >= 1.0)
    fail(ErrorCode::invalid_argument, "fhr series: bad window parameters");
  const double step = series.window_s * (1.0 - series.overlap);
  for (std::size_t i = 0; i < series.center_s.size(); ++i) {
    if (i > 0) {
      double d = series.center_s[i] - series.center_s[i - 1];
      if (!(d > 0.0) || std::abs(d - step) > 1e-6)
        fail(ErrorCode::invalid_argument, "fhr series: centers not on the window grid");
    }
    double v = series.bpm[i];
    if (!FhrSeries::is_gap(v) && !(v > 0.0 && v < 400.0))
      fail(ErrorCode::invalid_argument, "fhr series: bpm out of (0, 400)");
  }
}

bool same_grid(const FhrSeries& a, const FhrSeries& b, double tol_s) {
  if (a.size() != b.size()) return false;
  if (std::abs(a.window_s - b.window_s) > tol_s) return false;
  if (std::abs(a.overlap - b.overlap) > 1e-12) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a.center_s[i] - b.center_s[i]) > tol_s) return false;
  return true;
}

std::vector<double> fhr_window_centers(double duration_s, double window_s, double overlap) {
  if (!(window_s > 0.0) || overlap < 0.0 || overlap >= 1.0)
    fail(ErrorCode::invalid_argument, "window parameters out of range");
  std::vector<double> centers;
  const double step = window_s * (1.0 - overlap);
  for (double c = window_s / 2.0; c + window_s / 2.0 <= duration_s + 1e-9; c += step)
    centers.push_back(c);
  return centers;
}

} // namespace fpcg
