#include "csvio.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fpcg {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::io, "cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

double parse_time_field(const std::string& field, const std::string& path, std::size_t lineno) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::format,
         path + ":" + std::to_string(lineno) + ": malformed time field '" + field + "'");
  }
}

std::vector<Event> parse_event_rows(const std::vector<std::string>& lines, const std::string& path) {
  if (lines.empty() || lines[0] != "t_s,kind")
    fail(ErrorCode::format, path + ": expected header 't_s,kind'");
  std::vector<Event> items;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      fail(ErrorCode::format, path + ":" + std::to_string(i + 1) + ": malformed row '" + line + "'");
    const double t = parse_time_field(line.substr(0, comma), path, i + 1);
    if (t < 0.0) fail(ErrorCode::format, path + ":" + std::to_string(i + 1) + ": negative time");
    const SoundKind kind = sound_kind_from_string(line.substr(comma + 1));
    items.push_back(Event{t, kind});
  }
  return items;
}

std::string record_id_from_path(const std::string& path) {
  std::string stem = std::filesystem::path(path).stem().string();
  for (const char* suffix : {"_annotations", "_detections"}) {
    const std::size_t pos = stem.rfind(suffix);
    if (pos != std::string::npos && pos + std::string(suffix).size() == stem.size())
      return stem.substr(0, pos);
  }
  return stem;
}

std::string format_seconds(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", t);
  return buf;
}

} // namespace

EventList load_annotations_csv(const std::string& path) {
  return make_annotations(record_id_from_path(path), parse_event_rows(read_lines(path), path));
}

EventList load_detections_csv(const std::string& path, const std::string& method) {
  return make_detections(record_id_from_path(path), method, parse_event_rows(read_lines(path), path));
}

void save_events_csv(const EventList& events, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::io, "cannot write file: " + path);
  os << "t_s,kind\n";
  for (const Event& e : events.items) os << format_seconds(e.t) << ',' << to_string(e.kind) << '\n';
  if (!os) fail(ErrorCode::io, "short write: " + path);
}

void save_fhr_csv(const FhrSeries& series, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::io, "cannot write file: " + path);
  os << "window_center_s,bpm\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    os << format_seconds(series.center_s[i]) << ',';
    if (!FhrSeries::is_gap(series.bpm[i])) os << format_seconds(series.bpm[i]);
    os << '\n';
  }
  if (!os) fail(ErrorCode::io, "short write: " + path);
}

FhrSeries load_fhr_csv(const std::string& path, double window_s, double overlap) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "window_center_s,bpm")
    fail(ErrorCode::format, path + ": expected header 'window_center_s,bpm'");
  FhrSeries series;
  series.window_s = window_s;
  series.overlap = overlap;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      fail(ErrorCode::format, path + ":" + std::to_string(i + 1) + ": malformed row");
    series.center_s.push_back(parse_time_field(line.substr(0, comma), path, i + 1));
    const std::string bpm = line.substr(comma + 1);
    series.bpm.push_back(bpm.empty() ? std::nan("") : parse_time_field(bpm, path, i + 1));
  }
  validate_fhr_series(series);
  return series;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::io, "cannot open manifest: " + path);
  nlohmann::json doc;
  try {
    is >> doc;
  } catch (const std::exception& e) {
    fail(ErrorCode::format, path + ": invalid JSON: " + e.what());
  }
  if (!doc.is_array()) fail(ErrorCode::format, path + ": manifest must be a JSON array");
  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    if (p.empty()) return p;
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };
  std::vector<ManifestEntry> out;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("id") || !item.contains("wav"))
      fail(ErrorCode::format, path + ": manifest entries need 'id' and 'wav'");
    ManifestEntry e;
    e.id = item.at("id").get<std::string>();
    e.wav_path = resolve(item.at("wav").get<std::string>());
    if (item.contains("annotations")) e.annotations_path = resolve(item.at("annotations").get<std::string>());
    out.push_back(std::move(e));
  }
  return out;
}

void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  const auto base = std::filesystem::path(path).parent_path();
  auto relativize = [&](const std::string& p) {
    if (p.empty()) return p;
    std::error_code ec;
    const auto rel = std::filesystem::relative(p, base, ec);
    return ec ? p : rel.string();
  };
  for (const auto& e : entries) {
    nlohmann::ordered_json item;
    item["id"] = e.id;
    item["wav"] = relativize(e.wav_path);
    if (!e.annotations_path.empty()) item["annotations"] = relativize(e.annotations_path);
    doc.push_back(item);
  }
  std::ofstream os(path);
  if (!os) fail(ErrorCode::io, "cannot write manifest: " + path);
  os << doc.dump(2) << '\n';
}

} // namespace fpcg
