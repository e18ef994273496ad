#ifndef FPCG_TYPES_HPP
#define FPCG_TYPES_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "common.hpp"

namespace fpcg {

enum class Source { synthetic, file };

// Mono sampled heart-sound signal. Immutable by convention after construction;
// every operation returns a fresh Record.
struct Record {
  std::string id;
  std::vector<double> samples;
  double fs = 0.0;
  Source source = Source::file;

  double duration_s() const { return static_cast<double>(samples.size()) / fs; }
};

Record make_record(std::string id, std::vector<double> samples, double fs, Source source);
void validate_record(const Record& rec);

enum class SoundKind { S1 = 0, S2 = 1 };

const char* to_string(SoundKind kind);
SoundKind sound_kind_from_string(const std::string& s);

struct Event {
  double t = 0.0; // seconds from record start
  SoundKind kind = SoundKind::S1;
};

// Shared container for manual annotations and detector output, always sorted
// ascending by time. `method` is empty for annotations.
struct EventList {
  std::string record_id;
  std::string method;
  std::vector<Event> items;

  std::vector<double> times_of(SoundKind kind) const;
  std::size_t count_of(SoundKind kind) const;
};

// Sorts and checks the annotation invariants: t >= 0, strictly increasing per
// kind, and no same-kind pair closer than min_spacing_s (defaults to the
// 100 ms physiological floor).
EventList make_annotations(std::string record_id, std::vector<Event> items,
                           double min_spacing_s = 0.1);

// Detections only need to be sorted and non-negative.
EventList make_detections(std::string record_id, std::string method, std::vector<Event> items);

void check_within_duration(const EventList& events, double duration_s);

// Windowed heart-rate series; NaN marks a gap.
struct FhrSeries {
  double window_s = 10.0;
  double overlap = 0.5; // fraction of window shared with the next one
  std::vector<double> center_s;
  std::vector<double> bpm;

  static bool is_gap(double v) { return std::isnan(v); }
  std::size_t size() const { return center_s.size(); }
};

void validate_fhr_series(const FhrSeries& series);
bool same_grid(const FhrSeries& a, const FhrSeries& b, double tol_s = 1e-9);

// Window centres for duration_s, spaced window_s*(1-overlap), windows fully
// inside the record. All estimators and the label-based reference share this
// grid so series are pointwise comparable.
std::vector<double> fhr_window_centers(double duration_s, double window_s, double overlap);

} // namespace fpcg

#endif
