#ifndef FPCG_CSVIO_HPP
#define FPCG_CSVIO_HPP

#include <string>
#include <vector>

#include "types.hpp"

namespace fpcg {

// Event CSV (annotations and detections): header `t_s,kind`, one event per
// row, kind in {S1, S2}. Annotation loads apply the annotation invariants.
EventList load_annotations_csv(const std::string& path);
EventList load_detections_csv(const std::string& path, const std::string& method = "");
void save_events_csv(const EventList& events, const std::string& path);

// FHR CSV: header `window_center_s,bpm`, empty bpm field marks a gap.
// Window geometry is not stored in the file, so loading takes it as input.
void save_fhr_csv(const FhrSeries& series, const std::string& path);
FhrSeries load_fhr_csv(const std::string& path, double window_s, double overlap);

struct ManifestEntry {
  std::string id;
  std::string wav_path;
  std::string annotations_path; // may be empty
};

// JSON list of {id, wav, annotations}; relative paths resolve against the
// manifest's directory.
std::vector<ManifestEntry> load_manifest(const std::string& path);
void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path);

} // namespace fpcg

#endif
