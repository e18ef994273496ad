#ifndef FPCG_HSMM_HPP
#define FPCG_HSMM_HPP

#include <array>
#include <string>
#include <vector>

#include "envelogram.hpp"
#include "types.hpp"

namespace fpcg {

// heart-cycle states, fixed order
enum HeartState : int { kS1 = 0, kSystole = 1, kS2 = 2, kDiastole = 3 };
constexpr int kNumStates = 4;
inline int next_state(int s) { return (s + 1) % kNumStates; }
const char* heart_state_name(int s);

enum class EmissionKind { gaussian, logistic };
enum class ModelKind { hsmm, hmm };

struct DurationModel {
  double mean_s = 0.0;
  double sd_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
};

using Mat4 = std::array<std::array<double, 4>, 4>;
using Vec4 = std::array<double, 4>;

// cyclic S1 -> systole -> S2 -> diastole transition matrix
Mat4 cyclic_transition_matrix();

struct HsmmModel {
  ModelKind kind = ModelKind::hsmm;
  EmissionKind emission = EmissionKind::logistic;
  double feature_rate = 50.0;
  Mat4 transition{};                     // cyclic for hsmm, self-loops for hmm
  std::array<DurationModel, 4> durations{};
  double expected_hr_lo = 80.0;
  double expected_hr_hi = 210.0;

  // gaussian emissions
  std::array<Vec4, 4> mu{};
  std::array<Mat4, 4> cov{};

  // logistic emissions (one-vs-rest, bias last) with per-state priors for
  // the posterior-to-likelihood correction
  std::array<std::array<double, 5>, 4> weights{};
  Vec4 prior{};
};

void validate_model(const HsmmModel& model);

std::string model_to_json(const HsmmModel& model);
HsmmModel model_from_json(const std::string& json_text);
void save_model(const HsmmModel& model, const std::string& path);
HsmmModel load_model(const std::string& path);

struct HsmmTrainConfig {
  EmissionKind emission = EmissionKind::logistic;
  ModelKind kind = ModelKind::hsmm;
  double s1_expand_s = 0.08; // point label to state interval
  double s2_expand_s = 0.06;
  double cov_regularization = 1e-6;
  double logistic_l2 = 1e-4;
  double logistic_tol = 1e-6;
  int logistic_max_iter = 500;
  double duration_sd_floor_frames = 0.5;
  double expected_hr_lo = 80.0;
  double expected_hr_hi = 210.0;
};

// Frame labels derived from annotations: events expand to fixed-width state
// intervals, the gaps become systole/diastole following the cycle.
std::vector<int> states_from_annotations(const EventList& annotations, std::size_t frames,
                                         double feature_rate, const HsmmTrainConfig& cfg);

HsmmModel train_hsmm(const std::vector<Envelogram>& envelograms, const std::vector<EventList>& annotations,
                     const HsmmTrainConfig& cfg);

// Rescale the duration model to a different expected heart rate (mean cycle
// time moves to 60 / midpoint of the range).
void scale_durations_to_expected_hr(HsmmModel& model, double hr_lo_bpm, double hr_hi_bpm);

// frame-by-state log emission likelihoods
std::vector<std::array<double, 4>> emission_log_likelihood(const HsmmModel& model, const Envelogram& env);

struct StateSequence {
  double feature_rate = 50.0;
  std::vector<int> states;
};

// Duration-dependent Viterbi with partial first/last durations: boundary runs
// are scored with the duration survival function, so cycles may begin before
// and end after the observation window.
StateSequence extended_viterbi(const HsmmModel& model, const Envelogram& env);

// Plain Viterbi over the self-loop transition matrix (hmm model kind).
StateSequence plain_viterbi(const HsmmModel& model, const Envelogram& env);

// Each maximal S1/S2 run becomes one detection at the run's temporal midpoint.
EventList states_to_detections(const StateSequence& seq, const std::string& record_id,
                               const std::string& method);

// Logistic-regression trainer internals, exposed for the training monotonicity
// checks: returns the loss per Newton iteration.
struct LogisticFit {
  std::array<double, 5> w{};
  std::vector<double> loss_trace;
};
LogisticFit fit_logistic_binary(const std::vector<std::array<double, 4>>& x, const std::vector<int>& y,
                                double l2, double tol, int max_iter);

} // namespace fpcg

#endif
