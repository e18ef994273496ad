#include "hsmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "mathutil.hpp"

namespace fpcg {

const char* heart_state_name(int s) {
  switch (s) {
    case kS1: return "S1";
    case kSystole: return "systole";
    case kS2: return "S2";
    case kDiastole: return "diastole";
  }
  fail(ErrorCode::invalid_argument, "bad state index");
}

Mat4 cyclic_transition_matrix() {
  Mat4 a{};
  for (int s = 0; s < kNumStates; ++s) a[static_cast<std::size_t>(s)][static_cast<std::size_t>(next_state(s))] = 1.0;
  return a;
}

void validate_model(const HsmmModel& model) {
  for (int i = 0; i < kNumStates; ++i) {
    double row = 0.0;
    for (int j = 0; j < kNumStates; ++j) row += model.transition[i][j];
    if (std::abs(row - 1.0) > 1e-12) fail(ErrorCode::numeric, "transition row does not sum to 1");
  }
  if (model.kind == ModelKind::hsmm) {
    const Mat4 expected = cyclic_transition_matrix();
    for (int i = 0; i < kNumStates; ++i)
      for (int j = 0; j < kNumStates; ++j)
        if (model.transition[i][j] != expected[i][j])
          fail(ErrorCode::numeric, "duration-dependent model requires the cyclic transition matrix");
  } else {
    // self-loop + cyclic advance structure, plus the diastole->S1 wrap
    for (int i = 0; i < kNumStates; ++i) {
      for (int j = 0; j < kNumStates; ++j) {
        const bool allowed = j == i || j == next_state(i);
        if (!allowed && model.transition[i][j] != 0.0)
          fail(ErrorCode::numeric, "hmm transition structure violated");
      }
    }
  }
  for (const DurationModel& d : model.durations) {
    if (!(d.sd_s > 0.0)) fail(ErrorCode::numeric, "duration sd must be positive");
    if (!(d.min_s < d.mean_s && d.mean_s < d.max_s))
      fail(ErrorCode::numeric, "duration bounds must bracket the mean");
  }
  if (!(model.feature_rate > 0.0)) fail(ErrorCode::invalid_argument, "feature rate must be positive");
}

namespace {

using nlohmann::ordered_json;

ordered_json mat_to_json(const Mat4& m) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : m) rows.push_back(std::vector<double>(r.begin(), r.end()));
  return rows;
}

Mat4 mat_from_json(const nlohmann::json& j) {
  Mat4 m{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 4; ++k) m[i][k] = j.at(i).at(k).get<double>();
  return m;
}

} // namespace

std::string model_to_json(const HsmmModel& model) {
  ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = model.kind == ModelKind::hsmm ? "hsmm" : "hmm";
  j["emission"] = model.emission == EmissionKind::gaussian ? "gaussian" : "logistic";
  j["feature_rate"] = model.feature_rate;
  j["transition"] = mat_to_json(model.transition);
  j["durations"] = ordered_json::array();
  for (int s = 0; s < kNumStates; ++s) {
    const DurationModel& d = model.durations[static_cast<std::size_t>(s)];
    j["durations"].push_back({{"state", heart_state_name(s)},
                              {"mean_s", d.mean_s},
                              {"sd_s", d.sd_s},
                              {"min_s", d.min_s},
                              {"max_s", d.max_s}});
  }
  j["expected_hr_lo"] = model.expected_hr_lo;
  j["expected_hr_hi"] = model.expected_hr_hi;
  if (model.emission == EmissionKind::gaussian) {
    j["mu"] = ordered_json::array();
    j["cov"] = ordered_json::array();
    for (int s = 0; s < kNumStates; ++s) {
      j["mu"].push_back(std::vector<double>(model.mu[static_cast<std::size_t>(s)].begin(),
                                            model.mu[static_cast<std::size_t>(s)].end()));
      j["cov"].push_back(mat_to_json(model.cov[static_cast<std::size_t>(s)]));
    }
  } else {
    j["weights"] = ordered_json::array();
    for (int s = 0; s < kNumStates; ++s)
      j["weights"].push_back(std::vector<double>(model.weights[static_cast<std::size_t>(s)].begin(),
                                                 model.weights[static_cast<std::size_t>(s)].end()));
    j["prior"] = std::vector<double>(model.prior.begin(), model.prior.end());
  }
  return j.dump(2);
}

HsmmModel model_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const std::exception& e) {
    fail(ErrorCode::format, std::string("model JSON: ") + e.what());
  }
  HsmmModel model;
  model.kind = j.at("kind").get<std::string>() == "hsmm" ? ModelKind::hsmm : ModelKind::hmm;
  model.emission = j.at("emission").get<std::string>() == "gaussian" ? EmissionKind::gaussian
                                                                      : EmissionKind::logistic;
  model.feature_rate = j.at("feature_rate").get<double>();
  model.transition = mat_from_json(j.at("transition"));
  for (std::size_t s = 0; s < 4; ++s) {
    const auto& d = j.at("durations").at(s);
    model.durations[s] = DurationModel{d.at("mean_s").get<double>(), d.at("sd_s").get<double>(),
                                       d.at("min_s").get<double>(), d.at("max_s").get<double>()};
  }
  model.expected_hr_lo = j.at("expected_hr_lo").get<double>();
  model.expected_hr_hi = j.at("expected_hr_hi").get<double>();
  if (model.emission == EmissionKind::gaussian) {
    for (std::size_t s = 0; s < 4; ++s) {
      for (std::size_t k = 0; k < 4; ++k) model.mu[s][k] = j.at("mu").at(s).at(k).get<double>();
      model.cov[s] = mat_from_json(j.at("cov").at(s));
    }
  } else {
    for (std::size_t s = 0; s < 4; ++s)
      for (std::size_t k = 0; k < 5; ++k) model.weights[s][k] = j.at("weights").at(s).at(k).get<double>();
    for (std::size_t s = 0; s < 4; ++s) model.prior[s] = j.at("prior").at(s).get<double>();
  }
  validate_model(model);
  return model;
}

void save_model(const HsmmModel& model, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::io, "cannot write model file: " + path);
  os << model_to_json(model) << '\n';
}

HsmmModel load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::io, "cannot open model file: " + path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return model_from_json(text);
}

std::vector<int> states_from_annotations(const EventList& annotations, std::size_t frames,
                                         double feature_rate, const HsmmTrainConfig& cfg) {
  std::vector<int> labels(frames, -1);
  const auto& items = annotations.items;
  if (items.empty()) fail(ErrorCode::invalid_argument, "cannot derive states from empty annotations");

  auto frame_of = [&](double t) {
    return static_cast<std::ptrdiff_t>(std::floor(t * feature_rate));
  };
  auto fill = [&](std::ptrdiff_t lo, std::ptrdiff_t hi, int state) {
    lo = std::max<std::ptrdiff_t>(lo, 0);
    hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(frames) - 1);
    for (std::ptrdiff_t f = lo; f <= hi; ++f) labels[static_cast<std::size_t>(f)] = state;
  };

  // events first: point labels expand to fixed-width intervals
  for (const Event& e : items) {
    const double half = (e.kind == SoundKind::S1 ? cfg.s1_expand_s : cfg.s2_expand_s) / 2.0;
    fill(frame_of(e.t - half), frame_of(e.t + half), e.kind == SoundKind::S1 ? kS1 : kS2);
  }
  // gaps follow the cycle: after S1 comes systole, after S2 diastole
  int pending = items.front().kind == SoundKind::S1 ? kDiastole : kSystole; // lead-in
  for (std::size_t f = 0; f < frames; ++f) {
    if (labels[f] != -1) {
      pending = labels[f] == kS1 ? kSystole : (labels[f] == kS2 ? kDiastole : pending);
      continue;
    }
    labels[f] = pending;
  }
  return labels;
}

namespace {

struct RunStats {
  std::array<std::vector<double>, 4> durations_s;
};

void collect_interior_runs(const std::vector<int>& labels, double feature_rate, RunStats& stats) {
  std::size_t start = 0;
  std::vector<std::pair<int, std::size_t>> runs; // state, length
  for (std::size_t f = 1; f <= labels.size(); ++f) {
    if (f == labels.size() || labels[f] != labels[start]) {
      runs.emplace_back(labels[start], f - start);
      start = f;
    }
  }
  // first and last runs are boundary-truncated, skip them
  for (std::size_t r = 1; r + 1 < runs.size(); ++r) {
    const auto [state, len] = runs[r];
    if (state >= 0)
      stats.durations_s[static_cast<std::size_t>(state)].push_back(static_cast<double>(len) / feature_rate);
  }
}

// 4x4 Cholesky with the regularizer already added; returns log det and the
// inverse via forward/back substitution
struct GaussianParams {
  Mat4 inv{};
  double logdet = 0.0;
};

GaussianParams invert_spd(const Mat4& cov) {
  double l[4][4] = {};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (i == j) {
        if (s <= 0.0) fail(ErrorCode::numeric, "covariance not positive definite");
        l[i][i] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  GaussianParams out;
  out.logdet = 0.0;
  for (int i = 0; i < 4; ++i) out.logdet += 2.0 * std::log(l[i][i]);
  // invert L, then inv = L^-T L^-1
  double linv[4][4] = {};
  for (int i = 0; i < 4; ++i) {
    linv[i][i] = 1.0 / l[i][i];
    for (int j = 0; j < i; ++j) {
      double s = 0.0;
      for (int k = j; k < i; ++k) s -= l[i][k] * linv[k][j];
      linv[i][j] = s / l[i][i];
    }
  }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = std::max(i, j); k < 4; ++k) s += linv[k][i] * linv[k][j];
      out.inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
    }
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// solve the 5x5 Newton system in place (Gaussian elimination with partial
// pivoting)
bool solve5(double a[5][5], double b[5], double x[5]) {
  int piv[5];
  for (int i = 0; i < 5; ++i) piv[i] = i;
  for (int col = 0; col < 5; ++col) {
    int best = col;
    for (int r = col + 1; r < 5; ++r)
      if (std::abs(a[piv[r]][col]) > std::abs(a[piv[best]][col])) best = r;
    std::swap(piv[col], piv[best]);
    const double p = a[piv[col]][col];
    if (std::abs(p) < 1e-300) return false;
    for (int r = col + 1; r < 5; ++r) {
      const double f = a[piv[r]][col] / p;
      for (int c = col; c < 5; ++c) a[piv[r]][c] -= f * a[piv[col]][c];
      b[piv[r]] -= f * b[piv[col]];
    }
  }
  for (int row = 4; row >= 0; --row) {
    double s = b[piv[row]];
    for (int c = row + 1; c < 5; ++c) s -= a[piv[row]][c] * x[c];
    x[row] = s / a[piv[row]][row];
  }
  return true;
}

} // namespace

LogisticFit fit_logistic_binary(const std::vector<std::array<double, 4>>& x, const std::vector<int>& y,
                                double l2, double tol, int max_iter) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n) fail(ErrorCode::invalid_argument, "bad logistic training set");
  LogisticFit fit;
  fit.w.fill(0.0);

  auto loss_of = [&](const std::array<double, 5>& w) {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = w[4];
      for (int k = 0; k < 4; ++k) z += w[static_cast<std::size_t>(k)] * x[i][static_cast<std::size_t>(k)];
      // stable log(1 + exp(-y z)) with y in {-1, +1}
      const double m = y[i] == 1 ? -z : z;
      loss += m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    }
    loss /= static_cast<double>(n);
    for (int k = 0; k < 5; ++k) loss += l2 * w[static_cast<std::size_t>(k)] * w[static_cast<std::size_t>(k)];
    return loss;
  };

  double loss = loss_of(fit.w);
  fit.loss_trace.push_back(loss);

  for (int iter = 0; iter < max_iter; ++iter) {
    double grad[5] = {};
    double hess[5][5] = {};
    for (std::size_t i = 0; i < n; ++i) {
      double z = fit.w[4];
      for (int k = 0; k < 4; ++k) z += fit.w[static_cast<std::size_t>(k)] * x[i][static_cast<std::size_t>(k)];
      const double p = sigmoid(z);
      const double target = y[i] == 1 ? 1.0 : 0.0;
      const double g = p - target;
      const double h = std::max(p * (1.0 - p), 1e-10);
      double feat[5] = {x[i][0], x[i][1], x[i][2], x[i][3], 1.0};
      for (int r = 0; r < 5; ++r) {
        grad[r] += g * feat[r];
        for (int c = 0; c < 5; ++c) hess[r][c] += h * feat[r] * feat[c];
      }
    }
    double gnorm = 0.0;
    for (int r = 0; r < 5; ++r) {
      grad[r] = grad[r] / static_cast<double>(n) + 2.0 * l2 * fit.w[static_cast<std::size_t>(r)];
      gnorm += grad[r] * grad[r];
      for (int c = 0; c < 5; ++c) hess[r][c] /= static_cast<double>(n);
      hess[r][r] += 2.0 * l2;
    }
    if (std::sqrt(gnorm) < tol) break;

    double step[5];
    double hcopy[5][5];
    double gcopy[5];
    for (int r = 0; r < 5; ++r) {
      gcopy[r] = grad[r];
      for (int c = 0; c < 5; ++c) hcopy[r][c] = hess[r][c];
    }
    if (!solve5(hcopy, gcopy, step)) {
      for (int r = 0; r < 5; ++r) step[r] = grad[r]; // fall back to gradient
    }

    // backtracking keeps the loss non-increasing
    double alpha = 1.0;
    std::array<double, 5> trial = fit.w;
    for (int bt = 0; bt < 40; ++bt) {
      for (int r = 0; r < 5; ++r) trial[static_cast<std::size_t>(r)] = fit.w[static_cast<std::size_t>(r)] - alpha * step[r];
      const double trial_loss = loss_of(trial);
      if (trial_loss <= loss + 1e-15) {
        fit.w = trial;
        loss = trial_loss;
        break;
      }
      alpha *= 0.5;
    }
    fit.loss_trace.push_back(loss);
  }
  return fit;
}

HsmmModel train_hsmm(const std::vector<Envelogram>& envelograms, const std::vector<EventList>& annotations,
                     const HsmmTrainConfig& cfg) {
  if (envelograms.size() != annotations.size() || envelograms.size() < 2)
    fail(ErrorCode::invalid_argument, "training needs at least 2 records with annotations");
  const double feature_rate = envelograms.front().feature_rate;
  for (const Envelogram& e : envelograms)
    if (std::abs(e.feature_rate - feature_rate) > 1e-9)
      fail(ErrorCode::invalid_argument, "mixed feature rates in training set");
  for (const EventList& a : annotations) {
    if (a.count_of(SoundKind::S1) == 0 || a.count_of(SoundKind::S2) == 0)
      fail(ErrorCode::invalid_argument, "record '" + a.record_id + "' lacks S1 or S2 labels");
  }

  RunStats stats;
  std::vector<std::vector<int>> all_labels;
  for (std::size_t r = 0; r < envelograms.size(); ++r) {
    std::vector<int> labels =
        states_from_annotations(annotations[r], envelograms[r].frames(), feature_rate, cfg);
    collect_interior_runs(labels, feature_rate, stats);
    all_labels.push_back(std::move(labels));
  }

  HsmmModel model;
  model.kind = cfg.kind;
  model.emission = cfg.emission;
  model.feature_rate = feature_rate;
  model.expected_hr_lo = cfg.expected_hr_lo;
  model.expected_hr_hi = cfg.expected_hr_hi;

  const double dt = 1.0 / feature_rate;
  for (int s = 0; s < kNumStates; ++s) {
    auto& samples = stats.durations_s[static_cast<std::size_t>(s)];
    if (samples.empty())
      fail(ErrorCode::invalid_argument, std::string("no interior runs observed for state ") + heart_state_name(s));
    DurationModel d;
    d.mean_s = mean(samples);
    d.sd_s = std::max(stddev_pop(samples), cfg.duration_sd_floor_frames * dt);
    d.min_s = std::max(d.mean_s - 3.0 * d.sd_s, dt);
    d.max_s = d.mean_s + 3.0 * d.sd_s;
    if (!(d.min_s < d.mean_s)) d.min_s = d.mean_s / 2.0;
    model.durations[static_cast<std::size_t>(s)] = d;
  }

  if (cfg.kind == ModelKind::hsmm) {
    model.transition = cyclic_transition_matrix();
  } else {
    model.transition = Mat4{};
    for (int s = 0; s < kNumStates; ++s) {
      const double mean_frames =
          std::max(1.0, model.durations[static_cast<std::size_t>(s)].mean_s * feature_rate);
      const double advance = 1.0 / mean_frames;
      model.transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(s)] = 1.0 - advance;
      model.transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(next_state(s))] = advance;
    }
  }

  // pooled frames per state
  std::vector<std::array<double, 4>> features;
  std::vector<int> frame_state;
  for (std::size_t r = 0; r < envelograms.size(); ++r) {
    for (std::size_t f = 0; f < envelograms[r].frames(); ++f) {
      features.push_back(envelograms[r].frame(f));
      frame_state.push_back(all_labels[r][f]);
    }
  }
  std::array<std::size_t, 4> counts{};
  for (int s : frame_state) ++counts[static_cast<std::size_t>(s)];
  for (int s = 0; s < kNumStates; ++s) {
    if (counts[static_cast<std::size_t>(s)] == 0)
      fail(ErrorCode::invalid_argument,
           std::string("state ") + heart_state_name(s) + " has no training frames (zero prior)");
    model.prior[static_cast<std::size_t>(s)] =
        static_cast<double>(counts[static_cast<std::size_t>(s)]) / static_cast<double>(frame_state.size());
  }

  if (cfg.emission == EmissionKind::gaussian) {
    for (int s = 0; s < kNumStates; ++s) {
      Vec4 mu{};
      for (std::size_t i = 0; i < features.size(); ++i) {
        if (frame_state[i] != s) continue;
        for (int k = 0; k < 4; ++k) mu[static_cast<std::size_t>(k)] += features[i][static_cast<std::size_t>(k)];
      }
      for (int k = 0; k < 4; ++k)
        mu[static_cast<std::size_t>(k)] /= static_cast<double>(counts[static_cast<std::size_t>(s)]);
      Mat4 cov{};
      for (std::size_t i = 0; i < features.size(); ++i) {
        if (frame_state[i] != s) continue;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            cov[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
                (features[i][static_cast<std::size_t>(a)] - mu[static_cast<std::size_t>(a)]) *
                (features[i][static_cast<std::size_t>(b)] - mu[static_cast<std::size_t>(b)]);
      }
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          cov[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] /=
              static_cast<double>(counts[static_cast<std::size_t>(s)]);
      for (int a = 0; a < 4; ++a)
        cov[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] += cfg.cov_regularization;
      model.mu[static_cast<std::size_t>(s)] = mu;
      model.cov[static_cast<std::size_t>(s)] = cov;
    }
  } else {
    for (int s = 0; s < kNumStates; ++s) {
      std::vector<int> y(frame_state.size());
      for (std::size_t i = 0; i < frame_state.size(); ++i) y[i] = frame_state[i] == s ? 1 : -1;
      const LogisticFit fit =
          fit_logistic_binary(features, y, cfg.logistic_l2, cfg.logistic_tol, cfg.logistic_max_iter);
      model.weights[static_cast<std::size_t>(s)] = fit.w;
    }
  }

  validate_model(model);
  return model;
}

void scale_durations_to_expected_hr(HsmmModel& model, double hr_lo_bpm, double hr_hi_bpm) {
  if (!(hr_lo_bpm > 0.0) || !(hr_hi_bpm > hr_lo_bpm))
    fail(ErrorCode::invalid_argument, "bad expected heart-rate range");
  double cycle = 0.0;
  for (const DurationModel& d : model.durations) cycle += d.mean_s;
  const double target_cycle = 60.0 / (0.5 * (hr_lo_bpm + hr_hi_bpm));
  const double k = target_cycle / cycle;
  for (DurationModel& d : model.durations) {
    d.mean_s *= k;
    d.sd_s *= k;
    d.min_s *= k;
    d.max_s *= k;
  }
  model.expected_hr_lo = hr_lo_bpm;
  model.expected_hr_hi = hr_hi_bpm;
}

std::vector<std::array<double, 4>> emission_log_likelihood(const HsmmModel& model, const Envelogram& env) {
  const std::size_t frames = env.frames();
  std::vector<std::array<double, 4>> logb(frames);

  if (model.emission == EmissionKind::gaussian) {
    std::array<GaussianParams, 4> params;
    for (int s = 0; s < kNumStates; ++s) params[static_cast<std::size_t>(s)] = invert_spd(model.cov[static_cast<std::size_t>(s)]);
    const double log2pi = std::log(2.0 * std::numbers::pi);
    for (std::size_t f = 0; f < frames; ++f) {
      const auto x = env.frame(f);
      for (int s = 0; s < kNumStates; ++s) {
        const auto& mu = model.mu[static_cast<std::size_t>(s)];
        const auto& gp = params[static_cast<std::size_t>(s)];
        double quad = 0.0;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            quad += (x[static_cast<std::size_t>(a)] - mu[static_cast<std::size_t>(a)]) *
                    gp.inv[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] *
                    (x[static_cast<std::size_t>(b)] - mu[static_cast<std::size_t>(b)]);
        logb[f][static_cast<std::size_t>(s)] = -0.5 * (4.0 * log2pi + gp.logdet + quad);
      }
    }
  } else {
    for (int s = 0; s < kNumStates; ++s)
      if (!(model.prior[static_cast<std::size_t>(s)] > 0.0))
        fail(ErrorCode::numeric, std::string("zero prior for state ") + heart_state_name(s) +
                                     "; Bayes correction undefined");
    for (std::size_t f = 0; f < frames; ++f) {
      const auto x = env.frame(f);
      double raw[4];
      double total = 0.0;
      for (int s = 0; s < kNumStates; ++s) {
        const auto& w = model.weights[static_cast<std::size_t>(s)];
        double z = w[4];
        for (int k = 0; k < 4; ++k) z += w[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
        raw[s] = sigmoid(z);
        total += raw[s];
      }
      for (int s = 0; s < kNumStates; ++s) {
        const double posterior = std::max(raw[s] / std::max(total, 1e-300), 1e-12);
        // posterior / prior is the likelihood up to a state-independent factor
        logb[f][static_cast<std::size_t>(s)] =
            std::log(posterior) - std::log(model.prior[static_cast<std::size_t>(s)]);
      }
    }
  }
  return logb;
}

namespace {

constexpr double kNegInf = -1e300;

struct DurationTable {
  int d_min = 1, d_max = 1;
  std::vector<double> log_p;        // index d - d_min, normalised over [d_min, d_max]
  std::vector<double> log_survival; // log sum_{d' >= d} p(d'), index d - 1 for d in [1, d_max]
};

DurationTable build_duration_table(const DurationModel& d, double feature_rate) {
  DurationTable table;
  table.d_min = std::max(1, static_cast<int>(std::lround(d.min_s * feature_rate)));
  table.d_max = std::max(table.d_min, static_cast<int>(std::lround(d.max_s * feature_rate)));
  const double dt = 1.0 / feature_rate;
  std::vector<double> p(static_cast<std::size_t>(table.d_max - table.d_min + 1));
  double total = 0.0;
  for (int dd = table.d_min; dd <= table.d_max; ++dd) {
    const double t = dd * dt;
    const double z = (t - d.mean_s) / d.sd_s;
    p[static_cast<std::size_t>(dd - table.d_min)] = std::exp(-0.5 * z * z);
    total += p[static_cast<std::size_t>(dd - table.d_min)];
  }
  table.log_p.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    table.log_p[i] = p[i] > 0.0 && total > 0.0 ? std::log(p[i] / total) : kNegInf;
  table.log_survival.assign(static_cast<std::size_t>(table.d_max), kNegInf);
  double tail = 0.0;
  for (int dd = table.d_max; dd >= 1; --dd) {
    if (dd >= table.d_min) tail += p[static_cast<std::size_t>(dd - table.d_min)] / total;
    table.log_survival[static_cast<std::size_t>(dd - 1)] = tail > 0.0 ? std::log(tail) : kNegInf;
  }
  return table;
}

} // namespace

StateSequence extended_viterbi(const HsmmModel& model, const Envelogram& env) {
  validate_model(model);
  if (std::abs(model.feature_rate - env.feature_rate) > 1e-9)
    fail(ErrorCode::invalid_argument, "model and envelogram feature rates differ");
  const std::size_t T = env.frames();
  if (T == 0) fail(ErrorCode::invalid_argument, "empty envelogram");
  double min_state_dur = 1e300;
  for (const DurationModel& d : model.durations) min_state_dur = std::min(min_state_dur, d.min_s);
  if (static_cast<double>(T) / model.feature_rate < min_state_dur)
    fail(ErrorCode::invalid_argument, "envelogram shorter than the minimum state duration");

  const std::vector<std::array<double, 4>> logb = emission_log_likelihood(model, env);
  std::array<DurationTable, 4> dur;
  for (int s = 0; s < kNumStates; ++s)
    dur[static_cast<std::size_t>(s)] = build_duration_table(model.durations[static_cast<std::size_t>(s)], model.feature_rate);

  // cumulative emission scores: cum[s][t] = sum of logb over frames [0, t)
  std::array<std::vector<double>, 4> cum;
  for (int s = 0; s < kNumStates; ++s) {
    cum[static_cast<std::size_t>(s)].assign(T + 1, 0.0);
    for (std::size_t t = 0; t < T; ++t)
      cum[static_cast<std::size_t>(s)][t + 1] =
          cum[static_cast<std::size_t>(s)][t] + logb[t][static_cast<std::size_t>(s)];
  }
  auto emit = [&](int s, std::size_t lo, std::size_t hi) { // frames [lo, hi)
    return cum[static_cast<std::size_t>(s)][hi] - cum[static_cast<std::size_t>(s)][lo];
  };

  const double log_pi = -std::log(4.0); // uniform phase prior

  // delta[t][s]: best score over segmentations of frames [0, t) where a
  // completed run of s ends at t; boundary starts use the survival function
  std::vector<std::array<double, 4>> delta(T + 1);
  std::vector<std::array<int, 4>> choice(T + 1); // chosen duration, 0 = none
  for (auto& row : delta) row.fill(kNegInf);
  for (auto& row : choice) row.fill(0);

  for (std::size_t t = 1; t <= T; ++t) {
    for (int s = 0; s < kNumStates; ++s) {
      const DurationTable& ds = dur[static_cast<std::size_t>(s)];
      double best = kNegInf;
      int best_d = 0;
      // run starting at frame 0: partially observed duration (onset before
      // the window), scored with the survival function
      if (t <= static_cast<std::size_t>(ds.d_max)) {
        const double sc = log_pi + ds.log_survival[t - 1] + emit(s, 0, t);
        if (sc > best || (sc == best && static_cast<int>(t) > best_d)) {
          best = sc;
          best_d = static_cast<int>(t);
        }
      }
      // interior run of exact duration d preceded by the cyclic predecessor
      const int prev = (s + kNumStates - 1) % kNumStates;
      const int d_hi = std::min<int>(ds.d_max, static_cast<int>(t) - 1);
      for (int d = ds.d_min; d <= d_hi; ++d) {
        const double base = delta[t - static_cast<std::size_t>(d)][static_cast<std::size_t>(prev)];
        if (base <= kNegInf) continue;
        const double sc = base + ds.log_p[static_cast<std::size_t>(d - ds.d_min)] +
                          emit(s, t - static_cast<std::size_t>(d), t);
        if (sc > best || (sc == best && d > best_d)) {
          best = sc;
          best_d = d;
        }
      }
      delta[t][static_cast<std::size_t>(s)] = best;
      choice[t][static_cast<std::size_t>(s)] = best_d;
    }
  }

  // final run may end beyond the window: survival-scored last segment
  double best_final = kNegInf;
  int final_state = -1, final_d = 0;
  for (int s = 0; s < kNumStates; ++s) {
    const DurationTable& ds = dur[static_cast<std::size_t>(s)];
    const int prev = (s + kNumStates - 1) % kNumStates;
    // whole window in one run (both ends partial)
    if (T <= static_cast<std::size_t>(ds.d_max)) {
      const double sc = log_pi + ds.log_survival[T - 1] + emit(s, 0, T);
      if (sc > best_final || (sc == best_final && static_cast<int>(T) > final_d)) {
        best_final = sc;
        final_state = s;
        final_d = static_cast<int>(T);
      }
    }
    const int d_hi = std::min<int>(ds.d_max, static_cast<int>(T) - 1);
    for (int d = 1; d <= d_hi; ++d) {
      const double base = delta[T - static_cast<std::size_t>(d)][static_cast<std::size_t>(prev)];
      if (base <= kNegInf) continue;
      const double sc = base + ds.log_survival[static_cast<std::size_t>(d - 1)] +
                        emit(s, T - static_cast<std::size_t>(d), T);
      if (sc > best_final || (sc == best_final && d > final_d)) {
        best_final = sc;
        final_state = s;
        final_d = d;
      }
    }
  }
  if (final_state < 0 || best_final <= kNegInf)
    fail(ErrorCode::numeric, "no feasible state path (durations inconsistent with sequence length)");

  StateSequence seq;
  seq.feature_rate = model.feature_rate;
  seq.states.assign(T, kS1);
  std::size_t t = T;
  int s = final_state;
  int d = final_d;
  while (t > 0) {
    for (std::size_t f = t - static_cast<std::size_t>(d); f < t; ++f) seq.states[f] = s;
    t -= static_cast<std::size_t>(d);
    if (t == 0) break;
    s = (s + kNumStates - 1) % kNumStates;
    d = choice[t][static_cast<std::size_t>(s)];
    if (d <= 0) fail(ErrorCode::numeric, "backtracking failed");
  }
  return seq;
}

StateSequence plain_viterbi(const HsmmModel& model, const Envelogram& env) {
  validate_model(model);
  const std::size_t T = env.frames();
  if (T == 0) fail(ErrorCode::invalid_argument, "empty envelogram");
  const std::vector<std::array<double, 4>> logb = emission_log_likelihood(model, env);

  std::array<double, 4> loga[4];
  for (int i = 0; i < kNumStates; ++i)
    for (int j = 0; j < kNumStates; ++j)
      loga[i][static_cast<std::size_t>(j)] =
          model.transition[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > 0.0
              ? std::log(model.transition[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
              : kNegInf;

  std::vector<std::array<double, 4>> delta(T);
  std::vector<std::array<int, 4>> back(T);
  for (int s = 0; s < kNumStates; ++s) {
    delta[0][static_cast<std::size_t>(s)] = -std::log(4.0) + logb[0][static_cast<std::size_t>(s)];
    back[0][static_cast<std::size_t>(s)] = -1;
  }
  for (std::size_t t = 1; t < T; ++t) {
    for (int j = 0; j < kNumStates; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (int i = 0; i < kNumStates; ++i) {
        const double sc = delta[t - 1][static_cast<std::size_t>(i)] + loga[i][static_cast<std::size_t>(j)];
        if (sc > best) {
          best = sc;
          arg = i;
        }
      }
      delta[t][static_cast<std::size_t>(j)] = best + logb[t][static_cast<std::size_t>(j)];
      back[t][static_cast<std::size_t>(j)] = arg;
    }
  }
  StateSequence seq;
  seq.feature_rate = model.feature_rate;
  seq.states.assign(T, 0);
  int s = 0;
  for (int j = 1; j < kNumStates; ++j)
    if (delta[T - 1][static_cast<std::size_t>(j)] > delta[T - 1][static_cast<std::size_t>(s)]) s = j;
  for (std::size_t t = T; t-- > 0;) {
    seq.states[t] = s;
    if (t > 0) s = back[t][static_cast<std::size_t>(s)];
  }
  return seq;
}

EventList states_to_detections(const StateSequence& seq, const std::string& record_id,
                               const std::string& method) {
  std::vector<Event> events;
  std::size_t start = 0;
  for (std::size_t f = 1; f <= seq.states.size(); ++f) {
    if (f == seq.states.size() || seq.states[f] != seq.states[start]) {
      const int state = seq.states[start];
      if (state == kS1 || state == kS2) {
        const double mid = 0.5 * static_cast<double>(start + f - 1) / seq.feature_rate;
        events.push_back(Event{mid, state == kS1 ? SoundKind::S1 : SoundKind::S2});
      }
      start = f;
    }
  }
  return make_detections(record_id, method, std::move(events));
}

} // namespace fpcg
