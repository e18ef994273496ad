#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fpcg/bench.hpp"
#include "fpcg/eval.hpp"
#include "fpcg/filter.hpp"
#include "fpcg/hsmm.hpp"
#include "fpcg/mathutil.hpp"
#include "fpcg/rng.hpp"
#include "fpcg/synth.hpp"

using namespace fpcg;

namespace {

// independent scorer for tiny instances: enumerate every legal segmentation
// and score it straight from the model definition
struct TinyModel {
  int d_min[4], d_max[4];
  double mean_s[4], sd_s[4];
  std::vector<std::array<double, 4>> logb; // per frame (feature rate 1)
};

struct OracleBest {
  double score = -1e300;
  std::vector<int> states;
};

double oracle_logp(const TinyModel& m, int s, int d) {
  double total = 0.0;
  for (int dd = m.d_min[s]; dd <= m.d_max[s]; ++dd) {
    const double z = (dd - m.mean_s[s]) / m.sd_s[s];
    total += std::exp(-0.5 * z * z);
  }
  const double zz = (d - m.mean_s[s]) / m.sd_s[s];
  return std::log(std::exp(-0.5 * zz * zz) / total);
}

double oracle_survival(const TinyModel& m, int s, int d) {
  double total = 0.0, tail = 0.0;
  for (int dd = m.d_min[s]; dd <= m.d_max[s]; ++dd) {
    const double z = (dd - m.mean_s[s]) / m.sd_s[s];
    const double p = std::exp(-0.5 * z * z);
    total += p;
    if (dd >= d) tail += p;
  }
  return tail > 0.0 ? std::log(tail / total) : -1e300;
}

void oracle_rec(const TinyModel& m, int T, int t, int s, double score, std::vector<int>& states,
                OracleBest& best) {
  for (int d = 1; d <= std::min(m.d_max[s], T - t); ++d) {
    double run_score;
    if (t == 0 && t + d == T) {
      run_score = oracle_survival(m, s, d); // single run spans the window
    } else if (t == 0) {
      run_score = oracle_survival(m, s, d); // onset before the window
    } else if (t + d == T) {
      run_score = oracle_survival(m, s, d); // ending after the window
    } else {
      if (d < m.d_min[s]) continue;
      run_score = oracle_logp(m, s, d);
    }
    if (run_score <= -1e299) continue;
    double emit = 0.0;
    for (int f = t; f < t + d; ++f) emit += m.logb[static_cast<std::size_t>(f)][static_cast<std::size_t>(s)];
    for (int f = t; f < t + d; ++f) states[static_cast<std::size_t>(f)] = s;
    const double total = score + run_score + emit;
    if (t + d == T) {
      if (total > best.score) {
        best.score = total;
        best.states = states;
      }
    } else {
      oracle_rec(m, T, t + d, (s + 1) % 4, total, states, best);
    }
  }
}

// model + envelogram with the emissions baked in through identity-covariance
// gaussians, so the oracle can recompute them exactly
struct TinyInstance {
  HsmmModel model;
  Envelogram env;
  TinyModel tiny;
};

TinyInstance make_tiny(Rng& rng, int T) {
  TinyInstance inst;
  HsmmModel& model = inst.model;
  model.kind = ModelKind::hsmm;
  model.emission = EmissionKind::gaussian;
  model.feature_rate = 1.0;
  model.transition = cyclic_transition_matrix();
  for (int s = 0; s < 4; ++s) {
    const int dmin = 1 + static_cast<int>(rng.below(2));
    const int dmax = dmin + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(4 - dmin)));
    DurationModel d;
    d.min_s = dmin;
    d.max_s = dmax;
    d.mean_s = rng.uniform(dmin + 0.1, dmax - 0.1);
    d.sd_s = rng.uniform(0.4, 1.5);
    model.durations[static_cast<std::size_t>(s)] = d;
    inst.tiny.d_min[s] = dmin;
    inst.tiny.d_max[s] = dmax;
    inst.tiny.mean_s[s] = d.mean_s;
    inst.tiny.sd_s[s] = d.sd_s;
    for (int k = 0; k < 4; ++k) {
      model.mu[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] = rng.uniform(-1.5, 1.5);
      for (int k2 = 0; k2 < 4; ++k2)
        model.cov[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)][static_cast<std::size_t>(k2)] =
            k == k2 ? 1.0 : 0.0;
    }
  }
  inst.env.feature_rate = 1.0;
  for (auto& ch : inst.env.channels) ch.resize(static_cast<std::size_t>(T));
  for (int f = 0; f < T; ++f)
    for (int c = 0; c < 4; ++c)
      inst.env.channels[static_cast<std::size_t>(c)][static_cast<std::size_t>(f)] = rng.uniform(-2.0, 2.0);

  // oracle emissions: identity-covariance gaussian log density
  const double log2pi = std::log(2.0 * std::numbers::pi);
  inst.tiny.logb.resize(static_cast<std::size_t>(T));
  for (int f = 0; f < T; ++f) {
    for (int s = 0; s < 4; ++s) {
      double quad = 0.0;
      for (int k = 0; k < 4; ++k) {
        const double d = inst.env.channels[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)] -
                         model.mu[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)];
        quad += d * d;
      }
      inst.tiny.logb[static_cast<std::size_t>(f)][static_cast<std::size_t>(s)] =
          -0.5 * (4.0 * log2pi + quad);
    }
  }
  return inst;
}

} // namespace

TEST_CASE("extended viterbi equals exhaustive enumeration on tiny instances") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int T = 12;
    const TinyInstance inst = make_tiny(rng, T);
    const StateSequence got = extended_viterbi(inst.model, inst.env);

    OracleBest best;
    std::vector<int> states(static_cast<std::size_t>(T), -1);
    for (int s0 = 0; s0 < 4; ++s0) oracle_rec(inst.tiny, T, 0, s0, -std::log(4.0), states, best);
    REQUIRE(best.score > -1e299);
    REQUIRE(got.states.size() == best.states.size());
    for (std::size_t f = 0; f < got.states.size(); ++f) CHECK(got.states[f] == best.states[f]);
  }
}

TEST_CASE("one-hot emissions reproduce the true cyclic sequence") {
  Rng rng(31337);
  const int T = 24;
  TinyInstance inst = make_tiny(rng, T);
  // construct a legal cyclic truth and pin the observations to the state means
  std::vector<int> truth;
  int s = 1; // start mid-cycle on purpose
  while (static_cast<int>(truth.size()) < T) {
    const int d = inst.tiny.d_min[s] +
                  static_cast<int>(rng.below(static_cast<std::uint64_t>(inst.tiny.d_max[s] - inst.tiny.d_min[s] + 1)));
    for (int k = 0; k < d && static_cast<int>(truth.size()) < T; ++k) truth.push_back(s);
    s = (s + 1) % 4;
  }
  for (int s2 = 0; s2 < 4; ++s2)
    for (int k = 0; k < 4; ++k)
      inst.model.mu[static_cast<std::size_t>(s2)][static_cast<std::size_t>(k)] = s2 == k ? 8.0 : 0.0;
  for (int f = 0; f < T; ++f)
    for (int c = 0; c < 4; ++c)
      inst.env.channels[static_cast<std::size_t>(c)][static_cast<std::size_t>(f)] =
          truth[static_cast<std::size_t>(f)] == c ? 8.0 : 0.0;
  const StateSequence got = extended_viterbi(inst.model, inst.env);
  for (int f = 0; f < T; ++f) CHECK(got.states[static_cast<std::size_t>(f)] == truth[static_cast<std::size_t>(f)]);
}

TEST_CASE("decoded paths only use cyclic transitions") {
  Rng rng(777);
  for (int trial = 0; trial < 20; ++trial) {
    const TinyInstance inst = make_tiny(rng, 12);
    const StateSequence seq = extended_viterbi(inst.model, inst.env);
    for (std::size_t f = 1; f < seq.states.size(); ++f) {
      const int a = seq.states[f - 1], b = seq.states[f];
      CHECK((b == a || b == next_state(a)));
    }
  }
}

TEST_CASE("states_to_detections midpoints") {
  StateSequence seq;
  seq.feature_rate = 50.0;
  seq.states = {kS1, kS1, kS1, kS1, kSystole, kSystole, kSystole, kSystole, kSystole,
                kS2, kS2, kS2};
  const EventList dets = states_to_detections(seq, "r", "m");
  REQUIRE(dets.items.size() == 2);
  CHECK(dets.items[0].t == doctest::Approx(0.03));
  CHECK(dets.items[0].kind == SoundKind::S1);
  CHECK(dets.items[1].t == doctest::Approx(0.20));
  CHECK(dets.items[1].kind == SoundKind::S2);

  StateSequence dia;
  dia.feature_rate = 50.0;
  dia.states.assign(40, kDiastole);
  CHECK(states_to_detections(dia, "r", "m").items.empty());
}

TEST_CASE("annotation round trip through states") {
  // labels -> one-hot states -> detections land within one frame
  const double rate = 50.0;
  const EventList ann = make_annotations(
      "r", {{0.50, SoundKind::S1}, {0.65, SoundKind::S2}, {0.93, SoundKind::S1}, {1.08, SoundKind::S2}});
  HsmmTrainConfig cfg;
  const std::vector<int> states = states_from_annotations(ann, 80, rate, cfg);
  StateSequence seq;
  seq.feature_rate = rate;
  seq.states = states;
  const EventList dets = states_to_detections(seq, "r", "m");
  REQUIRE(dets.items.size() == ann.items.size());
  for (std::size_t i = 0; i < dets.items.size(); ++i)
    CHECK(std::abs(dets.items[i].t - ann.items[i].t) <= 1.0 / rate);
}

TEST_CASE("state labelling fills gaps by cycle order") {
  const EventList ann = make_annotations("r", {{0.50, SoundKind::S1}, {0.65, SoundKind::S2}});
  HsmmTrainConfig cfg;
  const std::vector<int> states = states_from_annotations(ann, 60, 50.0, cfg);
  CHECK(states[0] == kDiastole);            // before the first S1
  CHECK(states[25] == kS1);                 // 0.50 s
  CHECK(states[29] == kSystole);            // between the sounds
  CHECK(states[33] == kS2);                 // 0.65 s
  CHECK(states[59] == kDiastole);           // tail
}

namespace {

struct TrainingSet {
  std::vector<Record> records;
  std::vector<EventList> annotations;
};

TrainingSet make_training_set(std::size_t count, double duration, std::uint64_t seed0) {
  TrainingSet set;
  for (std::size_t i = 0; i < count; ++i) {
    SimConfig cfg;
    cfg.duration_s = duration;
    cfg.base_fhr = 140.0;
    cfg.rng_seed = seed0 + i;
    cfg.id = "train" + std::to_string(i);
    SimResult res = simulate_record(cfg);
    set.records.push_back(std::move(res.record));
    set.annotations.push_back(std::move(res.annotations));
  }
  return set;
}

} // namespace

TEST_CASE("envelogram shape and normalisation contract") {
  SimConfig cfg;
  cfg.duration_s = 20.0;
  cfg.rng_seed = 404;
  const SimResult res = simulate_record(cfg);
  const MethodConfig mc = make_method_config(Method::lr_hsmm, "mueller");
  const Envelogram env = preprocess_and_envelogram(res.record, mc.segmenter_prep);
  const std::size_t expected =
      static_cast<std::size_t>(std::ceil(res.record.duration_s() * env.feature_rate - 1e-9));
  for (const auto& ch : env.channels) {
    REQUIRE(ch.size() == expected);
    double m = 0.0;
    for (double v : ch) m += v;
    m /= static_cast<double>(ch.size());
    double sd = 0.0;
    for (double v : ch) sd += (v - m) * (v - m);
    sd = std::sqrt(sd / static_cast<double>(ch.size()));
    CHECK(std::abs(m) < 1e-9);
    CHECK(std::abs(sd - 1.0) < 1e-9);
  }
}

TEST_CASE("every envelogram channel peaks near the first heart sounds") {
  SimConfig cfg;
  cfg.duration_s = 30.0;
  cfg.rng_seed = 405;
  const SimResult res = simulate_record(cfg);
  const MethodConfig mc = make_method_config(Method::lr_hsmm, "mueller");
  const Envelogram env = preprocess_and_envelogram(res.record, mc.segmenter_prep);
  const auto s1 = res.annotations.times_of(SoundKind::S1);
  for (std::size_t c = 0; c < Envelogram::kChannels; ++c) {
    const auto& ch = env.channels[c];
    std::size_t near = 0;
    for (double t : s1) {
      // a local maximum within 30 ms of the label
      const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(std::llround(t * env.feature_rate));
      const std::ptrdiff_t span = static_cast<std::ptrdiff_t>(std::llround(0.03 * env.feature_rate));
      bool found = false;
      for (std::ptrdiff_t f = std::max<std::ptrdiff_t>(1, center - span);
           f <= center + span && f + 1 < static_cast<std::ptrdiff_t>(ch.size()); ++f) {
        if (ch[static_cast<std::size_t>(f)] > ch[static_cast<std::size_t>(f) - 1] &&
            ch[static_cast<std::size_t>(f)] >= ch[static_cast<std::size_t>(f) + 1]) {
          found = true;
          break;
        }
      }
      if (found) ++near;
    }
    CHECK(static_cast<double>(near) >= 0.9 * static_cast<double>(s1.size()));
  }
}

TEST_CASE("filter coefficient contract") {
  // expanded polynomials share the cascaded sections' response and a0 is one
  const FilterSpec bp = design_butterworth(FilterKind::bandpass, 4, {15.0, 55.0}, 333.0);
  CHECK(bp.a[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bp.b.size() == bp.a.size());
  CHECK(bp.max_pole_magnitude() < 1.0);
}

TEST_CASE("training recovers the cycle length and the cyclic matrix") {
  const TrainingSet set = make_training_set(4, 20.0, 500);
  MethodConfig cfg = make_method_config(Method::lr_hsmm, "mueller");
  const TrainedSegmenter seg = train_segmenter(set.records, set.annotations, cfg);

  double cycle = 0.0;
  for (const DurationModel& d : seg.model.durations) cycle += d.mean_s;
  CHECK(cycle == doctest::Approx(60.0 / 140.0).epsilon(0.10));

  const Mat4 expected = cyclic_transition_matrix();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(seg.model.transition[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ==
            expected[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);

  // training-fit sanity: mean posterior of the true state above one half
  double post_sum = 0.0;
  std::size_t post_n = 0;
  for (std::size_t r = 0; r < set.records.size(); ++r) {
    const Envelogram env = preprocess_and_envelogram(set.records[r], seg.preprocess);
    const std::vector<int> truth =
        states_from_annotations(set.annotations[r], env.frames(), env.feature_rate, cfg.train);
    for (std::size_t f = 0; f < env.frames(); ++f) {
      const auto x = env.frame(f);
      double raw[4], total = 0.0;
      for (int s = 0; s < 4; ++s) {
        const auto& w = seg.model.weights[static_cast<std::size_t>(s)];
        double z = w[4];
        for (int k = 0; k < 4; ++k) z += w[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
        raw[s] = 1.0 / (1.0 + std::exp(-z));
        total += raw[s];
      }
      post_sum += raw[truth[f]] / total;
      ++post_n;
    }
  }
  CHECK(post_sum / static_cast<double>(post_n) > 0.5);
}

TEST_CASE("hmm training keeps the sparse transition structure") {
  const TrainingSet set = make_training_set(2, 20.0, 700);
  MethodConfig cfg = make_method_config(Method::hsmm, "schmidt");
  cfg.train.kind = ModelKind::hmm;
  const TrainedSegmenter seg = train_segmenter(set.records, set.annotations, cfg);
  for (int i = 0; i < 4; ++i) {
    double row = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double v = seg.model.transition[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      row += v;
      if (j != i && j != next_state(i)) CHECK(v == 0.0);
    }
    CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("training requires both label kinds") {
  TrainingSet set = make_training_set(2, 15.0, 800);
  // drop every S2 from one record
  std::vector<Event> s1only;
  for (const Event& e : set.annotations[0].items)
    if (e.kind == SoundKind::S1) s1only.push_back(e);
  set.annotations[0] = make_annotations(set.annotations[0].record_id, s1only);
  const MethodConfig cfg = make_method_config(Method::lr_hsmm, "mueller");
  CHECK_THROWS_AS(train_segmenter(set.records, set.annotations, cfg), Error);
}

TEST_CASE("logistic training loss is non-increasing") {
  Rng rng(99);
  std::vector<std::array<double, 4>> x;
  std::vector<int> y;
  for (int i = 0; i < 400; ++i) {
    std::array<double, 4> f{rng.gauss(), rng.gauss(), rng.gauss(), rng.gauss()};
    const int label = f[0] + 0.5 * f[1] > 0.0 ? 1 : -1;
    x.push_back(f);
    y.push_back(label);
  }
  const LogisticFit fit = fit_logistic_binary(x, y, 1e-4, 1e-6, 500);
  for (std::size_t i = 1; i < fit.loss_trace.size(); ++i)
    CHECK(fit.loss_trace[i] <= fit.loss_trace[i - 1] + 1e-12);
}

TEST_CASE("duration rescaling moves the cycle to the target rate") {
  const TrainingSet set = make_training_set(2, 20.0, 900);
  const MethodConfig cfg = make_method_config(Method::lr_hsmm, "mueller");
  TrainedSegmenter seg = train_segmenter(set.records, set.annotations, cfg);
  scale_durations_to_expected_hr(seg.model, 100.0, 140.0);
  double cycle = 0.0;
  for (const DurationModel& d : seg.model.durations) cycle += d.mean_s;
  CHECK(cycle == doctest::Approx(60.0 / 120.0).epsilon(1e-9));
}

TEST_CASE("model json round trip") {
  const TrainingSet set = make_training_set(2, 15.0, 1000);
  const MethodConfig cfg = make_method_config(Method::lr_hsmm, "mueller");
  const TrainedSegmenter seg = train_segmenter(set.records, set.annotations, cfg);
  const TrainedSegmenter back = segmenter_from_json(segmenter_to_json(seg));
  CHECK(back.model.feature_rate == seg.model.feature_rate);
  for (int s = 0; s < 4; ++s) {
    CHECK(back.model.durations[static_cast<std::size_t>(s)].mean_s ==
          seg.model.durations[static_cast<std::size_t>(s)].mean_s);
    for (int k = 0; k < 5; ++k)
      CHECK(back.model.weights[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] ==
            seg.model.weights[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)]);
  }
  CHECK(back.preprocess.band_lo_hz == seg.preprocess.band_lo_hz);
}

TEST_CASE("fold partition covers every record exactly once") {
  const auto folds = make_folds(50, 10, 7);
  REQUIRE(folds.size() == 10);
  std::vector<int> seen(50, 0);
  for (const auto& f : folds) {
    CHECK(f.test_indices.size() == 5);
    for (std::size_t idx : f.test_indices) ++seen[idx];
  }
  for (int c : seen) CHECK(c == 1);
  // reproducible for a fixed seed
  const auto again = make_folds(50, 10, 7);
  for (std::size_t i = 0; i < folds.size(); ++i) CHECK(folds[i].test_indices == again[i].test_indices);
  const auto other = make_folds(50, 10, 8);
  bool all_same = true;
  for (std::size_t i = 0; i < folds.size(); ++i)
    if (folds[i].test_indices != other[i].test_indices) all_same = false;
  CHECK(!all_same);
}
