#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "graspid/explore.hpp"
#include "graspid/features.hpp"
#include "graspid/fixtures.hpp"
#include "graspid/grasp.hpp"
#include "graspid/recognizer.hpp"
#include "graspid/svgplot.hpp"

namespace graspid {

struct HarnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::vector<std::string> objects;  // fixture names; sorted before use
  int grid_size = 360;               // L
  int samples_per_grasp = 50;        // N
  NoiseModel noise;                  // rng_seed is derived from `seed`
  Quantizer quantizer;
  std::vector<double> betas = {0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
  int trials_per_object = 100;
  std::uint64_t seed = 0;
  Weighting weighting = Weighting::Count;
  NoiseMode noise_mode = NoiseMode::ContactSpace;
  int max_grasps = 500;
  bool hidden_rotation = true;   // passive trials: random object rotation per trial
  bool exclude_visited = false;
  int workers = 1;
  HandModel hand;

  void validate() const {
    if (objects.size() < 2) throw HarnessError("need at least 2 objects");
    if (trials_per_object < 1) throw HarnessError("trials must be >= 1");
    if (max_grasps < 1) throw HarnessError("max-grasp cap must be >= 1");
    for (double b : betas)
      if (!(b > 0.0 && b < 1.0)) throw HarnessError("beta values must be in (0,1)");
  }
};

struct TraceRow {
  int t = 0;
  int pose_index = 0;
  std::vector<double> likelihood;
  std::vector<double> posterior;
};

struct TrialRecord {
  std::string truth;
  Method method = Method::PN;
  Policy policy = Policy::Passive;
  double beta = 0.0;
  int trial_id = 0;
  int grasps = 0;
  std::string decided;  // empty when capped/undecided
  bool correct = false;
  bool capped = false;
  std::vector<TraceRow> trace;  // filled only when tracing is on
};

/// Everything a trial needs, shared across the sweep.
struct TrainedSet {
  std::vector<std::string> objects;  // name-sorted
  std::vector<PoseGrid> grids;       // same order
  std::vector<ObjectTable> tables;
  PosePredictionTable predictions;
};

inline TrainedSet train_set(const std::vector<PoseGrid>& grids_in,
                            const ExperimentConfig& cfg, Method method) {
  TrainedSet set;
  set.grids = grids_in;
  std::sort(set.grids.begin(), set.grids.end(),
            [](const PoseGrid& a, const PoseGrid& b) {
              return a.object_name < b.object_name;
            });
  TrainConfig tc;
  tc.noise = cfg.noise;
  tc.noise.rng_seed = mix_seed({cfg.seed, 0x7261696eULL});  // training stream base
  tc.samples_per_grasp = cfg.samples_per_grasp;
  tc.quantizer = cfg.quantizer;
  tc.method = method;
  tc.noise_mode = cfg.noise_mode;
  set.tables = train(set.grids, tc);
  for (const auto& g : set.grids) set.objects.push_back(g.object_name);
  set.predictions = build_predictions(set.tables, cfg.weighting);
  return set;
}

/// One identification trial: random first pose, then the policy's choices,
/// until the posterior clears beta or the grasp cap is hit.
inline TrialRecord run_trial(std::size_t truth_index, Method method, Policy policy,
                             double beta, const TrainedSet& set,
                             const ExperimentConfig& cfg, int trial_id,
                             bool with_trace = false) {
  const PoseGrid& truth_grid = set.grids.at(truth_index);
  const int L = truth_grid.grid_size;
  // The stream depends on (seed, truth, method, policy, trial) but not beta,
  // so beta sweeps share traces and the stop time is monotone in beta.
  std::uint64_t trial_seed =
      mix_seed({cfg.seed, 0x7472ULL, static_cast<std::uint64_t>(truth_index),
                static_cast<std::uint64_t>(method), static_cast<std::uint64_t>(policy),
                static_cast<std::uint64_t>(trial_id)});
  ExplorationState state(policy, mix_seed({trial_seed, 0x706f7365ULL}));
  state.exclude_visited = cfg.exclude_visited;
  Rng aux(mix_seed({trial_seed, 0x617578ULL}));

  // Hidden object rotation: in passive mode the commanded pose and the pose
  // actually realized on the object differ by a per-trial offset the
  // recognizer never sees.
  int rotation_offset = 0;
  if (policy == Policy::Passive && cfg.hidden_rotation)
    rotation_offset = static_cast<int>(aux.next_below(static_cast<std::uint64_t>(L)));

  TrialRecord rec;
  rec.truth = truth_grid.object_name;
  rec.method = method;
  rec.policy = policy;
  rec.beta = beta;
  rec.trial_id = trial_id;

  Posterior posterior = Posterior::uniform(set.objects);
  for (int t = 1; t <= cfg.max_grasps; ++t) {
    // Choose the next commanded pose; resolve misses per policy.
    std::optional<GraspObservation> obs;
    int realized_pose = -1;
    for (int attempt = 0; attempt < 64 * L && !obs; ++attempt) {
      int commanded;
      if (policy == Policy::Active && t > 1)
        commanded = next_pose_active(posterior, set.predictions, state);
      else
        commanded = next_pose_passive(state, L);
      realized_pose = policy == Policy::Passive ? (commanded + rotation_offset) % L
                                                : commanded;
      const auto& cell = truth_grid.poses[static_cast<std::size_t>(realized_pose)];
      if (cell) {
        obs = *cell;
        state.visited.insert(commanded);
      } else if (policy == Policy::Active) {
        state.blocked.insert(commanded);  // skip this pose from now on
      }
      // passive: just redraw
    }
    if (!obs) throw HarnessError("no reachable pose for " + rec.truth);

    // Fresh test noise each grasp: re-seed the noise model per (trial, t).
    NoiseModel test_noise = cfg.noise;
    test_noise.rng_seed = mix_seed({trial_seed, static_cast<std::uint64_t>(t)});
    std::vector<FeatureKey> keys;
    keys.reserve(static_cast<std::size_t>(cfg.samples_per_grasp) * 3);
    for (int s = 0; s < cfg.samples_per_grasp; ++s) {
      auto sample = keys_for_sample(*obs, test_noise, s, NoiseStream::Test,
                                    cfg.quantizer, method, cfg.noise_mode);
      keys.insert(keys.end(), sample.begin(), sample.end());
    }
    VoteTally votes = tally(keys, set.tables, cfg.weighting);
    posterior = bayes_update(posterior, votes);
    if (with_trace)
      rec.trace.push_back({t, realized_pose, votes.likelihood, posterior.probabilities});

    Decision d = decide(posterior, beta);
    if (d.decided) {
      rec.grasps = t;
      rec.decided = d.object;
      rec.correct = d.object == rec.truth;
      return rec;
    }
  }
  rec.grasps = cfg.max_grasps;
  rec.capped = true;
  rec.correct = false;
  return rec;
}

struct StatSummary {
  std::string object;  // or "all"
  Method method = Method::PN;
  Policy policy = Policy::Passive;
  double beta = 0.0;
  int min_grasps = 0;
  int max_grasps = 0;
  double avg_grasps = 0.0;
  double median_grasps = 0.0;
  double error_pct = 0.0;   // wrong decisions plus capped trials
  double capped_pct = 0.0;
};

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

inline std::vector<StatSummary> summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw HarnessError("no trial records to summarize");
  std::map<std::tuple<std::string, int, int, double>, std::vector<const TrialRecord*>>
      groups;
  for (const auto& r : records)
    groups[{r.truth, static_cast<int>(r.method), static_cast<int>(r.policy), r.beta}]
        .push_back(&r);
  std::vector<StatSummary> out;
  out.reserve(groups.size());
  for (const auto& [key, group] : groups) {
    StatSummary s;
    s.object = std::get<0>(key);
    s.method = static_cast<Method>(std::get<1>(key));
    s.policy = static_cast<Policy>(std::get<2>(key));
    s.beta = std::get<3>(key);
    std::vector<double> grasps;
    int wrong = 0, capped = 0;
    for (const auto* r : group) {
      grasps.push_back(static_cast<double>(r->grasps));
      if (!r->correct) ++wrong;
      if (r->capped) ++capped;
    }
    s.min_grasps = static_cast<int>(*std::min_element(grasps.begin(), grasps.end()));
    s.max_grasps = static_cast<int>(*std::max_element(grasps.begin(), grasps.end()));
    double sum = 0.0;
    for (double g : grasps) sum += g;
    s.avg_grasps = sum / static_cast<double>(grasps.size());
    s.median_grasps = median_of(grasps);
    s.error_pct = 100.0 * wrong / static_cast<double>(group.size());
    s.capped_pct = 100.0 * capped / static_cast<double>(group.size());
    out.push_back(s);
  }
  return out;
}

/// Full protocol sweep: objects x methods x policies x betas x trials.
/// Deterministic for a fixed seed regardless of worker count: every trial's
/// stream is derived from its identity, and results merge in task order.
inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg_in,
                                               const std::vector<PoseGrid>& grids) {
  ExperimentConfig cfg = cfg_in;
  cfg.validate();
  TrainedSet sets[2] = {train_set(grids, cfg, Method::PN),
                        train_set(grids, cfg, Method::P)};

  struct Task {
    Method method;
    Policy policy;
    double beta;
    std::size_t truth;
    int trial;
  };
  std::vector<Task> tasks;
  for (Method method : {Method::PN, Method::P})
    for (Policy policy : {Policy::Passive, Policy::Active})
      for (double beta : cfg.betas)
        for (std::size_t o = 0; o < sets[0].objects.size(); ++o)
          for (int trial = 0; trial < cfg.trials_per_object; ++trial)
            tasks.push_back({method, policy, beta, o, trial});

  std::vector<TrialRecord> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      const TrainedSet& set = sets[task.method == Method::PN ? 0 : 1];
      results[i] =
          run_trial(task.truth, task.method, task.policy, task.beta, set, cfg, task.trial);
    }
  };
  int n_workers = std::max(1, cfg.workers);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  return results;
}

/// Convenience: build the bundled fixture grids for a config.
inline std::vector<PoseGrid> build_fixture_grids(const ExperimentConfig& cfg) {
  std::vector<PoseGrid> grids;
  for (const auto& name : cfg.objects)
    grids.push_back(
        build_pose_grid(fixtures::make_fixture(name), name, cfg.grid_size, cfg.hand));
  return grids;
}

// ---------------------------------------------------------------------------
// CSV emission. Fixed formatting so identical records give identical bytes.

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline void emit_summary_csv(const std::vector<StatSummary>& summaries,
                             std::ostream& out) {
  out << "object,method,policy,beta,min,max,avg,median,error_pct,capped_pct\n";
  for (const auto& s : summaries)
    out << s.object << "," << method_name(s.method) << "," << policy_name(s.policy)
        << "," << fixed2(s.beta) << "," << s.min_grasps << "," << s.max_grasps << ","
        << fixed2(s.avg_grasps) << "," << fixed2(s.median_grasps) << ","
        << fixed2(s.error_pct) << "," << fixed2(s.capped_pct) << "\n";
}

inline void emit_records_csv(const std::vector<TrialRecord>& records, std::ostream& out) {
  out << "object,method,policy,beta,trial,grasps,decided,correct,capped\n";
  for (const auto& r : records)
    out << r.truth << "," << method_name(r.method) << "," << policy_name(r.policy) << ","
        << fixed2(r.beta) << "," << r.trial_id << "," << r.grasps << "," << r.decided
        << "," << (r.correct ? 1 : 0) << "," << (r.capped ? 1 : 0) << "\n";
}

inline void emit_trace_csv(const TrialRecord& rec, const std::vector<std::string>& objects,
                           std::ostream& out) {
  out << "trial,t,pose_index";
  for (const auto& o : objects) out << ",lik_" << o;
  for (const auto& o : objects) out << ",post_" << o;
  out << "\n";
  out.precision(12);
  for (const auto& row : rec.trace) {
    out << rec.trial_id << "," << row.t << "," << row.pose_index;
    for (double v : row.likelihood) out << "," << v;
    for (double v : row.posterior) out << "," << v;
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Two-sample Kolmogorov-Smirnov check (used by the pose-freeness analysis).

inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    double fa = static_cast<double>(i) / static_cast<double>(a.size());
    double fb = static_cast<double>(j) / static_cast<double>(b.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

/// True when the two samples are NOT distinguishable at the given level.
inline bool ks_same_distribution(const std::vector<double>& a,
                                 const std::vector<double>& b, double alpha = 0.01) {
  // critical coefficient for alpha: c = sqrt(-ln(alpha/2)/2)
  double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
  double critical = c * std::sqrt((n + m) / (n * m));
  return ks_statistic(a, b) <= critical;
}

// ---------------------------------------------------------------------------
// Figure emission.

inline void emit_plots(const std::vector<StatSummary>& summaries,
                       const std::vector<TrialRecord>& records,
                       const std::string& out_dir) {
  std::vector<std::string> objects;
  for (const auto& s : summaries)
    if (std::find(objects.begin(), objects.end(), s.object) == objects.end())
      objects.push_back(s.object);
  std::sort(objects.begin(), objects.end());

  auto find_summary = [&](const std::string& obj, Method m, Policy p,
                          double beta) -> const StatSummary* {
    for (const auto& s : summaries)
      if (s.object == obj && s.method == m && s.policy == p &&
          std::abs(s.beta - beta) < 1e-12)
        return &s;
    return nullptr;
  };
  std::vector<double> betas;
  for (const auto& s : summaries)
    if (std::none_of(betas.begin(), betas.end(),
                     [&](double b) { return std::abs(b - s.beta) < 1e-12; }))
      betas.push_back(s.beta);
  std::sort(betas.begin(), betas.end());

  // Average grasps vs threshold, one chart per policy; PN solid, P dashed.
  for (Policy policy : {Policy::Passive, Policy::Active}) {
    std::vector<svg::Series> series;
    std::size_t color = 0;
    for (const auto& obj : objects) {
      for (Method method : {Method::PN, Method::P}) {
        svg::Series s;
        s.label = obj + " (" + method_name(method) + ")";
        s.color = svg::detail::kPalette[color % 8];
        s.dashed = method == Method::P;
        for (double b : betas) {
          if (const auto* sum = find_summary(obj, method, policy, b)) {
            s.x.push_back(b);
            s.y.push_back(sum->avg_grasps);
          }
        }
        series.push_back(std::move(s));
      }
      ++color;
    }
    std::ofstream out(out_dir + "/grasps_" + policy_name(policy) + ".svg");
    svg::line_chart(out, series, "Average grasps per classification (" +
                                     policy_name(policy) + ")",
                    "confidence threshold", "average grasps");
  }

  // Perception error vs threshold, one chart per method x policy.
  for (Method method : {Method::PN, Method::P})
    for (Policy policy : {Policy::Passive, Policy::Active}) {
      std::vector<svg::Series> series;
      std::size_t color = 0;
      for (const auto& obj : objects) {
        svg::Series s;
        s.label = obj;
        s.color = svg::detail::kPalette[color++ % 8];
        for (double b : betas) {
          if (const auto* sum = find_summary(obj, method, policy, b)) {
            s.x.push_back(b);
            s.y.push_back(sum->error_pct);
          }
        }
        series.push_back(std::move(s));
      }
      std::ofstream out(out_dir + "/errors_" + method_name(method) + "_" +
                        policy_name(policy) + ".svg");
      svg::line_chart(out, series, "Perception error, " + method_name(method) + " + " +
                                       policy_name(policy),
                      "confidence threshold", "error [%]");
    }

  // Violin of grasp distributions at the highest threshold, per method+policy.
  double top_beta = betas.empty() ? 0.99 : betas.back();
  std::vector<svg::Violin> violins;
  std::size_t color = 0;
  for (Method method : {Method::PN, Method::P})
    for (Policy policy : {Policy::Passive, Policy::Active}) {
      svg::Violin v;
      v.label = method_name(method) + "+" + policy_name(policy);
      v.color = svg::detail::kPalette[color++ % 8];
      for (const auto& r : records)
        if (r.method == method && r.policy == policy &&
            std::abs(r.beta - top_beta) < 1e-12)
          v.values.push_back(static_cast<double>(r.grasps));
      violins.push_back(std::move(v));
    }
  std::ofstream vout(out_dir + "/violin.svg");
  svg::violin_chart(vout, violins,
                    "Grasp distribution at threshold " + fixed2(top_beta), "grasps");
}

}  // namespace graspid
