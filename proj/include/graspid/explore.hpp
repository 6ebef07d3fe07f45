#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "graspid/recognizer.hpp"
#include "graspid/rng.hpp"

namespace graspid {

struct ExploreError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Predicted likelihood vectors for every (object, pose): what `tally` would
/// return if the noiseless grasp of that object at that pose were observed.
/// Built from the per-pose key triples retained at training time.
struct PosePredictionTable {
  std::vector<std::string> objects;
  int grid_size = 0;
  // per object (table order): pose -> likelihood vector over all objects
  std::vector<std::map<int, std::vector<double>>> predictions;

  const std::map<int, std::vector<double>>& for_object(std::size_t idx) const {
    return predictions.at(idx);
  }
};

inline PosePredictionTable build_predictions(const std::vector<ObjectTable>& tables,
                                             Weighting weighting = Weighting::Count) {
  if (tables.empty()) throw ExploreError("no tables");
  PosePredictionTable out;
  out.grid_size = tables.front().grid_size;
  out.predictions.resize(tables.size());
  for (const auto& t : tables) {
    out.objects.push_back(t.object_name);
    if (t.pose_keys.empty())
      throw ExploreError("table for " + t.object_name +
                         " has no per-pose records; retrain with pose retention");
  }
  for (std::size_t i = 0; i < tables.size(); ++i) {
    for (const auto& [pose, keys] : tables[i].pose_keys) {
      std::vector<FeatureKey> test_keys(keys.begin(), keys.end());
      out.predictions[i].emplace(pose, tally(test_keys, tables, weighting).likelihood);
    }
  }
  return out;
}

enum class Policy : std::uint8_t { Passive = 0, Active = 1 };

inline std::string policy_name(Policy p) {
  return p == Policy::Passive ? "passive" : "active";
}

struct ExplorationState {
  Policy policy = Policy::Passive;
  Rng rng;
  std::set<int> visited;
  std::set<int> blocked;  // poses that missed on the real object; always skipped
  bool exclude_visited = false;

  explicit ExplorationState(Policy pol, std::uint64_t seed)
      : policy(pol), rng(seed) {}

  bool skip(int pose) const {
    return blocked.count(pose) > 0 || (exclude_visited && visited.count(pose) > 0);
  }
};

/// Passive choice: uniform over the pose grid, revisits allowed. Never looks
/// at the belief, which is what keeps the passive mode pose-free.
inline int next_pose_passive(ExplorationState& state, int grid_size) {
  if (grid_size < 1) throw ExploreError("grid size must be >= 1");
  std::size_t attempts = 0;
  for (;;) {
    int pose = static_cast<int>(state.rng.next_below(static_cast<std::uint64_t>(grid_size)));
    if (!state.skip(pose)) return pose;
    if (++attempts > 64 * static_cast<std::size_t>(grid_size))
      throw ExploreError("no selectable pose left");
  }
}

/// Active choice: the pose maximizing the predicted likelihood gap between
/// the two most probable objects, evaluated on the top hypothesis's own pose
/// grid. Ties break toward the lowest pose index.
inline int next_pose_active(const Posterior& posterior,
                            const PosePredictionTable& predictions,
                            ExplorationState& state) {
  if (posterior.objects.size() < 2) throw ExploreError("need at least 2 objects");
  if (posterior.objects != predictions.objects)
    throw ExploreError("posterior and prediction table cover different object sets");
  std::size_t best = posterior.argmax();
  std::size_t runner = best == 0 ? 1 : 0;
  for (std::size_t i = 0; i < posterior.probabilities.size(); ++i) {
    if (i == best) continue;
    if (posterior.probabilities[i] > posterior.probabilities[runner]) runner = i;
  }
  const auto& pose_map = predictions.for_object(best);
  double best_gap = 0.0;
  int best_pose = -1;
  for (const auto& [pose, vec] : pose_map) {
    if (state.skip(pose)) continue;
    double gap = vec[best] - vec[runner];
    if (best_pose < 0 || gap > best_gap) {
      best_gap = gap;
      best_pose = pose;
    }
  }
  if (best_pose < 0)
    throw ExploreError("no valid pose for hypothesis " + posterior.objects[best]);
  return best_pose;
}

}  // namespace graspid
