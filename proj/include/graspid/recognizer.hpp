#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "graspid/features.hpp"

namespace graspid {

struct RecognizerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Weighting : std::uint8_t { Count = 0, Binary = 1 };

inline std::string weighting_name(Weighting w) {
  return w == Weighting::Count ? "count" : "binary";
}

inline Weighting weighting_from_name(const std::string& s) {
  if (s == "count") return Weighting::Count;
  if (s == "binary") return Weighting::Binary;
  throw RecognizerError("unknown weighting mode: " + s);
}

/// Vote totals for one grasp's key multiset, with the smoothed normalized
/// likelihood vector. Object order follows the table set.
struct VoteTally {
  std::vector<std::string> objects;
  std::vector<double> votes;
  std::vector<double> likelihood;  // sums to 1
};

inline constexpr double kSmoothingAlpha = 1.0;
inline constexpr double kPosteriorFloor = 1e-9;

/// Vote fraction per object. In `count` mode each test key contributes the
/// stored occurrence count; in `binary` mode, 1 if present. The additive
/// smoothing keeps the likelihood defined when nothing matches.
inline VoteTally tally(const std::vector<FeatureKey>& test_keys,
                       const std::vector<ObjectTable>& tables,
                       Weighting weighting = Weighting::Count,
                       double alpha = kSmoothingAlpha) {
  if (tables.empty()) throw RecognizerError("no tables");
  if (test_keys.empty()) throw RecognizerError("empty test key set");
  const auto& first = tables.front();
  for (const auto& t : tables)
    if (t.method != first.method || !(t.quantizer == first.quantizer))
      throw RecognizerError("tables disagree on method or quantizer");
  for (const auto& k : test_keys)
    if (k.method != first.method)
      throw RecognizerError("test key method does not match tables");

  VoteTally out;
  out.objects.reserve(tables.size());
  out.votes.assign(tables.size(), 0.0);
  for (std::size_t i = 0; i < tables.size(); ++i) {
    out.objects.push_back(tables[i].object_name);
    for (const auto& k : test_keys) {
      std::uint64_t c = tables[i].count_for(k);
      if (weighting == Weighting::Count)
        out.votes[i] += static_cast<double>(c);
      else
        out.votes[i] += c > 0 ? 1.0 : 0.0;
    }
  }
  double total = 0.0;
  for (double v : out.votes) total += v + alpha;
  out.likelihood.resize(tables.size());
  for (std::size_t i = 0; i < tables.size(); ++i)
    out.likelihood[i] = (out.votes[i] + alpha) / total;
  return out;
}

/// Normalized belief over the object set.
struct Posterior {
  std::vector<std::string> objects;
  std::vector<double> probabilities;
  int grasp_count = 0;  // t

  static Posterior uniform(const std::vector<std::string>& objects) {
    Posterior p;
    p.objects = objects;
    p.probabilities.assign(objects.size(), 1.0 / static_cast<double>(objects.size()));
    return p;
  }

  std::size_t argmax() const {
    return static_cast<std::size_t>(
        std::max_element(probabilities.begin(), probabilities.end()) -
        probabilities.begin());
  }
};

/// Sequential Bayesian update: element-wise product with the likelihood, a
/// small floor so no object is ever eliminated outright, then renormalize.
inline Posterior bayes_update(const Posterior& prior, const VoteTally& likelihood) {
  if (prior.objects != likelihood.objects)
    throw RecognizerError("posterior and tally cover different object sets");
  Posterior out = prior;
  double total = 0.0;
  for (std::size_t i = 0; i < out.probabilities.size(); ++i) {
    out.probabilities[i] = std::max(prior.probabilities[i] * likelihood.likelihood[i],
                                    kPosteriorFloor);
    total += out.probabilities[i];
  }
  if (!(total > 0.0)) throw RecognizerError("degenerate posterior (all mass lost)");
  for (auto& p : out.probabilities) p /= total;
  out.grasp_count = prior.grasp_count + 1;
  return out;
}

struct Decision {
  bool decided = false;
  std::string object;  // empty if undecided
  double beta = 0.0;
  int grasps = 0;
};

/// Stop rule: commit to the argmax object once its posterior exceeds beta.
/// Ties (exact float equality only) break by object-name order, which the
/// first-encountered max already gives for a name-sorted table set.
inline Decision decide(const Posterior& posterior, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw RecognizerError("beta must be in (0,1)");
  Decision d;
  d.beta = beta;
  d.grasps = posterior.grasp_count;
  std::size_t best = posterior.argmax();
  if (posterior.probabilities[best] > beta) {
    d.decided = true;
    d.object = posterior.objects[best];
  }
  return d;
}

}  // namespace graspid
