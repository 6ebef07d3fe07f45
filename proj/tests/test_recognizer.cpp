#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "graspid/recognizer.hpp"
#include "graspid/rng.hpp"

using namespace graspid;

namespace {

FeatureKey key_of(std::int32_t d, std::int32_t a1 = 0, std::int32_t a2 = 0,
                  std::int32_t a3 = 0) {
  FeatureKey k;
  k.method = Method::PN;
  k.bins = {d, a1, a2, a3};
  return k;
}

ObjectTable table_of(const std::string& name,
                     const std::vector<std::pair<FeatureKey, std::uint64_t>>& entries) {
  ObjectTable t;
  t.object_name = name;
  t.method = Method::PN;
  t.grid_size = 1;
  for (const auto& [k, c] : entries) t.add(k, c);
  return t;
}

// raw-list voting oracle: each table is expanded into its multiset of stored
// features, votes come from a linear scan
std::vector<double> oracle_likelihood(const std::vector<FeatureKey>& test_keys,
                                      const std::vector<ObjectTable>& tables,
                                      Weighting weighting, double alpha) {
  std::vector<double> votes(tables.size(), 0.0);
  for (std::size_t i = 0; i < tables.size(); ++i) {
    std::vector<FeatureKey> raw;
    for (const auto& [k, c] : tables[i].counts)
      for (std::uint64_t j = 0; j < c; ++j) raw.push_back(k);
    for (const auto& tk : test_keys) {
      std::uint64_t matches = 0;
      for (const auto& rk : raw)
        if (rk == tk) ++matches;
      if (weighting == Weighting::Count) votes[i] += static_cast<double>(matches);
      else votes[i] += matches > 0 ? 1.0 : 0.0;
    }
  }
  double total = 0.0;
  for (double v : votes) total += v + alpha;
  for (auto& v : votes) v = (v + alpha) / total;
  return votes;
}

}  // namespace

TEST_CASE("single key present in one table concentrates the likelihood") {
  auto a = table_of("a", {{key_of(1), 10}});
  auto b = table_of("b", {{key_of(2), 10}});
  auto c = table_of("c", {{key_of(3), 10}});
  VoteTally v = tally({key_of(1)}, {a, b, c});
  double expected = (10.0 + 1.0) / (10.0 + 3.0);
  CHECK(v.likelihood[0] == Catch::Approx(expected).margin(1e-12));
  CHECK(v.likelihood[1] == Catch::Approx(1.0 / 13.0).margin(1e-12));
}

TEST_CASE("unknown key gives the uniform smoothing floor") {
  auto a = table_of("a", {{key_of(1), 10}});
  auto b = table_of("b", {{key_of(2), 10}});
  VoteTally v = tally({key_of(9)}, {a, b});
  CHECK(v.likelihood[0] == Catch::Approx(0.5).margin(1e-12));
  CHECK(v.likelihood[1] == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("tally matches the raw-list voting oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    int n_objects = 2 + static_cast<int>(rng.next_below(4));
    std::vector<ObjectTable> tables;
    for (int o = 0; o < n_objects; ++o) {
      ObjectTable t;
      t.object_name = "obj" + std::to_string(o);
      t.method = Method::PN;
      int n_keys = 1 + static_cast<int>(rng.next_below(20));
      for (int k = 0; k < n_keys; ++k)
        t.add(key_of(static_cast<std::int32_t>(rng.next_below(8)),
                     static_cast<std::int32_t>(rng.next_below(4))),
              1 + rng.next_below(5));
      tables.push_back(std::move(t));
    }
    std::vector<FeatureKey> test_keys;
    int n_test = 1 + static_cast<int>(rng.next_below(30));
    for (int k = 0; k < n_test; ++k)
      test_keys.push_back(key_of(static_cast<std::int32_t>(rng.next_below(8)),
                                 static_cast<std::int32_t>(rng.next_below(4))));
    for (Weighting w : {Weighting::Count, Weighting::Binary}) {
      VoteTally v = tally(test_keys, tables, w);
      auto expected = oracle_likelihood(test_keys, tables, w, kSmoothingAlpha);
      for (int o = 0; o < n_objects; ++o)
        CHECK(v.likelihood[o] == Catch::Approx(expected[o]).margin(1e-12));
    }
  }
}

TEST_CASE("tally likelihood is invariant to scaling all counts") {
  auto a = table_of("a", {{key_of(1), 3}, {key_of(2), 7}});
  auto b = table_of("b", {{key_of(1), 5}});
  std::vector<FeatureKey> keys = {key_of(1), key_of(2)};
  VoteTally v1 = tally(keys, {a, b}, Weighting::Count, 1.0);
  auto a9 = table_of("a", {{key_of(1), 27}, {key_of(2), 63}});
  auto b9 = table_of("b", {{key_of(1), 45}});
  VoteTally v9 = tally(keys, {a9, b9}, Weighting::Count, 9.0);
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(v1.likelihood[i] == Catch::Approx(v9.likelihood[i]).margin(1e-12));
}

TEST_CASE("mismatched key method is rejected") {
  auto a = table_of("a", {{key_of(1), 1}});
  auto b = table_of("b", {{key_of(2), 1}});
  FeatureKey p_key;
  p_key.method = Method::P;
  p_key.bins = {1, 0, 0, 0};
  CHECK_THROWS_AS(tally({p_key}, {a, b}), RecognizerError);
}

TEST_CASE("uniform likelihood leaves the posterior unchanged") {
  Posterior prior = Posterior::uniform({"a", "b", "c"});
  prior.probabilities = {0.5, 0.3, 0.2};
  VoteTally flat;
  flat.objects = {"a", "b", "c"};
  flat.likelihood = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  Posterior post = bayes_update(prior, flat);
  for (int i = 0; i < 3; ++i)
    CHECK(post.probabilities[i] == Catch::Approx(prior.probabilities[i]).margin(1e-12));
  CHECK(post.grasp_count == 1);
}

TEST_CASE("uniform prior takes the likelihood as posterior") {
  Posterior prior = Posterior::uniform({"a", "b", "c", "d", "e"});
  VoteTally v;
  v.objects = prior.objects;
  v.likelihood = {0.8, 0.05, 0.05, 0.05, 0.05};
  Posterior post = bayes_update(prior, v);
  for (int i = 0; i < 5; ++i)
    CHECK(post.probabilities[i] == Catch::Approx(v.likelihood[i]).margin(1e-12));
}

TEST_CASE("sequential updates equal the one-shot product") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    int k = 3 + static_cast<int>(rng.next_below(3));
    std::vector<std::string> names;
    for (int i = 0; i < k; ++i) names.push_back("o" + std::to_string(i));
    Posterior seq = Posterior::uniform(names);
    std::vector<double> product(k, 1.0);
    int steps = 1 + static_cast<int>(rng.next_below(10));
    for (int s = 0; s < steps; ++s) {
      VoteTally v;
      v.objects = names;
      double total = 0.0;
      for (int i = 0; i < k; ++i) {
        v.likelihood.push_back(0.05 + rng.next_double());
        total += v.likelihood.back();
      }
      for (auto& l : v.likelihood) l /= total;
      seq = bayes_update(seq, v);
      for (int i = 0; i < k; ++i) product[i] *= v.likelihood[i];
    }
    double total = 0.0;
    for (double p : product) total += p;
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      CHECK(std::abs(seq.probabilities[i] - product[i] / total) < 1e-9);
      sum += seq.probabilities[i];
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("posterior floor keeps every object alive") {
  Posterior prior = Posterior::uniform({"a", "b"});
  VoteTally v;
  v.objects = {"a", "b"};
  v.likelihood = {1.0, 0.0};
  Posterior post = prior;
  for (int i = 0; i < 50; ++i) post = bayes_update(post, v);
  CHECK(post.probabilities[1] > 0.0);
  CHECK(post.probabilities[0] + post.probabilities[1] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("supporting evidence strictly increases the posterior") {
  Posterior prior = Posterior::uniform({"a", "b", "c"});
  VoteTally v;
  v.objects = prior.objects;
  v.likelihood = {0.6, 0.2, 0.2};
  Posterior post = bayes_update(prior, v);
  CHECK(post.probabilities[0] > prior.probabilities[0]);
}

TEST_CASE("decision thresholds") {
  Posterior p = Posterior::uniform({"a", "b", "c", "d", "e"});

  p.probabilities = {0.991, 0.003, 0.002, 0.002, 0.002};
  Decision d = decide(p, 0.99);
  CHECK(d.decided);
  CHECK(d.object == "a");

  p.probabilities = {0.2, 0.2, 0.2, 0.2, 0.2};
  CHECK_FALSE(decide(p, 0.5).decided);

  p.probabilities = {0.91, 0.05, 0.02, 0.01, 0.01};
  CHECK(decide(p, 0.9).decided);
  CHECK_FALSE(decide(p, 0.95).decided);
}

TEST_CASE("decision is argmax consistent") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    Posterior p = Posterior::uniform({"a", "b", "c", "d"});
    double total = 0.0;
    for (auto& pr : p.probabilities) {
      pr = 0.01 + rng.next_double();
      total += pr;
    }
    for (auto& pr : p.probabilities) pr /= total;
    Decision d = decide(p, 0.3);
    if (!d.decided) continue;
    std::size_t best = p.argmax();
    CHECK(d.object == p.objects[best]);
    CHECK(p.probabilities[best] > 0.3);
  }
}

TEST_CASE("invalid beta is rejected") {
  Posterior p = Posterior::uniform({"a", "b"});
  CHECK_THROWS_AS(decide(p, 0.0), RecognizerError);
  CHECK_THROWS_AS(decide(p, 1.0), RecognizerError);
}
