#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "graspid/grasp.hpp"
#include "graspid/rng.hpp"

namespace graspid {

inline constexpr double kPiValue = 3.14159265358979323846;

struct FeatureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Point Pair Feature: distance plus the three angles of Eq-style PPF
/// descriptors. Rigid-motion invariant.
struct PPF {
  double distance = 0.0;   // mm
  double angle_n1_d = 0.0; // rad, in [0, pi]
  double angle_n2_d = 0.0;
  double angle_n1_n2 = 0.0;
};

inline double angle_between(const Vec3& a, const Vec3& b) {
  double denom = a.norm() * b.norm();
  double c = denom > 0.0 ? a.dot(b) / denom : 1.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

/// Ordered PPF: d runs from c1 to c2.
inline PPF ppf(const Contact& c1, const Contact& c2) {
  Vec3 d = c2.position - c1.position;
  double dist = d.norm();
  if (dist < 1e-9) throw FeatureError("degenerate contact pair (coincident positions)");
  return {dist, angle_between(c1.normal, d), angle_between(c2.normal, d),
          angle_between(c1.normal, c2.normal)};
}

/// Unordered-pair canonical PPF: finger contacts carry no natural order, so
/// the contact whose normal makes the smaller angle with the direction toward
/// the other contact goes first. A tie gives the same feature either way.
inline PPF canonical_ppf(const Contact& a, const Contact& b) {
  Vec3 d = b.position - a.position;
  if (d.norm() < 1e-9)
    throw FeatureError("degenerate contact pair (coincident positions)");
  double angle_a = angle_between(a.normal, d);
  double angle_b = angle_between(b.normal, -d);
  return angle_a <= angle_b ? ppf(a, b) : ppf(b, a);
}

enum class Method : std::uint8_t { PN = 0, P = 1 };

inline std::string method_name(Method m) { return m == Method::PN ? "PN" : "P"; }

inline Method method_from_name(const std::string& s) {
  if (s == "PN") return Method::PN;
  if (s == "P") return Method::P;
  throw TableError("unknown method tag: " + s);
}

struct Quantizer {
  double distance_step = 5.0;          // mm
  double angle_step = kPiValue / 15.0; // rad (12 degrees)

  bool operator==(const Quantizer&) const = default;
};

/// Quantized feature key. PN uses all four bins, P only the distance bin.
/// Keys from different methods never compare equal.
struct FeatureKey {
  Method method = Method::PN;
  std::array<std::int32_t, 4> bins{0, 0, 0, 0};

  bool operator==(const FeatureKey&) const = default;
  auto operator<=>(const FeatureKey&) const = default;
};

struct FeatureKeyHash {
  std::size_t operator()(const FeatureKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.method);
    for (auto b : k.bins) h = detail::splitmix64(h ^ static_cast<std::uint64_t>(
                                                         static_cast<std::uint32_t>(b)));
    return static_cast<std::size_t>(h);
  }
};

inline std::int32_t angle_bin(double angle, double step) {
  // pi lands in the top bin instead of opening a new one
  std::int32_t top = static_cast<std::int32_t>(std::ceil(kPiValue / step)) - 1;
  std::int32_t bin = static_cast<std::int32_t>(std::floor(angle / step));
  return std::clamp(bin, 0, top);
}

inline FeatureKey quantize(const PPF& f, const Quantizer& q, Method method) {
  FeatureKey key;
  key.method = method;
  key.bins[0] = static_cast<std::int32_t>(std::floor(f.distance / q.distance_step));
  if (method == Method::PN) {
    key.bins[1] = angle_bin(f.angle_n1_d, q.angle_step);
    key.bins[2] = angle_bin(f.angle_n2_d, q.angle_step);
    key.bins[3] = angle_bin(f.angle_n1_n2, q.angle_step);
  }
  return key;
}

/// The three pairwise keys of one grasp: pairs {0,1}, {0,2}, {1,2} under the
/// canonical ordering, so the result is invariant to contact relabeling.
inline std::array<FeatureKey, 3> keys_for_grasp(const GraspObservation& obs,
                                                const Quantizer& q, Method method) {
  std::array<FeatureKey, 3> keys = {
      quantize(canonical_ppf(obs.contacts[0], obs.contacts[1]), q, method),
      quantize(canonical_ppf(obs.contacts[0], obs.contacts[2]), q, method),
      quantize(canonical_ppf(obs.contacts[1], obs.contacts[2]), q, method)};
  std::sort(keys.begin(), keys.end());
  return keys;
}

/// How training/testing noise enters the features. ContactSpace perturbs the
/// raw contacts before the PPF; FeatureSpace adds Gaussian noise directly to
/// the distance and angle values.
enum class NoiseMode : std::uint8_t { ContactSpace = 0, FeatureSpace = 1 };

inline PPF perturb_feature(const PPF& f, const NoiseModel& noise, Rng& rng) {
  PPF out = f;
  out.distance = std::max(0.0, f.distance + rng.next_gaussian() * noise.sigma_distance);
  out.angle_n1_d = std::clamp(f.angle_n1_d + rng.next_gaussian() * noise.sigma_angle,
                              0.0, kPiValue);
  out.angle_n2_d = std::clamp(f.angle_n2_d + rng.next_gaussian() * noise.sigma_angle,
                              0.0, kPiValue);
  out.angle_n1_n2 = std::clamp(f.angle_n1_n2 + rng.next_gaussian() * noise.sigma_angle,
                               0.0, kPiValue);
  return out;
}

/// Keys for one noisy sample of a grasp, under either noise mode. The draw
/// depends only on (seed, pose, sample, stream).
inline std::array<FeatureKey, 3> keys_for_sample(const GraspObservation& obs,
                                                 const NoiseModel& noise,
                                                 int sample_index, NoiseStream stream,
                                                 const Quantizer& q, Method method,
                                                 NoiseMode mode) {
  if (mode == NoiseMode::ContactSpace)
    return keys_for_grasp(perturb(obs, noise, sample_index, stream), q, method);
  Rng rng(mix_seed({noise.rng_seed, static_cast<std::uint64_t>(obs.pose_index),
                    static_cast<std::uint64_t>(sample_index),
                    static_cast<std::uint64_t>(stream), 0x0fea7ULL}));
  std::array<FeatureKey, 3> keys = {
      quantize(perturb_feature(canonical_ppf(obs.contacts[0], obs.contacts[1]), noise, rng),
               q, method),
      quantize(perturb_feature(canonical_ppf(obs.contacts[0], obs.contacts[2]), noise, rng),
               q, method),
      quantize(perturb_feature(canonical_ppf(obs.contacts[1], obs.contacts[2]), noise, rng),
               q, method)};
  std::sort(keys.begin(), keys.end());
  return keys;
}

/// Per-object hash table: key -> number of times it was produced in training.
/// Also retains the noiseless per-pose key triple, which active exploration
/// uses to predict grasp outcomes.
struct ObjectTable {
  std::string object_name;
  Method method = Method::PN;
  Quantizer quantizer;
  int grid_size = 0;
  std::unordered_map<FeatureKey, std::uint64_t, FeatureKeyHash> counts;
  std::uint64_t total_count = 0;
  std::map<int, std::array<FeatureKey, 3>> pose_keys;  // noiseless, valid poses only

  std::uint64_t count_for(const FeatureKey& key) const {
    auto it = counts.find(key);
    return it == counts.end() ? 0 : it->second;
  }

  void add(const FeatureKey& key, std::uint64_t n = 1) {
    counts[key] += n;
    total_count += n;
  }

  bool operator==(const ObjectTable& o) const {
    return object_name == o.object_name && method == o.method &&
           quantizer == o.quantizer && grid_size == o.grid_size && counts == o.counts &&
           total_count == o.total_count && pose_keys == o.pose_keys;
  }
};

struct TrainConfig {
  NoiseModel noise;
  int samples_per_grasp = 50;  // N
  Quantizer quantizer;
  Method method = Method::PN;
  NoiseMode noise_mode = NoiseMode::ContactSpace;
};

/// Accumulate one object's table from its pose grid: N noisy samples per
/// valid pose, 3 keys each.
inline ObjectTable train_object(const PoseGrid& grid, const TrainConfig& cfg) {
  if (cfg.samples_per_grasp < 1) throw FeatureError("samples_per_grasp must be >= 1");
  ObjectTable table;
  table.object_name = grid.object_name;
  table.method = cfg.method;
  table.quantizer = cfg.quantizer;
  table.grid_size = grid.grid_size;
  for (int pose = 0; pose < grid.grid_size; ++pose) {
    const auto& obs = grid.poses[static_cast<std::size_t>(pose)];
    if (!obs) continue;
    table.pose_keys[pose] = keys_for_grasp(*obs, cfg.quantizer, cfg.method);
    for (int s = 0; s < cfg.samples_per_grasp; ++s) {
      auto keys = keys_for_sample(*obs, cfg.noise, s, NoiseStream::Train, cfg.quantizer,
                                  cfg.method, cfg.noise_mode);
      for (const auto& k : keys) table.add(k);
    }
  }
  return table;
}

inline std::vector<ObjectTable> train(const std::vector<PoseGrid>& grids,
                                      const TrainConfig& cfg) {
  if (grids.size() < 2) throw FeatureError("training needs at least 2 objects");
  std::vector<ObjectTable> tables;
  tables.reserve(grids.size());
  for (const auto& g : grids) tables.push_back(train_object(g, cfg));
  return tables;
}

// ---------------------------------------------------------------------------
// Table persistence: plain-text header, binary little-endian body.

namespace detail {

inline void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

inline std::uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw TableError("corrupt table file (truncated)");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

inline void write_i32(std::ostream& out, std::int32_t v) {
  write_u64(out, static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)));
}

inline std::int32_t read_i32(std::istream& in) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(read_u64(in)));
}

inline void write_key(std::ostream& out, const FeatureKey& k) {
  for (auto b : k.bins) write_i32(out, b);
}

inline FeatureKey read_key(std::istream& in, Method method) {
  FeatureKey k;
  k.method = method;
  for (auto& b : k.bins) b = read_i32(in);
  return k;
}

}  // namespace detail

inline constexpr const char* kTableMagic = "GRASPID-TABLES";
inline constexpr int kTableVersion = 1;

inline void save_tables(const std::vector<ObjectTable>& tables, std::ostream& out) {
  if (tables.empty()) throw TableError("refusing to save an empty table set");
  const auto& first = tables.front();
  for (const auto& t : tables) {
    if (t.method != first.method || !(t.quantizer == first.quantizer))
      throw TableError("tables disagree on method or quantizer");
  }
  out << kTableMagic << " " << kTableVersion << "\n";
  out << "method " << method_name(first.method) << "\n";
  std::ostringstream qs;
  qs.precision(17);
  qs << "quantizer " << first.quantizer.distance_step << " " << first.quantizer.angle_step;
  out << qs.str() << "\n";
  out << "objects " << tables.size() << "\n";
  for (const auto& t : tables)
    out << "object " << t.object_name << " " << t.counts.size() << " " << t.total_count
        << " " << t.pose_keys.size() << " " << t.grid_size << "\n";
  out << "end_header\n";
  for (const auto& t : tables) {
    // sorted for byte-stable output
    std::vector<std::pair<FeatureKey, std::uint64_t>> entries(t.counts.begin(),
                                                              t.counts.end());
    std::sort(entries.begin(), entries.end());
    for (const auto& [key, count] : entries) {
      detail::write_key(out, key);
      detail::write_u64(out, count);
    }
    for (const auto& [pose, keys] : t.pose_keys) {
      detail::write_i32(out, pose);
      for (const auto& k : keys) detail::write_key(out, k);
    }
  }
}

inline std::vector<ObjectTable> load_tables(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw TableError("empty table file");
  {
    std::istringstream ls(line);
    std::string magic;
    int version = -1;
    ls >> magic >> version;
    if (magic != kTableMagic) throw TableError("not a table file");
    if (version != kTableVersion)
      throw TableError("table file version mismatch: " + std::to_string(version));
  }
  Method method = Method::PN;
  Quantizer quantizer;
  std::size_t n_objects = 0;
  struct ObjHeader {
    std::string name;
    std::size_t n_keys = 0;
    std::uint64_t total = 0;
    std::size_t n_poses = 0;
    int grid_size = 0;
  };
  std::vector<ObjHeader> headers;
  for (;;) {
    if (!std::getline(in, line)) throw TableError("table header truncated");
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "method") {
      std::string m;
      ls >> m;
      method = method_from_name(m);
    } else if (kw == "quantizer") {
      if (!(ls >> quantizer.distance_step >> quantizer.angle_step))
        throw TableError("malformed quantizer line");
    } else if (kw == "objects") {
      ls >> n_objects;
    } else if (kw == "object") {
      ObjHeader h;
      if (!(ls >> h.name >> h.n_keys >> h.total >> h.n_poses >> h.grid_size))
        throw TableError("malformed object line");
      headers.push_back(h);
    } else if (kw == "end_header") {
      break;
    } else {
      throw TableError("unknown table header keyword: " + kw);
    }
  }
  if (headers.size() != n_objects) throw TableError("object count mismatch in header");
  std::vector<ObjectTable> tables;
  tables.reserve(headers.size());
  for (const auto& h : headers) {
    ObjectTable t;
    t.object_name = h.name;
    t.method = method;
    t.quantizer = quantizer;
    t.grid_size = h.grid_size;
    for (std::size_t i = 0; i < h.n_keys; ++i) {
      FeatureKey key = detail::read_key(in, method);
      std::uint64_t count = detail::read_u64(in);
      if (count < 1) throw TableError("corrupt table file (zero count)");
      t.counts.emplace(key, count);
      t.total_count += count;
    }
    if (t.total_count != h.total) throw TableError("corrupt table file (total mismatch)");
    for (std::size_t i = 0; i < h.n_poses; ++i) {
      int pose = detail::read_i32(in);
      std::array<FeatureKey, 3> keys;
      for (auto& k : keys) k = detail::read_key(in, method);
      t.pose_keys.emplace(pose, keys);
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

inline void save_tables(const std::vector<ObjectTable>& tables, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TableError("cannot open for writing: " + path);
  save_tables(tables, out);
}

inline std::vector<ObjectTable> load_tables(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TableError("cannot open table file: " + path);
  return load_tables(in);
}

/// Load and check against an expected quantizer (e.g. the one requested on
/// the command line).
inline std::vector<ObjectTable> load_tables_checked(const std::string& path,
                                                    const Quantizer& expected) {
  auto tables = load_tables(path);
  if (!tables.empty() && !(tables.front().quantizer == expected))
    throw TableError("quantizer mismatch between table file and configuration");
  return tables;
}

/// CSV dump of one table, sorted lexicographically by key, for diffing.
inline void dump_table_csv(const ObjectTable& table, std::ostream& out) {
  out << "d_bin,a1_bin,a2_bin,a3_bin,count\n";
  std::vector<std::pair<FeatureKey, std::uint64_t>> entries(table.counts.begin(),
                                                            table.counts.end());
  std::sort(entries.begin(), entries.end());
  for (const auto& [key, count] : entries)
    out << key.bins[0] << "," << key.bins[1] << "," << key.bins[2] << "," << key.bins[3]
        << "," << count << "\n";
}

}  // namespace graspid
