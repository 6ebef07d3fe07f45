#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "graspid/mesh.hpp"
#include "graspid/rng.hpp"
#include "graspid/vec3.hpp"

namespace graspid {

inline constexpr double kTwoPi = 6.28318530717958647692528676655900577;

struct GraspError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A finger ray has no intersection with the object at this pose.
struct MissedGraspError : GraspError {
  using GraspError::GraspError;
};

/// One finger of the parametric hand: a ray expressed in the hand frame.
struct FingerRay {
  Vec3 offset;     // ray origin relative to the palm, hand frame, mm
  Vec3 direction;  // unit, hand frame
};

/// Fixed-geometry three-ray contact model standing in for a closing hand.
/// The palm sits at `standoff_radius` from the object z axis at height
/// `approach_height`; the hand x axis points at the object axis.
struct HandModel {
  double standoff_radius = 150.0;
  double approach_height = 0.0;
  std::vector<FingerRay> fingers = {
      {{0.0, 25.0, 8.0}, Vec3{1.0, -0.35, 0.0}.normalized()},
      {{0.0, -25.0, 8.0}, Vec3{1.0, 0.35, 0.0}.normalized()},
      {{0.0, 0.0, 4.0}, {1.0, 0.0, 0.0}},
  };

  std::uint64_t hash() const {
    auto bits = [](double d) { return std::bit_cast<std::uint64_t>(d); };
    std::uint64_t h = mix_seed({bits(standoff_radius), bits(approach_height),
                                static_cast<std::uint64_t>(fingers.size())});
    for (const auto& f : fingers)
      h = mix_seed({h, bits(f.offset.x), bits(f.offset.y), bits(f.offset.z),
                    bits(f.direction.x), bits(f.direction.y), bits(f.direction.z)});
    return h;
  }
};

struct HandPose {
  int pose_index = 0;
  int grid_size = 360;  // L

  double azimuth() const { return pose_index * kTwoPi / grid_size; }
};

/// A finger contact in the hand reference frame.
struct Contact {
  Vec3 position;  // mm
  Vec3 normal;    // unit, pointing out of the surface toward the finger
};

struct GraspObservation {
  std::array<Contact, 3> contacts;
  int pose_index = 0;
};

struct NoiseModel {
  double sigma_distance = 1.0;   // mm, per axis
  double sigma_angle = 0.05;     // rad
  std::uint64_t rng_seed = 0;
};

enum class NoiseStream : std::uint64_t { Train = 1, Test = 2 };

/// Hand frame at a pose: origin plus rotation whose columns are the hand
/// axes expressed in the object frame.
inline RigidTransform hand_frame(const HandPose& pose, const HandModel& hand) {
  double phi = pose.azimuth();
  double c = std::cos(phi), s = std::sin(phi);
  Vec3 origin{hand.standoff_radius * c, hand.standoff_radius * s, hand.approach_height};
  Vec3 ex{-c, -s, 0};          // toward the object axis
  Vec3 ez{0, 0, 1};
  Vec3 ey = ez.cross(ex);
  // columns ex, ey, ez
  Mat3 rot = Mat3::from_rows({ex.x, ey.x, ez.x}, {ex.y, ey.y, ez.y}, {ex.z, ey.z, ez.z});
  return {rot, origin};
}

/// Cast the three finger rays at the given pose and return the contacts in
/// the hand frame. Deterministic; throws MissedGraspError if a ray misses.
inline GraspObservation grasp_at(const TriangleMesh& mesh, const HandPose& pose,
                                 const HandModel& hand) {
  RigidTransform frame = hand_frame(pose, hand);
  RigidTransform to_hand = frame.inverse();
  GraspObservation obs;
  obs.pose_index = pose.pose_index;
  for (std::size_t i = 0; i < 3; ++i) {
    const FingerRay& finger = hand.fingers.at(i);
    Ray ray{frame.apply_point(finger.offset), frame.apply_direction(finger.direction)};
    auto hit = ray_intersect(mesh, ray);
    if (!hit)
      throw MissedGraspError("finger " + std::to_string(i) + " missed at pose " +
                             std::to_string(pose.pose_index));
    obs.contacts[i].position = to_hand.apply_point(hit->point);
    obs.contacts[i].normal = to_hand.apply_direction(hit->normal);
  }
  return obs;
}

/// Noisy copy of an observation. Positions get per-axis Gaussian offsets,
/// normals are rotated by a Gaussian angle about a random axis. The draw is a
/// pure function of (seed, pose_index, sample_index, stream), which keeps the
/// train and test noise streams independent.
inline GraspObservation perturb(const GraspObservation& obs, const NoiseModel& noise,
                                int sample_index, NoiseStream stream) {
  Rng rng(mix_seed({noise.rng_seed, static_cast<std::uint64_t>(obs.pose_index),
                    static_cast<std::uint64_t>(sample_index),
                    static_cast<std::uint64_t>(stream)}));
  GraspObservation out = obs;
  for (auto& c : out.contacts) {
    c.position += Vec3{rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()} *
                  noise.sigma_distance;
    Vec3 axis = rng.next_unit_vector();
    double angle = rng.next_gaussian() * noise.sigma_angle;
    c.normal = (Mat3::axis_angle(axis, angle) * c.normal).normalized();
  }
  return out;
}

/// Noiseless observations for every pose of the L-grid; missed poses are
/// recorded as invalid rather than padded.
struct PoseGrid {
  std::string object_name;
  int grid_size = 360;
  std::uint64_t hand_hash = 0;
  std::vector<std::optional<GraspObservation>> poses;  // size == grid_size

  int valid_count() const {
    int n = 0;
    for (const auto& p : poses) n += p.has_value() ? 1 : 0;
    return n;
  }
};

inline PoseGrid build_pose_grid(const TriangleMesh& mesh, const std::string& object_name,
                                int grid_size, const HandModel& hand) {
  if (grid_size < 1) throw GraspError("pose grid size must be >= 1");
  PoseGrid grid;
  grid.object_name = object_name;
  grid.grid_size = grid_size;
  grid.hand_hash = hand.hash();
  grid.poses.resize(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) {
    try {
      grid.poses[static_cast<std::size_t>(i)] = grasp_at(mesh, {i, grid_size}, hand);
    } catch (const MissedGraspError&) {
      // pose stays invalid
    }
  }
  if (grid.valid_count() * 10 < grid_size)
    throw GraspError("object unreachable: fewer than 10% of poses yield grasps for " +
                     object_name);
  return grid;
}

// ---------------------------------------------------------------------------
// Contact-file interchange format: header "name L hand_hash", then one line
// per valid pose with the 3 contacts as 18 decimal fields. A real-robot
// pipeline can substitute its own files here.

inline void save_contacts(const PoseGrid& grid, std::ostream& out) {
  out << grid.object_name << " " << grid.grid_size << " " << grid.hand_hash << "\n";
  out.precision(17);
  for (int i = 0; i < grid.grid_size; ++i) {
    const auto& p = grid.poses[static_cast<std::size_t>(i)];
    if (!p) continue;
    out << i;
    for (const auto& c : p->contacts)
      out << " " << c.position.x << " " << c.position.y << " " << c.position.z << " "
          << c.normal.x << " " << c.normal.y << " " << c.normal.z;
    out << "\n";
  }
}

inline void save_contacts(const PoseGrid& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GraspError("cannot open for writing: " + path);
  save_contacts(grid, out);
}

inline PoseGrid load_contacts(std::istream& in) {
  PoseGrid grid;
  std::string header;
  if (!std::getline(in, header)) throw GraspError("empty contact file");
  std::istringstream hs(header);
  if (!(hs >> grid.object_name >> grid.grid_size >> grid.hand_hash))
    throw GraspError("malformed contact-file header");
  if (grid.grid_size < 1) throw GraspError("bad grid size in contact file");
  grid.poses.resize(static_cast<std::size_t>(grid.grid_size));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int idx;
    if (!(ls >> idx)) throw GraspError("malformed contact record");
    if (idx < 0 || idx >= grid.grid_size) throw GraspError("pose index out of range");
    GraspObservation obs;
    obs.pose_index = idx;
    for (auto& c : obs.contacts) {
      if (!(ls >> c.position.x >> c.position.y >> c.position.z >> c.normal.x >>
            c.normal.y >> c.normal.z))
        throw GraspError("malformed contact record");
    }
    grid.poses[static_cast<std::size_t>(idx)] = obs;
  }
  return grid;
}

inline PoseGrid load_contacts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraspError("cannot open contact file: " + path);
  return load_contacts(in);
}

}  // namespace graspid
