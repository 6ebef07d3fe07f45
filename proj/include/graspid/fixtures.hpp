#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "graspid/mesh.hpp"

namespace graspid::fixtures {

inline constexpr double kPi = 3.14159265358979323846;

namespace detail {

inline std::uint32_t add_vertex(TriangleMesh& m, const Vec3& v) {
  m.vertices.push_back(v);
  return static_cast<std::uint32_t>(m.vertices.size() - 1);
}

inline void add_tri(TriangleMesh& m, std::uint32_t a, std::uint32_t b, std::uint32_t c) {
  m.triangles.push_back({a, b, c});
}

/// Closed cylinder, axis z, centered at origin.
inline void append_cylinder(TriangleMesh& m, double radius, double height, int segments,
                            const Vec3& center = {}) {
  double hz = height / 2.0;
  std::uint32_t base = static_cast<std::uint32_t>(m.vertices.size());
  for (int i = 0; i < segments; ++i) {
    double a = 2.0 * kPi * i / segments;
    double cx = radius * std::cos(a), cy = radius * std::sin(a);
    add_vertex(m, center + Vec3{cx, cy, -hz});
    add_vertex(m, center + Vec3{cx, cy, hz});
  }
  std::uint32_t cb = add_vertex(m, center + Vec3{0, 0, -hz});
  std::uint32_t ct = add_vertex(m, center + Vec3{0, 0, hz});
  for (int i = 0; i < segments; ++i) {
    std::uint32_t i0 = base + 2 * static_cast<std::uint32_t>(i);
    std::uint32_t i1 = base + 2 * static_cast<std::uint32_t>((i + 1) % segments);
    add_tri(m, i0, i1, i0 + 1);
    add_tri(m, i1, i1 + 1, i0 + 1);
    add_tri(m, cb, i1, i0);
    add_tri(m, ct, i0 + 1, i1 + 1);
  }
}

/// Axis-aligned box given half extents.
inline void append_box(TriangleMesh& m, const Vec3& half) {
  std::uint32_t base = static_cast<std::uint32_t>(m.vertices.size());
  for (int i = 0; i < 8; ++i)
    add_vertex(m, {(i & 1) ? half.x : -half.x, (i & 2) ? half.y : -half.y,
                   (i & 4) ? half.z : -half.z});
  static const int faces[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                                  {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& f : faces) {
    add_tri(m, base + f[0], base + f[1], base + f[2]);
    add_tri(m, base + f[0], base + f[2], base + f[3]);
  }
}

/// Torus, tube around a circle of radius `major` in the xz plane, centered at
/// `center`, circle axis y. Used for the mug handle.
inline void append_torus_xz(TriangleMesh& m, double major, double minor, int seg_major,
                            int seg_minor, const Vec3& center) {
  std::uint32_t base = static_cast<std::uint32_t>(m.vertices.size());
  for (int i = 0; i < seg_major; ++i) {
    double u = 2.0 * kPi * i / seg_major;
    Vec3 ring_center = center + Vec3{major * std::cos(u), 0, major * std::sin(u)};
    Vec3 radial{std::cos(u), 0, std::sin(u)};
    for (int j = 0; j < seg_minor; ++j) {
      double v = 2.0 * kPi * j / seg_minor;
      Vec3 p = ring_center + radial * (minor * std::cos(v)) + Vec3{0, minor * std::sin(v), 0};
      add_vertex(m, p);
    }
  }
  for (int i = 0; i < seg_major; ++i)
    for (int j = 0; j < seg_minor; ++j) {
      std::uint32_t a = base + static_cast<std::uint32_t>(i * seg_minor + j);
      std::uint32_t b = base + static_cast<std::uint32_t>(((i + 1) % seg_major) * seg_minor + j);
      std::uint32_t c = base + static_cast<std::uint32_t>(i * seg_minor + (j + 1) % seg_minor);
      std::uint32_t d = base + static_cast<std::uint32_t>(((i + 1) % seg_major) * seg_minor +
                                                          (j + 1) % seg_minor);
      add_tri(m, a, b, d);
      add_tri(m, a, d, c);
    }
}

}  // namespace detail

/// Icosphere (subdivided icosahedron). Level 3 has 642 vertices.
inline TriangleMesh make_icosphere(double radius, int subdivisions) {
  TriangleMesh m;
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  const Vec3 base[12] = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (const auto& v : base) m.vertices.push_back(v.normalized() * radius);
  m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                 {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                 {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                 {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
    auto mid = [&](std::uint32_t a, std::uint32_t b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 p = ((m.vertices[a] + m.vertices[b]) / 2.0).normalized() * radius;
      std::uint32_t idx = detail::add_vertex(m, p);
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<std::uint32_t, 3>> next;
    next.reserve(m.triangles.size() * 4);
    for (const auto& tri : m.triangles) {
      std::uint32_t ab = mid(tri[0], tri[1]);
      std::uint32_t bc = mid(tri[1], tri[2]);
      std::uint32_t ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.triangles = std::move(next);
  }
  m.compute_normals();
  return m;
}

/// Hemispherical shell, opening up, centered so the rim plane is z = +h/2
/// where h is the outer radius. Outer and inner surfaces plus a flat rim ring.
inline TriangleMesh make_bowl(double outer_radius, double thickness, int segments,
                              int rings) {
  TriangleMesh m;
  double inner = outer_radius - thickness;
  double zc = outer_radius / 2.0;  // shell spans z in [-zc, +zc]
  auto shell = [&](double r, bool flip) {
    std::uint32_t base = static_cast<std::uint32_t>(m.vertices.size());
    // pole at bottom, rings up to the rim
    detail::add_vertex(m, {0, 0, zc - r});
    for (int i = 1; i <= rings; ++i) {
      double polar = (kPi / 2.0) * i / rings;  // 0 at pole, pi/2 at rim
      for (int j = 0; j < segments; ++j) {
        double a = 2.0 * kPi * j / segments;
        detail::add_vertex(m, {r * std::sin(polar) * std::cos(a),
                               r * std::sin(polar) * std::sin(a),
                               zc - r * std::cos(polar)});
      }
    }
    auto ring_v = [&](int i, int j) {
      return base + 1 + static_cast<std::uint32_t>((i - 1) * segments + (j % segments));
    };
    for (int j = 0; j < segments; ++j) {
      if (flip) detail::add_tri(m, base, ring_v(1, j + 1), ring_v(1, j));
      else detail::add_tri(m, base, ring_v(1, j), ring_v(1, j + 1));
    }
    for (int i = 1; i < rings; ++i)
      for (int j = 0; j < segments; ++j) {
        auto a = ring_v(i, j), b = ring_v(i, j + 1), c = ring_v(i + 1, j),
             d = ring_v(i + 1, j + 1);
        if (flip) {
          detail::add_tri(m, a, d, b);
          detail::add_tri(m, a, c, d);
        } else {
          detail::add_tri(m, a, b, d);
          detail::add_tri(m, a, d, c);
        }
      }
    return base;
  };
  std::uint32_t outer_base = shell(outer_radius, false);
  std::uint32_t inner_base = shell(inner, true);
  // rim ring joining outer and inner top circles
  auto outer_rim = [&](int j) {
    return outer_base + 1 +
           static_cast<std::uint32_t>((rings - 1) * segments + (j % segments));
  };
  auto inner_rim = [&](int j) {
    return inner_base + 1 +
           static_cast<std::uint32_t>((rings - 1) * segments + (j % segments));
  };
  for (int j = 0; j < segments; ++j) {
    detail::add_tri(m, outer_rim(j), outer_rim(j + 1), inner_rim(j));
    detail::add_tri(m, outer_rim(j + 1), inner_rim(j + 1), inner_rim(j));
  }
  m.compute_normals();
  return m;
}

struct FixtureInfo {
  std::string name;
  std::string shape;      // human-readable size note
  double max_radius = 0;  // radial extent from the z axis, mm
};

/// The five bundled synthetic objects. Sizes follow common desk objects;
/// all are centered on the z axis with centroid near the origin.
inline const std::vector<FixtureInfo>& fixture_list() {
  static const std::vector<FixtureInfo> list = {
      {"tuna_can", "cylinder r=42.5 h=33", 42.5},
      {"mug", "cylinder r=40 h=80 + handle torus", 68.0},
      {"bowl", "hemispherical shell r=80 t=6", 80.0},
      {"baseball", "sphere r=36.5", 36.5},
      {"foam_brick", "box 65 x 75 x 50", 49.6},
  };
  return list;
}

inline TriangleMesh make_fixture(const std::string& name) {
  TriangleMesh m;
  if (name == "tuna_can") {
    detail::append_cylinder(m, 42.5, 33.0, 48);
  } else if (name == "mug") {
    detail::append_cylinder(m, 40.0, 80.0, 48);
    // handle: torus in the xz plane, sticking out along +x
    detail::append_torus_xz(m, 20.0, 8.0, 24, 12, {48.0, 0.0, 0.0});
  } else if (name == "bowl") {
    return make_bowl(80.0, 6.0, 48, 12);
  } else if (name == "baseball") {
    return make_icosphere(36.5, 3);
  } else if (name == "foam_brick") {
    detail::append_box(m, {32.5, 37.5, 25.0});
  } else {
    throw std::invalid_argument("unknown fixture: " + name);
  }
  m.compute_normals();
  return m;
}

}  // namespace graspid::fixtures
