#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "graspid/vec3.hpp"

namespace graspid {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Immutable watertight triangle mesh. Units are millimetres.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<Vec3> normals;  // per-triangle, unit length, from winding

  void compute_normals() {
    normals.clear();
    normals.reserve(triangles.size());
    for (const auto& t : triangles) {
      const Vec3& a = vertices[t[0]];
      const Vec3& b = vertices[t[1]];
      const Vec3& c = vertices[t[2]];
      Vec3 n = (b - a).cross(c - a);
      double len = n.norm();
      if (len < 1e-15) throw MeshError("degenerate triangle (zero area)");
      normals.push_back(n / len);
    }
  }

  void validate() const {
    if (vertices.size() < 4 || triangles.size() < 4)
      throw MeshError("mesh too small: need >= 4 vertices and >= 4 triangles");
    for (const auto& t : triangles)
      for (auto idx : t)
        if (idx >= vertices.size()) throw MeshError("triangle index out of range");
    if (normals.size() != triangles.size())
      throw MeshError("normals not derived");
  }

  std::pair<Vec3, Vec3> bounding_box() const {
    Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
    Vec3 hi = -lo;
    for (const auto& v : vertices) {
      lo.x = std::min(lo.x, v.x); lo.y = std::min(lo.y, v.y); lo.z = std::min(lo.z, v.z);
      hi.x = std::max(hi.x, v.x); hi.y = std::max(hi.y, v.y); hi.z = std::max(hi.z, v.z);
    }
    return {lo, hi};
  }

  TriangleMesh rotated_z(double angle) const {
    Mat3 r = Mat3::rotation_z(angle);
    TriangleMesh out;
    out.vertices.reserve(vertices.size());
    for (const auto& v : vertices) out.vertices.push_back(r * v);
    out.triangles = triangles;
    out.compute_normals();
    return out;
  }
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

struct Hit {
  Vec3 point;
  Vec3 normal;  // oriented toward the ray origin: dot(normal, dir) <= 0
  double distance = 0.0;
};

/// Nearest positive intersection, Moller-Trumbore per triangle. Brute force;
/// fixture meshes stay below a few thousand triangles.
inline std::optional<Hit> ray_intersect(const TriangleMesh& mesh, const Ray& ray) {
  constexpr double kMinDistance = 1e-9;
  double best_t = std::numeric_limits<double>::max();
  int best_tri = -1;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& tri = mesh.triangles[i];
    const Vec3& v0 = mesh.vertices[tri[0]];
    Vec3 e1 = mesh.vertices[tri[1]] - v0;
    Vec3 e2 = mesh.vertices[tri[2]] - v0;
    Vec3 pvec = ray.direction.cross(e2);
    double det = e1.dot(pvec);
    if (std::abs(det) < 1e-14) continue;  // parallel
    double inv_det = 1.0 / det;
    Vec3 tvec = ray.origin - v0;
    double u = tvec.dot(pvec) * inv_det;
    if (u < -1e-12 || u > 1.0 + 1e-12) continue;
    Vec3 qvec = tvec.cross(e1);
    double v = ray.direction.dot(qvec) * inv_det;
    if (v < -1e-12 || u + v > 1.0 + 1e-12) continue;
    double t = e2.dot(qvec) * inv_det;
    if (t > kMinDistance && t < best_t) {
      best_t = t;
      best_tri = static_cast<int>(i);
    }
  }
  if (best_tri < 0) return std::nullopt;
  Hit hit;
  hit.distance = best_t;
  hit.point = ray.origin + ray.direction * best_t;
  Vec3 n = mesh.normals[static_cast<std::size_t>(best_tri)];
  if (n.dot(ray.direction) > 0.0) n = -n;
  hit.normal = n;
  return hit;
}

// ---------------------------------------------------------------------------
// PLY I/O

namespace detail {

struct PlyProperty {
  std::string type;       // scalar type, or list count/value types joined
  std::string name;
  bool is_list = false;
  std::string count_type;
  std::string value_type;
};

inline std::size_t scalar_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
      t == "float32")
    return 4;
  if (t == "double" || t == "float64" || t == "int64" || t == "uint64") return 8;
  throw MeshError("unknown PLY scalar type: " + t);
}

inline double read_binary_scalar(std::istream& in, const std::string& type) {
  unsigned char buf[8];
  std::size_t n = scalar_size(type);
  in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
  if (!in) throw MeshError("unexpected end of binary PLY data");
  auto as = [&](auto v) {
    std::memcpy(&v, buf, sizeof(v));
    return static_cast<double>(v);
  };
  if (type == "float" || type == "float32") return as(float{});
  if (type == "double" || type == "float64") return as(double{});
  if (type == "char" || type == "int8") return as(std::int8_t{});
  if (type == "uchar" || type == "uint8") return as(std::uint8_t{});
  if (type == "short" || type == "int16") return as(std::int16_t{});
  if (type == "ushort" || type == "uint16") return as(std::uint16_t{});
  if (type == "int" || type == "int32") return as(std::int32_t{});
  if (type == "uint" || type == "uint32") return as(std::uint32_t{});
  if (type == "int64") return as(std::int64_t{});
  if (type == "uint64") return as(std::uint64_t{});
  throw MeshError("unknown PLY scalar type: " + type);
}

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

}  // namespace detail

/// Parse an ASCII or binary-little-endian PLY. Extra properties (color,
/// normals, ...) are skipped. Non-triangular faces and big-endian files are
/// rejected. `scale` multiplies vertex coordinates (e.g. 1000 for files in
/// metres).
inline TriangleMesh load_ply(std::istream& in, double scale = 1.0) {
  std::string line;
  if (!std::getline(in, line)) throw MeshError("empty PLY file");
  // Tolerate CR-LF endings in the header.
  auto strip = [](std::string& s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
  };
  strip(line);
  if (line != "ply") throw MeshError("not a PLY file (missing 'ply' magic)");

  bool binary = false;
  std::vector<detail::PlyElement> elements;
  for (;;) {
    if (!std::getline(in, line)) throw MeshError("PLY header truncated");
    strip(line);
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "comment" || kw == "obj_info" || kw.empty()) continue;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") binary = false;
      else if (fmt == "binary_little_endian") binary = true;
      else throw MeshError("unsupported PLY format: " + fmt);
    } else if (kw == "element") {
      detail::PlyElement el;
      ls >> el.name >> el.count;
      if (!ls) throw MeshError("malformed element line");
      elements.push_back(el);
    } else if (kw == "property") {
      if (elements.empty()) throw MeshError("property before element");
      detail::PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        p.is_list = true;
        ls >> p.count_type >> p.value_type >> p.name;
      } else {
        p.type = t;
        ls >> p.name;
      }
      if (!ls) throw MeshError("malformed property line");
      elements.back().properties.push_back(p);
    } else if (kw == "end_header") {
      break;
    } else {
      throw MeshError("unknown PLY header keyword: " + kw);
    }
  }

  TriangleMesh mesh;
  for (const auto& el : elements) {
    if (el.name == "vertex") {
      int ix = -1, iy = -1, iz = -1;
      for (std::size_t i = 0; i < el.properties.size(); ++i) {
        if (el.properties[i].is_list)
          throw MeshError("list property on vertex element is unsupported");
        if (el.properties[i].name == "x") ix = static_cast<int>(i);
        if (el.properties[i].name == "y") iy = static_cast<int>(i);
        if (el.properties[i].name == "z") iz = static_cast<int>(i);
      }
      if (ix < 0 || iy < 0 || iz < 0)
        throw MeshError("vertex element missing x/y/z properties");
      mesh.vertices.reserve(el.count);
      for (std::size_t v = 0; v < el.count; ++v) {
        std::vector<double> vals(el.properties.size());
        if (binary) {
          for (std::size_t p = 0; p < el.properties.size(); ++p)
            vals[p] = detail::read_binary_scalar(in, el.properties[p].type);
        } else {
          if (!std::getline(in, line)) throw MeshError("truncated vertex data");
          std::istringstream ls(line);
          for (auto& d : vals)
            if (!(ls >> d)) throw MeshError("malformed vertex line");
        }
        mesh.vertices.push_back(Vec3{vals[static_cast<std::size_t>(ix)],
                                     vals[static_cast<std::size_t>(iy)],
                                     vals[static_cast<std::size_t>(iz)]} * scale);
      }
    } else if (el.name == "face") {
      mesh.triangles.reserve(el.count);
      for (std::size_t f = 0; f < el.count; ++f) {
        if (binary) {
          for (const auto& p : el.properties) {
            if (p.is_list) {
              double cnt = detail::read_binary_scalar(in, p.count_type);
              std::vector<double> idx(static_cast<std::size_t>(cnt));
              for (auto& d : idx) d = detail::read_binary_scalar(in, p.value_type);
              if (p.name == "vertex_indices" || p.name == "vertex_index") {
                if (idx.size() != 3)
                  throw MeshError("non-triangular face (count " +
                                  std::to_string(idx.size()) + ")");
                mesh.triangles.push_back({static_cast<std::uint32_t>(idx[0]),
                                          static_cast<std::uint32_t>(idx[1]),
                                          static_cast<std::uint32_t>(idx[2])});
              }
            } else {
              detail::read_binary_scalar(in, p.type);
            }
          }
        } else {
          if (!std::getline(in, line)) throw MeshError("truncated face data");
          std::istringstream ls(line);
          std::size_t cnt;
          if (!(ls >> cnt)) throw MeshError("malformed face line");
          if (cnt != 3)
            throw MeshError("non-triangular face (count " + std::to_string(cnt) + ")");
          std::array<std::uint32_t, 3> tri{};
          for (auto& t : tri)
            if (!(ls >> t)) throw MeshError("malformed face line");
          mesh.triangles.push_back(tri);
        }
      }
    } else {
      // Skip unknown elements.
      for (std::size_t i = 0; i < el.count; ++i) {
        if (binary) {
          for (const auto& p : el.properties) {
            if (p.is_list) {
              double cnt = detail::read_binary_scalar(in, p.count_type);
              for (std::size_t k = 0; k < static_cast<std::size_t>(cnt); ++k)
                detail::read_binary_scalar(in, p.value_type);
            } else {
              detail::read_binary_scalar(in, p.type);
            }
          }
        } else {
          if (!std::getline(in, line)) throw MeshError("truncated element data");
        }
      }
    }
  }

  mesh.compute_normals();
  mesh.validate();
  return mesh;
}

inline TriangleMesh load_ply(const std::string& path, double scale = 1.0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MeshError("cannot open PLY file: " + path);
  return load_ply(in, scale);
}

/// ASCII emitter, round-trip compatible with load_ply.
inline void save_ply(const TriangleMesh& mesh, std::ostream& out) {
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "element face " << mesh.triangles.size() << "\n";
  out << "property list uchar uint vertex_indices\n";
  out << "end_header\n";
  out.precision(17);
  for (const auto& v : mesh.vertices) out << v.x << " " << v.y << " " << v.z << "\n";
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
}

inline void save_ply(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MeshError("cannot open for writing: " + path);
  save_ply(mesh, out);
}

}  // namespace graspid
