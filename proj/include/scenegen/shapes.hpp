#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace scenegen {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using Mat3 = Eigen::Matrix3d;

// Convex primitive. dims meaning by kind:
//   Cuboid   — half-extents (hx, hy, hz)
//   Cylinder — (radius, half_height, 0), axis along local z
//   Sphere   — (radius, 0, 0)
struct Shape {
  enum class Kind { Cuboid, Cylinder, Sphere };

  Kind kind = Kind::Cuboid;
  Vec3 dims = Vec3(0.025, 0.025, 0.025);

  static Shape cuboid(double hx, double hy, double hz);
  static Shape cylinder(double radius, double half_height);
  static Shape sphere(double radius);

  // Throws std::invalid_argument on non-positive dimensions.
  void validate() const;

  // Distance from the body origin to the lowest surface point when the
  // body is upright (yaw-only orientation).
  double bottom_offset() const;

  // Radius of a bounding sphere centered at the origin.
  double bounding_radius() const;

  // Principal moments of inertia for the given mass (local frame diagonal).
  Vec3 inertia(double mass) const;

  double volume() const;

  bool operator==(const Shape&) const = default;
};

const char* to_string(Shape::Kind kind);
Shape::Kind shape_kind_from_string(const std::string& name);

// Polyhedral collision proxy: cuboids exactly, cylinders as a regular
// prism. Spheres are handled analytically and never build a proxy.
struct ConvexHull {
  std::vector<Vec3> vertices;            // local frame
  struct Face {
    Vec3 normal;                         // outward, local frame
    std::vector<int> verts;              // CCW when viewed from outside
  };
  std::vector<Face> faces;
  std::vector<Vec3> edge_dirs;           // unique edge directions, unit
};

// Number of segments used for the cylinder prism proxy.
inline constexpr int kCylinderFacets = 16;

// Builds the proxy for cuboids and cylinders; throws for spheres.
ConvexHull make_collision_hull(const Shape& shape);

}  // namespace scenegen
