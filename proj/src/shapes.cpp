#include "scenegen/shapes.hpp"

#include <cmath>
#include <stdexcept>

namespace scenegen {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Shape Shape::cuboid(double hx, double hy, double hz) {
  Shape s;
  s.kind = Kind::Cuboid;
  s.dims = Vec3(hx, hy, hz);
  s.validate();
  return s;
}

Shape Shape::cylinder(double radius, double half_height) {
  Shape s;
  s.kind = Kind::Cylinder;
  s.dims = Vec3(radius, half_height, 0.0);
  s.validate();
  return s;
}

Shape Shape::sphere(double radius) {
  Shape s;
  s.kind = Kind::Sphere;
  s.dims = Vec3(radius, 0.0, 0.0);
  s.validate();
  return s;
}

void Shape::validate() const {
  switch (kind) {
    case Kind::Cuboid:
      if (dims.x() <= 0.0 || dims.y() <= 0.0 || dims.z() <= 0.0) {
        throw std::invalid_argument("cuboid half-extents must be positive");
      }
      break;
    case Kind::Cylinder:
      if (dims.x() <= 0.0 || dims.y() <= 0.0) {
        throw std::invalid_argument("cylinder radius/half-height must be positive");
      }
      break;
    case Kind::Sphere:
      if (dims.x() <= 0.0) {
        throw std::invalid_argument("sphere radius must be positive");
      }
      break;
  }
}

double Shape::bottom_offset() const {
  switch (kind) {
    case Kind::Cuboid:
      return dims.z();
    case Kind::Cylinder:
      return dims.y();
    case Kind::Sphere:
      return dims.x();
  }
  return 0.0;
}

double Shape::bounding_radius() const {
  switch (kind) {
    case Kind::Cuboid:
      return dims.norm();
    case Kind::Cylinder:
      return std::hypot(dims.x(), dims.y());
    case Kind::Sphere:
      return dims.x();
  }
  return 0.0;
}

Vec3 Shape::inertia(double mass) const {
  switch (kind) {
    case Kind::Cuboid: {
      const double w2 = 4.0 * dims.x() * dims.x();
      const double d2 = 4.0 * dims.y() * dims.y();
      const double h2 = 4.0 * dims.z() * dims.z();
      return (mass / 12.0) * Vec3(d2 + h2, w2 + h2, w2 + d2);
    }
    case Kind::Cylinder: {
      const double r2 = dims.x() * dims.x();
      const double h2 = 4.0 * dims.y() * dims.y();
      const double ixy = mass * (3.0 * r2 + h2) / 12.0;
      return Vec3(ixy, ixy, 0.5 * mass * r2);
    }
    case Kind::Sphere: {
      const double i = 0.4 * mass * dims.x() * dims.x();
      return Vec3(i, i, i);
    }
  }
  return Vec3::Zero();
}

double Shape::volume() const {
  switch (kind) {
    case Kind::Cuboid:
      return 8.0 * dims.x() * dims.y() * dims.z();
    case Kind::Cylinder:
      return kPi * dims.x() * dims.x() * 2.0 * dims.y();
    case Kind::Sphere:
      return (4.0 / 3.0) * kPi * dims.x() * dims.x() * dims.x();
  }
  return 0.0;
}

const char* to_string(Shape::Kind kind) {
  switch (kind) {
    case Shape::Kind::Cuboid:
      return "cuboid";
    case Shape::Kind::Cylinder:
      return "cylinder";
    case Shape::Kind::Sphere:
      return "sphere";
  }
  return "unknown";
}

Shape::Kind shape_kind_from_string(const std::string& name) {
  if (name == "cuboid") return Shape::Kind::Cuboid;
  if (name == "cylinder") return Shape::Kind::Cylinder;
  if (name == "sphere") return Shape::Kind::Sphere;
  throw std::invalid_argument("unknown shape kind: " + name);
}

ConvexHull make_collision_hull(const Shape& shape) {
  ConvexHull hull;
  if (shape.kind == Shape::Kind::Cuboid) {
    const Vec3 h = shape.dims;
    for (int i = 0; i < 8; ++i) {
      hull.vertices.emplace_back((i & 1) ? h.x() : -h.x(),
                                 (i & 2) ? h.y() : -h.y(),
                                 (i & 4) ? h.z() : -h.z());
    }
    auto face = [&](Vec3 n, std::vector<int> v) {
      hull.faces.push_back({n, std::move(v)});
    };
    face({1, 0, 0}, {1, 3, 7, 5});
    face({-1, 0, 0}, {0, 4, 6, 2});
    face({0, 1, 0}, {2, 6, 7, 3});
    face({0, -1, 0}, {0, 1, 5, 4});
    face({0, 0, 1}, {4, 5, 7, 6});
    face({0, 0, -1}, {0, 2, 3, 1});
    hull.edge_dirs = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    return hull;
  }
  if (shape.kind == Shape::Kind::Cylinder) {
    const double r = shape.dims.x();
    const double hh = shape.dims.y();
    const int n = kCylinderFacets;
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * kPi * i / n;
      hull.vertices.emplace_back(r * std::cos(a), r * std::sin(a), -hh);
    }
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * kPi * i / n;
      hull.vertices.emplace_back(r * std::cos(a), r * std::sin(a), hh);
    }
    // Side faces.
    for (int i = 0; i < n; ++i) {
      const int j = (i + 1) % n;
      const double a = 2.0 * kPi * (i + 0.5) / n;
      ConvexHull::Face f;
      f.normal = Vec3(std::cos(a), std::sin(a), 0.0);
      f.verts = {i, j, n + j, n + i};
      hull.faces.push_back(std::move(f));
    }
    // Caps.
    ConvexHull::Face top, bottom;
    top.normal = Vec3(0, 0, 1);
    bottom.normal = Vec3(0, 0, -1);
    for (int i = 0; i < n; ++i) {
      top.verts.push_back(n + i);
      bottom.verts.push_back(n - 1 - i);
    }
    hull.faces.push_back(std::move(top));
    hull.faces.push_back(std::move(bottom));
    hull.edge_dirs.emplace_back(0, 0, 1);
    for (int i = 0; i < n / 2; ++i) {
      const double a0 = 2.0 * kPi * i / n;
      const double a1 = 2.0 * kPi * (i + 1) / n;
      Vec3 d(std::cos(a1) - std::cos(a0), std::sin(a1) - std::sin(a0), 0.0);
      hull.edge_dirs.push_back(d.normalized());
    }
    return hull;
  }
  throw std::invalid_argument("spheres have no polyhedral hull");
}

}  // namespace scenegen
