#include "scenegen/heightmap.hpp"

#include <cmath>
#include <limits>

namespace scenegen {

namespace {

constexpr double kMiss = -std::numeric_limits<double>::infinity();

// Intersection of the vertical line (x, y, t) with the shape in its local
// frame; returns the largest t (world z of the top surface) or -inf.
double line_top(const Shape& shape, const Vec3& a, const Vec3& b) {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  auto clip_slab = [&](double origin, double dir, double half) {
    if (std::abs(dir) < 1e-12) {
      return std::abs(origin) <= half;
    }
    double lo = (-half - origin) / dir;
    double hi = (half - origin) / dir;
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    return t0 <= t1;
  };
  auto clip_quadratic = [&](double qa, double qb, double qc) {
    // qa t^2 + qb t + qc <= 0
    if (std::abs(qa) < 1e-14) {
      if (std::abs(qb) < 1e-14) return qc <= 0.0;
      double r = -qc / qb;
      if (qb > 0.0) {
        t1 = std::min(t1, r);
      } else {
        t0 = std::max(t0, r);
      }
      return t0 <= t1;
    }
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) return false;
    const double sq = std::sqrt(disc);
    double lo = (-qb - sq) / (2.0 * qa);
    double hi = (-qb + sq) / (2.0 * qa);
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    return t0 <= t1;
  };

  switch (shape.kind) {
    case Shape::Kind::Cuboid:
      for (int i = 0; i < 3; ++i) {
        if (!clip_slab(a[i], b[i], shape.dims[i])) return kMiss;
      }
      return t1;
    case Shape::Kind::Cylinder: {
      if (!clip_slab(a.z(), b.z(), shape.dims.y())) return kMiss;
      const double qa = b.x() * b.x() + b.y() * b.y();
      const double qb = 2.0 * (a.x() * b.x() + a.y() * b.y());
      const double qc = a.x() * a.x() + a.y() * a.y() - shape.dims.x() * shape.dims.x();
      if (!clip_quadratic(qa, qb, qc)) return kMiss;
      return t1;
    }
    case Shape::Kind::Sphere: {
      const double qa = b.squaredNorm();
      const double qb = 2.0 * a.dot(b);
      const double qc = a.squaredNorm() - shape.dims.x() * shape.dims.x();
      if (!clip_quadratic(qa, qb, qc)) return kMiss;
      return t1;
    }
  }
  return kMiss;
}

}  // namespace

double body_top_height(const RigidBody& body, double x, double y) {
  const Mat3 rt = body.state.orientation.toRotationMatrix().transpose();
  const Vec3 a = rt * (Vec3(x, y, 0.0) - body.state.position);
  const Vec3 b = rt * Vec3::UnitZ();
  return line_top(body.shape, a, b);
}

Heightmap render_heightmap(const World& world, const QueriedRegion& region,
                           int grid) {
  if (grid < 1) throw std::invalid_argument("render_heightmap: grid must be >= 1");
  Heightmap hm;
  hm.grid = grid;
  hm.region = region;
  hm.values.assign(static_cast<std::size_t>(grid) * grid, region.center.z());
  const double c = std::cos(region.yaw);
  const double s = std::sin(region.yaw);
  const double cw = 2.0 * region.half_extents.x() / grid;
  const double ch = 2.0 * region.half_extents.y() / grid;
  for (int iy = 0; iy < grid; ++iy) {
    const double v = -region.half_extents.y() + (iy + 0.5) * ch;
    for (int ix = 0; ix < grid; ++ix) {
      const double u = -region.half_extents.x() + (ix + 0.5) * cw;
      const double x = region.center.x() + c * u - s * v;
      const double y = region.center.y() + s * u + c * v;
      double h = region.center.z();
      for (int bi = 0; bi < world.body_count(); ++bi) {
        const RigidBody& body = world.body(bi);
        const double r = body.shape.bounding_radius();
        const double dx = x - body.state.position.x();
        const double dy = y - body.state.position.y();
        if (dx * dx + dy * dy > r * r) continue;
        h = std::max(h, body_top_height(body, x, y));
      }
      hm.values[iy * grid + ix] = h;
    }
  }
  return hm;
}

double max_height_in_rect(const World& world, double x0, double y0, double x1,
                          double y1, double surface_top, int samples) {
  double best = surface_top;
  for (int iy = 0; iy < samples; ++iy) {
    const double y = y0 + (y1 - y0) * (iy + 0.5) / samples;
    for (int ix = 0; ix < samples; ++ix) {
      const double x = x0 + (x1 - x0) * (ix + 0.5) / samples;
      for (int bi = 0; bi < world.body_count(); ++bi) {
        const RigidBody& body = world.body(bi);
        if (body.is_static()) continue;
        const double r = body.shape.bounding_radius();
        const double dx = x - body.state.position.x();
        const double dy = y - body.state.position.y();
        if (dx * dx + dy * dy > r * r) continue;
        best = std::max(best, body_top_height(body, x, y));
      }
    }
  }
  return best;
}

}  // namespace scenegen
