#pragma once

#include <vector>

#include "scenegen/scene.hpp"
#include "scenegen/world.hpp"

namespace scenegen {

// Top-down max-height grid over the queried-region footprint, aligned to
// the region yaw. Cells with nothing above the surface hold the surface
// top height. Values are absolute world z in meters.
struct Heightmap {
  int grid = 0;
  QueriedRegion region;
  std::vector<double> values;  // row-major: values[iy * grid + ix]

  double at(int ix, int iy) const { return values[iy * grid + ix]; }
};

// Height of the body's top surface over the vertical line through world
// (x, y); -inf when the line misses the body.
double body_top_height(const RigidBody& body, double x, double y);

Heightmap render_heightmap(const World& world, const QueriedRegion& region,
                           int grid);

// Max height over an axis-aligned world rectangle, sampled on a coarse
// grid; used for support-height heuristics.
double max_height_in_rect(const World& world, double x0, double y0, double x1,
                          double y1, double surface_top, int samples = 8);

}  // namespace scenegen
