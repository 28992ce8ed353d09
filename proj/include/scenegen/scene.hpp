#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scenegen/body.hpp"
#include "scenegen/rng.hpp"

namespace scenegen {

struct ObjectSpec {
  std::string id;
  Shape shape;
  double mass = 0.3;      // kg
  double friction = 0.5;
  std::string color;      // metadata tag

  RigidBody to_body() const { return RigidBody::make(shape, mass, friction, 0.0); }
};

// 3D box over the support surface; the action frame of the policy.
// center.z sits at the support-surface top.
struct QueriedRegion {
  Vec3 center = Vec3(0.0, 0.0, 0.70);
  Vec3 half_extents = Vec3(0.25, 0.30, 0.15);
  double yaw = 0.0;
};

struct TableSpec {
  double width = 0.60;   // x extent
  double length = 0.70;  // y extent
  double height = 0.70;  // z extent; top of the surface
  double x = 0.0;        // center of the tabletop footprint
  double y = 0.0;
  double yaw = 0.0;

  double top() const { return height; }
  RigidBody to_body() const;
};

struct SceneSpec {
  TableSpec table;
  QueriedRegion region;
  std::vector<ObjectSpec> catalog;
  std::vector<std::string> query_order;

  const ObjectSpec& object(const std::string& id) const;
  // Builds a fresh world containing only the static table.
  // (Bodies are added by the generator as the episode progresses.)
};

struct RegionChange {
  enum class Kind { Translation, Rotation, Shrinkage, Expansion, Combined };
  Kind kind = Kind::Translation;
  double translation_max = 0.15;  // |dx|, |dy| <= max, meters
  double rotation_max = 3.14159265358979323846;
  double shrink_max = 0.10;       // dh in [-max, 0)
  double expand_max = 0.10;       // dh in (0, max]
};

RegionChange::Kind region_change_kind_from_string(const std::string& name);
const char* to_string(RegionChange::Kind kind);

struct Pose {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
};

struct PlacementRecord {
  std::string object_id;
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  Quat orientation = Quat::Identity();  // full settled orientation for replay
  Eigen::Vector4d action = Eigen::Vector4d::Zero();
  int attempts = 1;
  int stable_step = 0;
};

struct InvalidRegionChange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SceneParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool region_on_surface(const QueriedRegion& region, const TableSpec& table);

// Applies a sampled test-time change. Combined composes
// translation(rotation(scale(region))). Throws InvalidRegionChange when the
// result escapes the support surface or loses positivity.
QueriedRegion transform_region(const QueriedRegion& region,
                               const RegionChange& change,
                               const TableSpec& table, Rng& rng);

// Maps a relative action in [-1,1]^4 onto a world pose: x/y span the
// rotated region footprint, z spans [surface + bottom offset, surface +
// 2 h_z], yaw spans [-pi, pi] composed with the region yaw.
Pose action_to_world_pose(const QueriedRegion& region,
                          const Eigen::Vector4d& action,
                          const ObjectSpec& object);

// Inverse of the z component of action_to_world_pose, clamped to [-1, 1].
double action_for_height(const QueriedRegion& region, const ObjectSpec& object,
                         double world_z);

nlohmann::json serialize_scene(const SceneSpec& spec,
                               const std::vector<PlacementRecord>& placements);
std::pair<SceneSpec, std::vector<PlacementRecord>> deserialize_scene(
    const nlohmann::json& doc);

// Deterministic primitive-object catalog; dims span 2-12 cm.
std::vector<ObjectSpec> procedural_catalog(std::uint64_t group_seed, int n = 10);

// Named seeds emulating the five object groups (1-5).
std::vector<ObjectSpec> catalog_group(int group, int n = 10);

// Scene with the default table and a centered region.
SceneSpec make_scene(const TableSpec& table, const Vec3& region_half_extents,
                     int group, int n_objects);

}  // namespace scenegen
