#include "scenegen/scene.hpp"

#include <algorithm>
#include <cmath>

namespace scenegen {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kSceneSchemaVersion = 1;

const nlohmann::json& require(const nlohmann::json& j, const std::string& key,
                              const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw SceneParseError("scene document: missing field " + path + key);
  }
  return *it;
}

Vec3 parse_vec3(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) {
    throw SceneParseError("scene document: " + path + " must be a 3-array");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

RigidBody TableSpec::to_body() const {
  RigidBody b = RigidBody::make(
      Shape::cuboid(0.5 * width, 0.5 * length, 0.5 * height), 0.0, 0.6, 0.0);
  b.state.position = Vec3(x, y, 0.5 * height);
  b.state.orientation = yaw_quat(yaw);
  return b;
}

const ObjectSpec& SceneSpec::object(const std::string& id) const {
  for (const auto& o : catalog) {
    if (o.id == id) return o;
  }
  throw std::out_of_range("scene catalog has no object with id " + id);
}

RegionChange::Kind region_change_kind_from_string(const std::string& name) {
  if (name == "translation") return RegionChange::Kind::Translation;
  if (name == "rotation") return RegionChange::Kind::Rotation;
  if (name == "shrink" || name == "shrinkage") return RegionChange::Kind::Shrinkage;
  if (name == "expand" || name == "expansion") return RegionChange::Kind::Expansion;
  if (name == "combined") return RegionChange::Kind::Combined;
  throw std::invalid_argument("unknown region change kind: " + name);
}

const char* to_string(RegionChange::Kind kind) {
  switch (kind) {
    case RegionChange::Kind::Translation: return "translation";
    case RegionChange::Kind::Rotation: return "rotation";
    case RegionChange::Kind::Shrinkage: return "shrinkage";
    case RegionChange::Kind::Expansion: return "expansion";
    case RegionChange::Kind::Combined: return "combined";
  }
  return "unknown";
}

bool region_on_surface(const QueriedRegion& region, const TableSpec& table) {
  const double c = std::cos(region.yaw);
  const double s = std::sin(region.yaw);
  const double tc = std::cos(table.yaw);
  const double ts = std::sin(table.yaw);
  for (int i = 0; i < 4; ++i) {
    const double sx = (i & 1) ? region.half_extents.x() : -region.half_extents.x();
    const double sy = (i & 2) ? region.half_extents.y() : -region.half_extents.y();
    const double wx = region.center.x() + c * sx - s * sy;
    const double wy = region.center.y() + s * sx + c * sy;
    // Corner in table frame.
    const double dx = wx - table.x;
    const double dy = wy - table.y;
    const double lx = tc * dx + ts * dy;
    const double ly = -ts * dx + tc * dy;
    if (std::abs(lx) > 0.5 * table.width + 1e-9 ||
        std::abs(ly) > 0.5 * table.length + 1e-9) {
      return false;
    }
  }
  return true;
}

QueriedRegion transform_region(const QueriedRegion& region,
                               const RegionChange& change,
                               const TableSpec& table, Rng& rng) {
  QueriedRegion out = region;
  const auto apply_scale = [&](double sign, double max) {
    // Magnitude in (0, max]; sign -1 shrinks, +1 expands.
    const double dh_x = sign * (max * (1.0 - rng.uniform()));
    const double dh_y = sign * (max * (1.0 - rng.uniform()));
    out.half_extents.x() += dh_x;
    out.half_extents.y() += dh_y;
  };
  const auto apply_rotation = [&] { out.yaw += rng.uniform(-change.rotation_max, change.rotation_max); };
  const auto apply_translation = [&] {
    out.center.x() += rng.uniform(-change.translation_max, change.translation_max);
    out.center.y() += rng.uniform(-change.translation_max, change.translation_max);
  };

  switch (change.kind) {
    case RegionChange::Kind::Translation: apply_translation(); break;
    case RegionChange::Kind::Rotation: apply_rotation(); break;
    case RegionChange::Kind::Shrinkage: apply_scale(-1.0, change.shrink_max); break;
    case RegionChange::Kind::Expansion: apply_scale(1.0, change.expand_max); break;
    case RegionChange::Kind::Combined: {
      // scale, then rotation, then translation
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      apply_scale(sign, sign < 0.0 ? change.shrink_max : change.expand_max);
      apply_rotation();
      apply_translation();
      break;
    }
  }
  if (out.half_extents.x() <= 0.0 || out.half_extents.y() <= 0.0) {
    throw InvalidRegionChange("region change produced non-positive half-extents");
  }
  if (!region_on_surface(out, table)) {
    throw InvalidRegionChange("region change escapes the support surface");
  }
  return out;
}

Pose action_to_world_pose(const QueriedRegion& region,
                          const Eigen::Vector4d& action,
                          const ObjectSpec& object) {
  for (int i = 0; i < 4; ++i) {
    if (action[i] < -1.0 - 1e-9 || action[i] > 1.0 + 1e-9) {
      throw std::invalid_argument("action components must lie in [-1, 1]");
    }
  }
  const double lx = action[0] * region.half_extents.x();
  const double ly = action[1] * region.half_extents.y();
  const double c = std::cos(region.yaw);
  const double s = std::sin(region.yaw);
  Pose pose;
  pose.position.x() = region.center.x() + c * lx - s * ly;
  pose.position.y() = region.center.y() + s * lx + c * ly;
  const double z_lo = region.center.z() + object.shape.bottom_offset();
  const double z_hi = region.center.z() + 2.0 * region.half_extents.z();
  pose.position.z() = z_lo + 0.5 * (action[2] + 1.0) * (z_hi - z_lo);
  pose.yaw = action[3] * kPi + region.yaw;
  return pose;
}

double action_for_height(const QueriedRegion& region, const ObjectSpec& object,
                         double world_z) {
  const double z_lo = region.center.z() + object.shape.bottom_offset();
  const double z_hi = region.center.z() + 2.0 * region.half_extents.z();
  if (z_hi <= z_lo) return -1.0;
  const double u = (world_z - z_lo) / (z_hi - z_lo);
  return std::clamp(2.0 * u - 1.0, -1.0, 1.0);
}

nlohmann::json serialize_scene(const SceneSpec& spec,
                               const std::vector<PlacementRecord>& placements) {
  nlohmann::json doc;
  doc["version"] = kSceneSchemaVersion;
  doc["table"] = {{"w", spec.table.width},   {"l", spec.table.length},
                  {"h", spec.table.height},  {"pose", {{"x", spec.table.x},
                  {"y", spec.table.y},       {"yaw", spec.table.yaw}}}};
  doc["region"] = {
      {"center", {spec.region.center.x(), spec.region.center.y(), spec.region.center.z()}},
      {"half_extents",
       {spec.region.half_extents.x(), spec.region.half_extents.y(), spec.region.half_extents.z()}},
      {"yaw", spec.region.yaw}};
  doc["catalog"] = nlohmann::json::array();
  for (const auto& o : spec.catalog) {
    doc["catalog"].push_back({{"id", o.id},
                              {"kind", to_string(o.shape.kind)},
                              {"dims", {o.shape.dims.x(), o.shape.dims.y(), o.shape.dims.z()}},
                              {"mass", o.mass},
                              {"friction", o.friction},
                              {"color", o.color}});
  }
  doc["query_order"] = spec.query_order;
  doc["placements"] = nlohmann::json::array();
  for (const auto& p : placements) {
    doc["placements"].push_back(
        {{"id", p.object_id},
         {"position", {p.position.x(), p.position.y(), p.position.z()}},
         {"yaw", p.yaw},
         {"orientation",
          {p.orientation.w(), p.orientation.x(), p.orientation.y(), p.orientation.z()}},
         {"action", {p.action[0], p.action[1], p.action[2], p.action[3]}},
         {"attempts", p.attempts},
         {"stable_step", p.stable_step}});
  }
  return doc;
}

std::pair<SceneSpec, std::vector<PlacementRecord>> deserialize_scene(
    const nlohmann::json& doc) {
  const int version = require(doc, "version", "").get<int>();
  if (version != kSceneSchemaVersion) {
    throw SceneParseError("scene document: unsupported schema version " +
                          std::to_string(version));
  }
  SceneSpec spec;
  const auto& table = require(doc, "table", "");
  spec.table.width = require(table, "w", "table.").get<double>();
  spec.table.length = require(table, "l", "table.").get<double>();
  spec.table.height = require(table, "h", "table.").get<double>();
  const auto& pose = require(table, "pose", "table.");
  spec.table.x = require(pose, "x", "table.pose.").get<double>();
  spec.table.y = require(pose, "y", "table.pose.").get<double>();
  spec.table.yaw = require(pose, "yaw", "table.pose.").get<double>();

  const auto& region = require(doc, "region", "");
  spec.region.center = parse_vec3(require(region, "center", "region."), "region.center");
  spec.region.half_extents =
      parse_vec3(require(region, "half_extents", "region."), "region.half_extents");
  spec.region.yaw = require(region, "yaw", "region.").get<double>();

  for (const auto& o : require(doc, "catalog", "")) {
    ObjectSpec obj;
    obj.id = require(o, "id", "catalog[].").get<std::string>();
    Shape shape;
    shape.kind = shape_kind_from_string(require(o, "kind", "catalog[].").get<std::string>());
    shape.dims = parse_vec3(require(o, "dims", "catalog[]."), "catalog[].dims");
    shape.validate();
    obj.shape = shape;
    obj.mass = require(o, "mass", "catalog[].").get<double>();
    obj.friction = require(o, "friction", "catalog[].").get<double>();
    obj.color = o.value("color", "");
    spec.catalog.push_back(std::move(obj));
  }
  spec.query_order = require(doc, "query_order", "").get<std::vector<std::string>>();

  std::vector<PlacementRecord> placements;
  for (const auto& p : require(doc, "placements", "")) {
    PlacementRecord rec;
    rec.object_id = require(p, "id", "placements[].").get<std::string>();
    rec.position = parse_vec3(require(p, "position", "placements[]."), "placements[].position");
    rec.yaw = require(p, "yaw", "placements[].").get<double>();
    const auto& q = require(p, "orientation", "placements[].");
    if (!q.is_array() || q.size() != 4) {
      throw SceneParseError("scene document: placements[].orientation must be a 4-array");
    }
    rec.orientation = Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                           q[3].get<double>());
    const auto& a = require(p, "action", "placements[].");
    for (int i = 0; i < 4; ++i) rec.action[i] = a[i].get<double>();
    rec.attempts = require(p, "attempts", "placements[].").get<int>();
    rec.stable_step = require(p, "stable_step", "placements[].").get<int>();
    placements.push_back(std::move(rec));
  }
  return {std::move(spec), std::move(placements)};
}

std::vector<ObjectSpec> procedural_catalog(std::uint64_t group_seed, int n) {
  if (n < 1) throw std::invalid_argument("procedural_catalog: n must be >= 1");
  Rng rng(group_seed);
  const char* palette[] = {"red", "green", "blue", "yellow", "gray", "orange"};
  std::vector<ObjectSpec> catalog;
  catalog.reserve(n);
  for (int i = 0; i < n; ++i) {
    ObjectSpec obj;
    const double kind_draw = rng.uniform();
    // Full extents in [0.02, 0.12] m, biased toward the large end so that a
    // handful of objects meaningfully crowds a tabletop.
    auto dim = [&] { return 0.02 + 0.10 * std::sqrt(rng.uniform()); };
    char name[64];
    if (kind_draw < 0.45) {
      const double w = dim(), d = dim(), h = dim();
      obj.shape = Shape::cuboid(0.5 * w, 0.5 * d, 0.5 * h);
      std::snprintf(name, sizeof(name), "obj%02d_cuboid", i);
    } else if (kind_draw < 0.75) {
      const double diameter = std::min(dim(), 0.08);
      const double h = dim();
      obj.shape = Shape::cylinder(0.5 * diameter, 0.5 * h);
      std::snprintf(name, sizeof(name), "obj%02d_cylinder", i);
    } else {
      const double diameter = std::min(dim(), 0.09);
      obj.shape = Shape::sphere(0.5 * diameter);
      std::snprintf(name, sizeof(name), "obj%02d_sphere", i);
    }
    obj.id = name;
    obj.mass = std::clamp(rng.uniform(0.08, 1.0), 0.05, 2.0);
    obj.friction = rng.uniform(0.3, 0.9);
    obj.color = palette[rng.uniform_int(0, 5)];
    catalog.push_back(std::move(obj));
  }
  return catalog;
}

std::vector<ObjectSpec> catalog_group(int group, int n) {
  if (group < 1 || group > 5) {
    throw std::invalid_argument("catalog group must be in [1, 5]");
  }
  static const std::uint64_t kGroupSeeds[5] = {
      901217u, 542190u, 770344u, 118295u, 663708u};
  return procedural_catalog(kGroupSeeds[group - 1], n);
}

SceneSpec make_scene(const TableSpec& table, const Vec3& region_half_extents,
                     int group, int n_objects) {
  SceneSpec spec;
  spec.table = table;
  spec.region.center = Vec3(table.x, table.y, table.top());
  spec.region.half_extents = region_half_extents;
  spec.region.yaw = table.yaw;
  spec.catalog = catalog_group(group, std::max(n_objects, 10));
  for (int i = 0; i < n_objects; ++i) {
    spec.query_order.push_back(spec.catalog[i].id);
  }
  if (!region_on_surface(spec.region, spec.table)) {
    throw std::invalid_argument("region does not fit on the table surface");
  }
  return spec;
}

}  // namespace scenegen
