#include "scenegen/observation.hpp"

#include <cmath>

namespace scenegen {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::vector<TrajectorySample> subsample_trajectory(const Trajectory& traj,
                                                   int count) {
  std::vector<TrajectorySample> out;
  const int n = static_cast<int>(traj.size());
  if (n == 0 || count < 1) return out;
  if (n <= count) {
    out = traj.samples;
    return out;
  }
  out.reserve(count);
  for (int j = 0; j < count; ++j) {
    const int idx = static_cast<int>(
        std::lround(static_cast<double>(j) * (n - 1) / (count - 1)));
    out.push_back(traj.samples[idx]);
  }
  return out;
}

Eigen::Matrix<double, 8, 1> object_descriptor(const ObjectSpec& object) {
  Eigen::Matrix<double, 8, 1> d = Eigen::Matrix<double, 8, 1>::Zero();
  switch (object.shape.kind) {
    case Shape::Kind::Cuboid:
      d[0] = 1.0;
      d.segment<3>(3) = object.shape.dims;
      break;
    case Shape::Kind::Cylinder:
      d[1] = 1.0;
      d[3] = object.shape.dims.x();
      d[4] = object.shape.dims.y();
      break;
    case Shape::Kind::Sphere:
      d[2] = 1.0;
      d[3] = object.shape.dims.x();
      break;
  }
  d[6] = object.mass;
  d[7] = object.friction;
  return d;
}

void AttemptHistoryBuffer::push(const Eigen::Vector4d& action,
                                const Trajectory& traj,
                                const QueriedRegion& region) {
  if (size() == capacity_) {
    if (!sliding_) {
      throw std::logic_error(
          "attempt history full: the generator must have ended the object");
    }
    slots_.erase(slots_.begin());
  }
  AttemptRecord rec;
  rec.action = action;
  rec.samples = subsample_trajectory(traj, traj_samples_);
  rec.region = region;
  slots_.push_back(std::move(rec));
}

Eigen::VectorXd assemble_observation(const Heightmap& heightmap,
                                     const ObjectSpec& object,
                                     const AttemptHistoryBuffer& history,
                                     const QueriedRegion& region,
                                     double placed_frac, double attempt_frac,
                                     const ObservationConfig& cfg) {
  if (heightmap.grid != cfg.grid) {
    throw ObservationError("heightmap resolution does not match config");
  }
  const int dim = cfg.observation_dim();
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(dim);
  int at = 0;

  const double inv_pos = 1.0 / cfg.pos_scale;
  for (int i = 0; i < cfg.grid * cfg.grid; ++i) {
    obs[at++] = (heightmap.values[i] - region.center.z()) * inv_pos;
  }
  obs.segment<8>(at) = object_descriptor(object);
  at += 8;

  const int slots = std::min(history.size(), cfg.history_slots);
  if (!cfg.open_loop) {
    for (int sidx = 0; sidx < slots; ++sidx) {
      const AttemptRecord& rec = history.slot(sidx);
      int base = at + sidx * cfg.slot_width();
      for (int k = 0; k < static_cast<int>(rec.samples.size()) &&
                      k < cfg.traj_samples; ++k) {
        const TrajectorySample& s = rec.samples[k];
        obs[base + 0] = (s.position.x() - region.center.x()) * inv_pos;
        obs[base + 1] = (s.position.y() - region.center.y()) * inv_pos;
        obs[base + 2] = (s.position.z() - region.center.z()) * inv_pos;
        obs[base + 3] = s.orientation.w();
        obs[base + 4] = s.orientation.x();
        obs[base + 5] = s.orientation.y();
        obs[base + 6] = s.orientation.z();
        obs[base + 7] = s.linear_velocity.x() / cfg.lin_vel_scale;
        obs[base + 8] = s.linear_velocity.y() / cfg.lin_vel_scale;
        obs[base + 9] = s.linear_velocity.z() / cfg.lin_vel_scale;
        obs[base + 10] = s.angular_velocity.x() / cfg.ang_vel_scale;
        obs[base + 11] = s.angular_velocity.y() / cfg.ang_vel_scale;
        obs[base + 12] = s.angular_velocity.z() / cfg.ang_vel_scale;
        base += 13;
      }
      base = at + sidx * cfg.slot_width() + 13 * cfg.traj_samples;
      obs.segment<4>(base) = rec.action;
      base += 4;
      obs[base + 0] = rec.region.center.x() * inv_pos;
      obs[base + 1] = rec.region.center.y() * inv_pos;
      obs[base + 2] = rec.region.center.z() * inv_pos;
      obs[base + 3] = rec.region.half_extents.x() * inv_pos;
      obs[base + 4] = rec.region.half_extents.y() * inv_pos;
      obs[base + 5] = rec.region.half_extents.z() * inv_pos;
      obs[base + 6] = rec.region.yaw / kPi;
    }
  }
  at += cfg.history_slots * cfg.slot_width();

  obs[at++] = placed_frac;
  obs[at++] = attempt_frac;

  if (!obs.allFinite()) {
    throw ObservationError("observation contains non-finite values");
  }
  return obs;
}

Eigen::VectorXd assemble_observation(const World& world,
                                     const QueriedRegion& region,
                                     const ObjectSpec& object,
                                     const AttemptHistoryBuffer& history,
                                     double placed_frac, double attempt_frac,
                                     const ObservationConfig& cfg) {
  const Heightmap hm = render_heightmap(world, region, cfg.grid);
  return assemble_observation(hm, object, history, region, placed_frac,
                              attempt_frac, cfg);
}

}  // namespace scenegen
