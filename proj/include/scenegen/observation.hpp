#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "scenegen/heightmap.hpp"
#include "scenegen/scene.hpp"

namespace scenegen {

struct ObservationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ObservationConfig {
  int grid = 64;           // heightmap resolution (G x G)
  int history_slots = 5;   // = max placement attempts I
  int traj_samples = 12;   // subsampled trajectory rows per attempt
  bool open_loop = false;  // zero out the history block (OL ablation)
  // Positions are divided by the default table half-diagonal; velocities by
  // 1 m/s and 2*pi rad/s.
  double pos_scale = 0.46097722286464435;
  double lin_vel_scale = 1.0;
  double ang_vel_scale = 2.0 * 3.14159265358979323846;

  int slot_width() const { return 13 * traj_samples + 4 + 7; }
  int observation_dim() const {
    return grid * grid + 8 + history_slots * slot_width() + 2;
  }
};

// Uniform subsample keeping first and last samples; shorter trajectories
// are returned as-is (callers zero-pad).
std::vector<TrajectorySample> subsample_trajectory(const Trajectory& traj,
                                                   int count);

// Shape one-hot (3) + dims (3) + mass + friction.
Eigen::Matrix<double, 8, 1> object_descriptor(const ObjectSpec& object);

struct AttemptRecord {
  Eigen::Vector4d action = Eigen::Vector4d::Zero();
  std::vector<TrajectorySample> samples;  // <= traj_samples entries
  QueriedRegion region;
};

// Fixed-capacity record of failed placement attempts for the current
// object. The full model errors on overflow (the generator must have
// ended the object); the short-memory ablation keeps only the latest
// attempts instead.
class AttemptHistoryBuffer {
 public:
  explicit AttemptHistoryBuffer(int capacity, int traj_samples = 12,
                                bool sliding = false)
      : capacity_(capacity), traj_samples_(traj_samples), sliding_(sliding) {}

  void push(const Eigen::Vector4d& action, const Trajectory& traj,
            const QueriedRegion& region);
  void clear() { slots_.clear(); }

  int size() const { return static_cast<int>(slots_.size()); }
  int capacity() const { return capacity_; }
  const AttemptRecord& slot(int i) const { return slots_.at(i); }

 private:
  int capacity_;
  int traj_samples_;
  bool sliding_;
  std::vector<AttemptRecord> slots_;
};

Eigen::VectorXd assemble_observation(const Heightmap& heightmap,
                                     const ObjectSpec& object,
                                     const AttemptHistoryBuffer& history,
                                     const QueriedRegion& region,
                                     double placed_frac, double attempt_frac,
                                     const ObservationConfig& cfg);

// Convenience overload that renders the heightmap itself.
Eigen::VectorXd assemble_observation(const World& world,
                                     const QueriedRegion& region,
                                     const ObjectSpec& object,
                                     const AttemptHistoryBuffer& history,
                                     double placed_frac, double attempt_frac,
                                     const ObservationConfig& cfg);

}  // namespace scenegen
