#pragma once

#include <optional>

#include "scenegen/observation.hpp"
#include "scenegen/policy.hpp"
#include "scenegen/scene.hpp"
#include "scenegen/stability.hpp"
#include "scenegen/world.hpp"

namespace scenegen {

struct GeneratorConfig {
  int max_attempts = 5;          // I
  int settle_steps = 240;        // k
  double penalty_scale = 0.005;  // c
  double base_reward = 100.0;    // R0
  double drop_epsilon = 0.002;   // lift above the computed pose before release
  StabilityThresholds thresholds;
  // A successful placement must not move previously committed objects by
  // more than this; measured against their commit poses.
  bool enforce_committed_drift = true;
  double drift_tolerance = 1e-3;
  double overlap_tolerance = 1e-3;
};

struct StepFlags {
  bool attempt_failed = false;
  bool object_done = false;
  bool episode_done = false;
  bool episode_success = false;
};

struct StepResult {
  double reward = 0.0;
  Eigen::VectorXd observation;
  StepFlags flags;
  bool stable = false;
  bool overlap_rejected = false;
  int stable_step = 0;
  double velocity_sum = 0.0;
  double acceleration_sum = 0.0;
  Trajectory trajectory;
};

struct AttemptLog {
  int object_index = 1;  // n, 1-based
  std::string object_id;
  Eigen::Vector4d action = Eigen::Vector4d::Zero();
  bool success = false;
  bool overlap_rejected = false;
  // Stable attempts report the stability-onset step; failed attempts
  // report the full settle budget k.
  int stable_step = 0;
};

struct EpisodeRecord {
  SceneSpec spec;  // region as used this episode (after any change)
  std::vector<PlacementRecord> placements;
  std::vector<AttemptLog> attempts;
  bool success = false;
  double total_reward = 0.0;
  double max_committed_drift = 0.0;
};

// R = -c (velocity_sum + acceleration_sum) + n * 1_stable * R0
inline double placement_reward(double penalty_scale, double base_reward,
                               int object_index, bool stable,
                               double velocity_sum, double acceleration_sum) {
  return -penalty_scale * (velocity_sum + acceleration_sum) +
         (stable ? object_index * base_reward : 0.0);
}

// Sequential-placement episode: one queried object at a time, up to I
// attempts each, physics settling and stability verification per attempt.
class GeneratorEnv {
 public:
  GeneratorEnv(SceneSpec spec, GeneratorConfig cfg, ObservationConfig obs_cfg);

  // Starts a fresh episode: world holds only the static table. A region
  // change, when given, is sampled with the provided rng.
  Eigen::VectorXd reset(Rng& rng, const RegionChange* change = nullptr);

  StepResult step(const Eigen::Vector4d& action);

  bool episode_done() const { return done_; }
  bool episode_success() const { return success_; }
  int object_index() const { return object_index_; }    // n, 1-based
  int attempt_index() const { return attempt_index_; }  // i, 1-based
  int num_objects() const { return static_cast<int>(spec_.query_order.size()); }

  const SceneSpec& spec() const { return spec_; }
  const QueriedRegion& region() const { return region_; }
  const World& world() const { return world_; }
  const ObjectSpec& current_object() const;
  const ObservationConfig& observation_config() const { return obs_cfg_; }
  const GeneratorConfig& config() const { return cfg_; }
  double max_committed_drift() const { return max_drift_; }

  Eigen::VectorXd observe() const;
  EpisodeRecord record() const;

 private:
  SceneSpec spec_;
  GeneratorConfig cfg_;
  ObservationConfig obs_cfg_;

  World world_;
  QueriedRegion region_;
  AttemptHistoryBuffer history_;
  std::vector<std::pair<int, Vec3>> committed_;  // body id -> commit position
  std::vector<PlacementRecord> placements_;
  std::vector<AttemptLog> attempts_;
  int object_index_ = 1;
  int attempt_index_ = 1;
  bool done_ = true;
  bool success_ = false;
  double total_reward_ = 0.0;
  double max_drift_ = 0.0;

  double lift_clear_of_overlap(RigidBody& body) const;
  double committed_drift() const;
};

// Runs a full episode with actions sampled from the policy (or the
// distribution mode when mode_actions is set).
EpisodeRecord rollout_episode(const ActorCritic& policy, GeneratorEnv& env,
                              Rng& rng, bool mode_actions = false,
                              const RegionChange* change = nullptr);

}  // namespace scenegen
