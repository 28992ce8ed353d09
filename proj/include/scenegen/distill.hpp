#pragma once

#include <optional>
#include <string>

#include "scenegen/env.hpp"
#include "scenegen/ppo.hpp"

namespace scenegen {

struct DistillConfig {
  int n_scenes = 500;           // generation runs to record
  int target_samples = 5000;    // dataset size after uniform subsampling
  int views_per_placement = 4;  // jittered viewpoints per committed placement
  double jitter_max = 0.05;     // region-frame translation of the view, meters
  int grid = 32;                // heightmap resolution of placement observations
  int epochs = 1000;
  int hidden = 64;
  int n_layers = 4;
  double lr = 1e-3;
  int batch = 256;
  double pos_scale = 0.46097722286464435;
};

// Support state at the moment a placement was chosen; enough to rebuild
// the world for replay and rendering.
struct SceneSnapshot {
  TableSpec table;
  QueriedRegion region;  // canonical region of the episode
  std::vector<std::pair<ObjectSpec, BodyState>> support;
  ObjectSpec object;     // the queried object
};

World world_from_snapshot(const SceneSnapshot& snap);

struct PlacementSample {
  int scene_id = 0;
  int view_id = 0;
  Eigen::VectorXd observation;  // jittered-view heightmap block (grid^2)
  Eigen::Matrix<double, 8, 1> descriptor;
  // Ground-truth committed pose in the canonical region frame.
  Vec3 pose = Vec3::Zero();  // (x, y) region-frame, z above surface
  double yaw = 0.0;          // relative to the region yaw
  SceneSnapshot snapshot;
};

struct PlacementDataset {
  int grid = 32;
  double pos_scale = 0.46097722286464435;
  std::uint64_t generator_seed = 0;
  std::vector<PlacementSample> samples;
};

// Region-frame label for a committed world pose, and its inverse.
void pose_to_label(const QueriedRegion& region, const Vec3& world_pos,
                   double world_yaw, Vec3& rel_pos, double& rel_yaw);
Pose label_to_world(const QueriedRegion& region, const Vec3& rel_pos,
                    double rel_yaw);

// Replays generation episodes with the policy, recording each committed
// placement as (pre-placement jittered scene view, descriptor) -> pose,
// then uniformly subsamples to the target count. complete=false when too
// few successful placements were available.
PlacementDataset export_dataset(const ActorCritic& policy,
                                const SceneSpec& spec,
                                const GeneratorConfig& cfg,
                                const DistillConfig& dcfg, std::uint64_t seed,
                                const ObservationConfig& obs_cfg,
                                bool* complete = nullptr);

PlacementDataset subsample_dataset(const PlacementDataset& dataset, int n,
                                   Rng& rng);

// Line-delimited JSON: first line is a schema header, then one record per
// sample (observation base64 little-endian float32).
void write_dataset_jsonl(const PlacementDataset& dataset,
                         const std::string& path);
PlacementDataset load_dataset_jsonl(const std::string& path);

// MLP pose regressor: (heightmap block + descriptor) -> (x, y, z, sin yaw,
// cos yaw), positions in pos_scale units.
struct PlacementPolicy {
  Mlp net;
  int grid = 32;
  double pos_scale = 0.46097722286464435;

  Pose predict(const Eigen::VectorXd& observation,
               const Eigen::Matrix<double, 8, 1>& descriptor,
               const QueriedRegion& region) const;
};

struct SupervisedReport {
  double final_loss = 0.0;
  std::vector<double> epoch_loss;
};

PlacementPolicy train_supervised(const PlacementDataset& dataset, int epochs,
                                 const DistillConfig& dcfg, std::uint64_t seed,
                                 SupervisedReport* report = nullptr);

// Held-out test suite: snapshots taken at placement decision points of
// seeded episodes (policy-driven, or RRS when policy is null).
std::vector<SceneSnapshot> make_test_suite(const ActorCritic* policy,
                                           const SceneSpec& spec,
                                           const GeneratorConfig& cfg,
                                           const ObservationConfig& obs_cfg,
                                           int n_cases, std::uint64_t seed);

// Executes predicted poses under the identical overlap/stability/drift
// rules as generation; one shot per case.
double eval_placement(const PlacementPolicy& policy,
                      const std::vector<SceneSnapshot>& test_cases,
                      const GeneratorConfig& cfg);

// Fraction of unique dataset labels that settle stably when replayed in
// their source scenes.
double label_replay_stable_fraction(const PlacementDataset& dataset,
                                    const GeneratorConfig& cfg);

}  // namespace scenegen
