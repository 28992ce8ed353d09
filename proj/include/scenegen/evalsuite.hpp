#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "scenegen/ppo.hpp"

namespace scenegen {

struct EvalReport {
  int episodes = 0;
  double success_rate = 0.0;
  // Stable attempts contribute their stability-onset step, failed attempts
  // the full settle budget; averaged over all attempts.
  double stable_steps_mean = 0.0;
  double stable_steps_std = 0.0;
  std::vector<int> attempt_histogram;  // index i: placements committed on attempt i+1
  double wall_clock_seconds = 0.0;
};

nlohmann::json eval_report_to_json(const EvalReport& report);

// Drives one episode with the random-rejection-sampling baseline: uniform
// (x, y, yaw) over the region, z from the support-height heuristic (max
// scene height under the object footprint), identical settling, stability
// checking and attempt budget as the learned generator.
Vec4 rrs_action(GeneratorEnv& env, Rng& rng);
EpisodeRecord rrs_episode(const SceneSpec& spec, const GeneratorConfig& cfg,
                          const ObservationConfig& obs_cfg, Rng& rng);

// Evaluates a policy (or RRS when policy == nullptr) over seeded episodes;
// fan-out across jobs is deterministic (per-episode rng streams).
EvalReport evaluate(const ActorCritic* policy, const SceneSpec& spec,
                    const GeneratorConfig& cfg, const ObservationConfig& obs_cfg,
                    int episodes, std::uint64_t seed,
                    const RegionChange* change = nullptr, int jobs = 1,
                    std::vector<EpisodeRecord>* records = nullptr);

enum class Variant { Full, OpenLoop, ShortMemory, TruncNormal };
Variant variant_from_string(const std::string& name);
const char* to_string(Variant variant);

// Maps a variant onto observation/policy configuration: OL zeroes the
// history block, SM keeps a single-slot buffer, TruncNormal swaps the
// distribution head.
void apply_variant(Variant variant, ObservationConfig& obs_cfg, PolicyHead& head);

struct AblationResult {
  Variant variant;
  TrainResult train;
  EvalReport eval;
};

AblationResult run_ablation(Variant variant, const SceneSpec& spec,
                            const GeneratorConfig& cfg,
                            ObservationConfig obs_cfg, TrainerConfig train_cfg,
                            std::uint64_t seed, int eval_episodes);

struct DiversityMap {
  struct PerObject {
    std::string object_id;
    std::vector<std::pair<double, double>> points;  // region frame (x, y)
    double box_min_x = 0.0, box_min_y = 0.0, box_max_x = 0.0, box_max_y = 0.0;
    double coverage_ratio = 0.0;  // box area / region footprint area
  };
  std::vector<PerObject> per_object;
  double mean_coverage_ratio = 0.0;
  double success_rate = 0.0;
};

// Placement projection and coverage boxes from finished episode records.
DiversityMap diversity_from_records(const std::vector<EpisodeRecord>& records,
                                    const SceneSpec& spec);

DiversityMap diversity_map(const ActorCritic& policy, const SceneSpec& spec,
                           const GeneratorConfig& cfg,
                           const ObservationConfig& obs_cfg, int scenes,
                           std::uint64_t seed, int jobs = 1);

void write_diversity_csv(const DiversityMap& map, const std::string& path);
// Simple raster scatter of the placement points, one panel per object.
void write_diversity_image(const DiversityMap& map, const SceneSpec& spec,
                           const std::string& path);

// Success rate per test-time region change over seeded episodes.
std::map<std::string, EvalReport> generalization_eval(
    const ActorCritic& policy, const SceneSpec& spec,
    const GeneratorConfig& cfg, const ObservationConfig& obs_cfg, int episodes,
    std::uint64_t seed, int jobs = 1);

// Success rate as a function of the attempt budget.
std::vector<std::pair<int, double>> attempts_study(
    const ActorCritic& policy, const SceneSpec& spec, GeneratorConfig cfg,
    const ObservationConfig& obs_cfg, const std::vector<int>& budgets,
    int episodes, std::uint64_t seed, int jobs = 1);

// Mean recorded stable steps per attempt index, restricted to objects that
// needed at least min_attempts attempts. Empty slots are NaN.
std::vector<double> stable_steps_vs_attempt(
    const std::vector<EpisodeRecord>& records, int max_attempts,
    int min_attempts = 3);

}  // namespace scenegen
