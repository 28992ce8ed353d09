#pragma once

#include <string>

#include <json.hpp>

#include "scenegen/distill.hpp"
#include "scenegen/evalsuite.hpp"

namespace scenegen {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Merged structured run configuration: file values override defaults, CLI
// flags override both. Unknown keys are rejected with their path; the
// materialized config is dumped alongside every run for auditability.
struct RunConfig {
  std::uint64_t seed = 0;
  int jobs = 1;

  struct SceneCfg {
    double table_w = 0.60;
    double table_l = 0.70;
    double table_h = 0.70;
    double region_hx = 0.25;
    double region_hy = 0.30;
    double region_hz = 0.15;
    int group = 1;
    int objects = 4;
    bool shuffle_order = false;
  } scene;

  GeneratorConfig generator;
  ObservationConfig observation;
  TrainerConfig trainer;

  struct EvalCfg {
    int episodes = 200;
  } eval;

  DistillConfig distill;

  SceneSpec make_scene_spec() const;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig load_file(const std::string& path);
};

}  // namespace scenegen
