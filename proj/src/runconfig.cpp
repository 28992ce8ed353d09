#include "scenegen/runconfig.hpp"

#include <fstream>

namespace scenegen {

namespace {

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& path) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("unknown config key: " + path + key);
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

SceneSpec RunConfig::make_scene_spec() const {
  TableSpec table;
  table.width = scene.table_w;
  table.length = scene.table_l;
  table.height = scene.table_h;
  SceneSpec spec =
      make_scene(table, Vec3(scene.region_hx, scene.region_hy, scene.region_hz),
                 scene.group, scene.objects);
  if (scene.shuffle_order) {
    Rng rng(splitmix_seed(seed, 0x5eed));
    for (int i = static_cast<int>(spec.query_order.size()) - 1; i > 0; --i) {
      std::swap(spec.query_order[i], spec.query_order[rng.uniform_int(0, i)]);
    }
  }
  return spec;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["scene"] = {{"table_w", scene.table_w},
                {"table_l", scene.table_l},
                {"table_h", scene.table_h},
                {"region_hx", scene.region_hx},
                {"region_hy", scene.region_hy},
                {"region_hz", scene.region_hz},
                {"group", scene.group},
                {"objects", scene.objects},
                {"shuffle_order", scene.shuffle_order}};
  j["generator"] = {{"max_attempts", generator.max_attempts},
                    {"settle_steps", generator.settle_steps},
                    {"penalty_scale", generator.penalty_scale},
                    {"base_reward", generator.base_reward},
                    {"drop_epsilon", generator.drop_epsilon},
                    {"enforce_committed_drift", generator.enforce_committed_drift},
                    {"drift_tolerance", generator.drift_tolerance},
                    {"overlap_tolerance", generator.overlap_tolerance},
                    {"lin_vel_max", generator.thresholds.lin_vel_max},
                    {"lin_acc_max", generator.thresholds.lin_acc_max},
                    {"ang_vel_max", generator.thresholds.ang_vel_max},
                    {"ang_acc_max", generator.thresholds.ang_acc_max},
                    {"reach_window", generator.thresholds.reach_window},
                    {"hold_window", generator.thresholds.hold_window}};
  j["observation"] = {{"grid", observation.grid},
                      {"history_slots", observation.history_slots},
                      {"traj_samples", observation.traj_samples},
                      {"open_loop", observation.open_loop},
                      {"pos_scale", observation.pos_scale},
                      {"lin_vel_scale", observation.lin_vel_scale},
                      {"ang_vel_scale", observation.ang_vel_scale}};
  j["trainer"] = {{"lr", trainer.lr},
                  {"batch", trainer.batch},
                  {"update_epochs", trainer.update_epochs},
                  {"gamma", trainer.gamma},
                  {"gae_lambda", trainer.gae_lambda},
                  {"clip_eps", trainer.clip_eps},
                  {"vf_coef", trainer.vf_coef},
                  {"entropy_coef", trainer.entropy_coef},
                  {"grad_clip", trainer.grad_clip},
                  {"total_steps", trainer.total_steps},
                  {"minibatches", trainer.minibatches},
                  {"normalize_advantages", trainer.normalize_advantages}};
  j["eval"] = {{"episodes", eval.episodes}};
  j["distill"] = {{"n_scenes", distill.n_scenes},
                  {"target_samples", distill.target_samples},
                  {"views_per_placement", distill.views_per_placement},
                  {"jitter_max", distill.jitter_max},
                  {"grid", distill.grid},
                  {"epochs", distill.epochs},
                  {"hidden", distill.hidden},
                  {"n_layers", distill.n_layers},
                  {"lr", distill.lr},
                  {"batch", distill.batch},
                  {"pos_scale", distill.pos_scale}};
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
  RunConfig cfg;
  check_keys(doc, {"seed", "jobs", "scene", "generator", "observation",
                   "trainer", "eval", "distill"},
             "");
  read(doc, "seed", cfg.seed);
  read(doc, "jobs", cfg.jobs);
  if (auto it = doc.find("scene"); it != doc.end()) {
    check_keys(*it, {"table_w", "table_l", "table_h", "region_hx", "region_hy",
                     "region_hz", "group", "objects", "shuffle_order"},
               "scene.");
    read(*it, "table_w", cfg.scene.table_w);
    read(*it, "table_l", cfg.scene.table_l);
    read(*it, "table_h", cfg.scene.table_h);
    read(*it, "region_hx", cfg.scene.region_hx);
    read(*it, "region_hy", cfg.scene.region_hy);
    read(*it, "region_hz", cfg.scene.region_hz);
    read(*it, "group", cfg.scene.group);
    read(*it, "objects", cfg.scene.objects);
    read(*it, "shuffle_order", cfg.scene.shuffle_order);
  }
  if (auto it = doc.find("generator"); it != doc.end()) {
    check_keys(*it,
               {"max_attempts", "settle_steps", "penalty_scale", "base_reward",
                "drop_epsilon", "enforce_committed_drift", "drift_tolerance",
                "overlap_tolerance", "lin_vel_max", "lin_acc_max", "ang_vel_max",
                "ang_acc_max", "reach_window", "hold_window"},
               "generator.");
    read(*it, "max_attempts", cfg.generator.max_attempts);
    read(*it, "settle_steps", cfg.generator.settle_steps);
    read(*it, "penalty_scale", cfg.generator.penalty_scale);
    read(*it, "base_reward", cfg.generator.base_reward);
    read(*it, "drop_epsilon", cfg.generator.drop_epsilon);
    read(*it, "enforce_committed_drift", cfg.generator.enforce_committed_drift);
    read(*it, "drift_tolerance", cfg.generator.drift_tolerance);
    read(*it, "overlap_tolerance", cfg.generator.overlap_tolerance);
    read(*it, "lin_vel_max", cfg.generator.thresholds.lin_vel_max);
    read(*it, "lin_acc_max", cfg.generator.thresholds.lin_acc_max);
    read(*it, "ang_vel_max", cfg.generator.thresholds.ang_vel_max);
    read(*it, "ang_acc_max", cfg.generator.thresholds.ang_acc_max);
    read(*it, "reach_window", cfg.generator.thresholds.reach_window);
    read(*it, "hold_window", cfg.generator.thresholds.hold_window);
  }
  if (auto it = doc.find("observation"); it != doc.end()) {
    check_keys(*it,
               {"grid", "history_slots", "traj_samples", "open_loop",
                "pos_scale", "lin_vel_scale", "ang_vel_scale"},
               "observation.");
    read(*it, "grid", cfg.observation.grid);
    read(*it, "history_slots", cfg.observation.history_slots);
    read(*it, "traj_samples", cfg.observation.traj_samples);
    read(*it, "open_loop", cfg.observation.open_loop);
    read(*it, "pos_scale", cfg.observation.pos_scale);
    read(*it, "lin_vel_scale", cfg.observation.lin_vel_scale);
    read(*it, "ang_vel_scale", cfg.observation.ang_vel_scale);
  }
  if (auto it = doc.find("trainer"); it != doc.end()) {
    check_keys(*it,
               {"lr", "batch", "update_epochs", "gamma", "gae_lambda",
                "clip_eps", "vf_coef", "entropy_coef", "grad_clip",
                "total_steps", "minibatches", "normalize_advantages"},
               "trainer.");
    read(*it, "lr", cfg.trainer.lr);
    read(*it, "batch", cfg.trainer.batch);
    read(*it, "update_epochs", cfg.trainer.update_epochs);
    read(*it, "gamma", cfg.trainer.gamma);
    read(*it, "gae_lambda", cfg.trainer.gae_lambda);
    read(*it, "clip_eps", cfg.trainer.clip_eps);
    read(*it, "vf_coef", cfg.trainer.vf_coef);
    read(*it, "entropy_coef", cfg.trainer.entropy_coef);
    read(*it, "grad_clip", cfg.trainer.grad_clip);
    read(*it, "total_steps", cfg.trainer.total_steps);
    read(*it, "minibatches", cfg.trainer.minibatches);
    read(*it, "normalize_advantages", cfg.trainer.normalize_advantages);
  }
  if (auto it = doc.find("eval"); it != doc.end()) {
    check_keys(*it, {"episodes"}, "eval.");
    read(*it, "episodes", cfg.eval.episodes);
  }
  if (auto it = doc.find("distill"); it != doc.end()) {
    check_keys(*it,
               {"n_scenes", "target_samples", "views_per_placement",
                "jitter_max", "grid", "epochs", "hidden", "n_layers", "lr",
                "batch", "pos_scale"},
               "distill.");
    read(*it, "n_scenes", cfg.distill.n_scenes);
    read(*it, "target_samples", cfg.distill.target_samples);
    read(*it, "views_per_placement", cfg.distill.views_per_placement);
    read(*it, "jitter_max", cfg.distill.jitter_max);
    read(*it, "grid", cfg.distill.grid);
    read(*it, "epochs", cfg.distill.epochs);
    read(*it, "hidden", cfg.distill.hidden);
    read(*it, "n_layers", cfg.distill.n_layers);
    read(*it, "lr", cfg.distill.lr);
    read(*it, "batch", cfg.distill.batch);
    read(*it, "pos_scale", cfg.distill.pos_scale);
  }
  return cfg;
}

RunConfig RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return from_json(doc);
}

}  // namespace scenegen
