// scenegen: train, generate, evaluate, export, distill and replay
// physically settled tabletop scenes.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "scenegen/runconfig.hpp"

namespace fs = std::filesystem;
using namespace scenegen;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = "runs/out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;  // 0 = take from config
};

RunConfig load_config(const GlobalOpts& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) cfg = RunConfig::load_file(g.config_path);
  if (g.seed_set) cfg.seed = g.seed;
  if (g.jobs > 0) cfg.jobs = g.jobs;
  return cfg;
}

void ensure_out(const std::string& dir) { fs::create_directories(dir); }

void dump_config(const RunConfig& cfg, const std::string& dir) {
  std::ofstream out(dir + "/config.json");
  out << cfg.to_json().dump(2) << "\n";
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

void fail(const std::string& kind, const std::string& message) {
  nlohmann::json err = {{"error", kind}, {"message", message}};
  std::cerr << err.dump() << std::endl;
  std::exit(1);
}

nlohmann::json curve_row_json(const CurveRow& row) {
  return {{"step", row.step},
          {"update", row.update},
          {"success_rate", row.success_rate},
          {"mean_reward", row.mean_reward},
          {"policy_loss", row.policy_loss},
          {"value_loss", row.value_loss},
          {"entropy", row.entropy},
          {"clip_fraction", row.clip_fraction},
          {"approx_kl", row.approx_kl}};
}

void write_curve_csv(const std::vector<CurveRow>& curve, const std::string& path) {
  std::ofstream out(path);
  out << "step,update,success_rate,mean_reward,policy_loss,value_loss,entropy,"
         "clip_fraction,approx_kl\n";
  for (const CurveRow& r : curve) {
    out << r.step << "," << r.update << "," << r.success_rate << ","
        << r.mean_reward << "," << r.policy_loss << "," << r.value_loss << ","
        << r.entropy << "," << r.clip_fraction << "," << r.approx_kl << "\n";
  }
}

Checkpoint make_checkpoint(const ActorCritic& policy, const AdamState& a,
                           const AdamState& c, const RunConfig& cfg,
                           const std::string& variant) {
  Checkpoint ckpt;
  ckpt.policy = policy;
  ckpt.actor_adam = a;
  ckpt.critic_adam = c;
  ckpt.meta = {{"config", cfg.to_json()}, {"variant", variant}};
  return ckpt;
}

// Checkpoints carry the full run config; an explicit --config wins.
RunConfig config_for_checkpoint(const Checkpoint& ckpt, const GlobalOpts& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) {
    cfg = RunConfig::load_file(g.config_path);
  } else if (ckpt.meta.contains("config")) {
    cfg = RunConfig::from_json(ckpt.meta["config"]);
  }
  if (g.seed_set) cfg.seed = g.seed;
  if (g.jobs > 0) cfg.jobs = g.jobs;
  const std::string variant = ckpt.meta.value("variant", "full");
  PolicyHead head = PolicyHead::Beta;
  apply_variant(variant_from_string(variant), cfg.observation, head);
  return cfg;
}

int cmd_train(const GlobalOpts& g, const std::string& variant_name, long steps) {
  RunConfig cfg = load_config(g);
  if (steps > 0) cfg.trainer.total_steps = steps;
  ensure_out(g.out_dir);
  dump_config(cfg, g.out_dir);

  const Variant variant = variant_from_string(variant_name);
  ObservationConfig obs_cfg = cfg.observation;
  PolicyHead head = PolicyHead::Beta;
  apply_variant(variant, obs_cfg, head);

  const SceneSpec spec = cfg.make_scene_spec();
  TrainerConfig train_cfg = cfg.trainer;
  train_cfg.jobs = cfg.jobs;

  std::ofstream curve_stream(g.out_dir + "/curve.csv");
  curve_stream << "step,update,success_rate,mean_reward,policy_loss,value_loss,"
                  "entropy,clip_fraction,approx_kl\n";
  const TrainResult result = train(
      [&](int) {
        return std::make_unique<GeneratorEnv>(spec, cfg.generator, obs_cfg);
      },
      train_cfg, head, cfg.seed,
      [&](const CurveRow& row, const ActorCritic&, const AdamState&,
          const AdamState&) {
        curve_stream << row.step << "," << row.update << "," << row.success_rate
                     << "," << row.mean_reward << "," << row.policy_loss << ","
                     << row.value_loss << "," << row.entropy << ","
                     << row.clip_fraction << "," << row.approx_kl << "\n";
        curve_stream.flush();
      });

  const Checkpoint ckpt = make_checkpoint(result.policy, result.actor_adam,
                                          result.critic_adam, cfg, variant_name);
  save_checkpoint(g.out_dir + "/checkpoint.json", ckpt);
  write_curve_csv(result.curve, g.out_dir + "/curve.csv");
  nlohmann::json summary = {{"checkpoint", g.out_dir + "/checkpoint.json"},
                            {"updates", result.curve.size()}};
  if (!result.curve.empty()) {
    summary["final"] = curve_row_json(result.curve.back());
  }
  std::cout << summary.dump(2) << std::endl;
  return 0;
}

int cmd_generate(const GlobalOpts& g, const std::string& checkpoint_path, int n) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const RunConfig cfg = config_for_checkpoint(ckpt, g);
  ensure_out(g.out_dir);
  dump_config(cfg, g.out_dir);
  const SceneSpec spec = cfg.make_scene_spec();

  int written = 0;
  int episode = 0;
  const int max_episodes = 50 * n + 50;
  nlohmann::json index = nlohmann::json::array();
  while (written < n && episode < max_episodes) {
    Rng rng(splitmix_seed(cfg.seed, episode));
    ++episode;
    GeneratorEnv env(spec, cfg.generator, cfg.observation);
    const EpisodeRecord rec = rollout_episode(ckpt.policy, env, rng);
    if (!rec.success) continue;
    char name[64];
    std::snprintf(name, sizeof(name), "scene_%04d.json", written);
    const std::string path = g.out_dir + "/" + name;
    write_json(serialize_scene(rec.spec, rec.placements), path);
    index.push_back({{"file", name},
                     {"episode_seed_stream", episode - 1},
                     {"objects", rec.placements.size()},
                     {"total_reward", rec.total_reward}});
    ++written;
  }
  write_json({{"scenes", index}, {"requested", n}, {"episodes_run", episode}},
             g.out_dir + "/generate_summary.json");
  std::cout << nlohmann::json({{"written", written}, {"episodes", episode}}).dump()
            << std::endl;
  if (written < n) fail("generation_incomplete", "not enough successful episodes");
  return 0;
}

int cmd_eval(const GlobalOpts& g, const std::string& checkpoint_path,
             const std::string& baseline, const std::string& suite,
             int episodes_flag, int objects_flag, const std::string& change_name) {
  Checkpoint ckpt;
  RunConfig cfg;
  const ActorCritic* policy = nullptr;
  if (!checkpoint_path.empty()) {
    ckpt = load_checkpoint(checkpoint_path);
    cfg = config_for_checkpoint(ckpt, g);
    policy = &ckpt.policy;
  } else if (baseline == "rrs") {
    cfg = load_config(g);
  } else {
    fail("bad_arguments", "eval needs --checkpoint or --baseline rrs");
  }
  if (objects_flag > 0) cfg.scene.objects = objects_flag;
  const int episodes = episodes_flag > 0 ? episodes_flag : cfg.eval.episodes;
  ensure_out(g.out_dir);
  dump_config(cfg, g.out_dir);
  const SceneSpec spec = cfg.make_scene_spec();

  if (suite == "report") {
    RegionChange change;
    const RegionChange* change_ptr = nullptr;
    if (!change_name.empty()) {
      change.kind = region_change_kind_from_string(change_name);
      change_ptr = &change;
    }
    std::vector<EpisodeRecord> records;
    const EvalReport report =
        evaluate(policy, spec, cfg.generator, cfg.observation, episodes,
                 cfg.seed, change_ptr, cfg.jobs, &records);
    write_json(eval_report_to_json(report), g.out_dir + "/report.json");
    std::ofstream csv(g.out_dir + "/report.csv");
    csv << "episodes,success_rate,stable_steps_mean,stable_steps_std\n"
        << report.episodes << "," << report.success_rate << ","
        << report.stable_steps_mean << "," << report.stable_steps_std << "\n";
    std::cout << eval_report_to_json(report).dump(2) << std::endl;
    return 0;
  }
  if (policy == nullptr) fail("bad_arguments", "suite requires --checkpoint");
  if (suite == "diversity") {
    const DiversityMap map = diversity_map(*policy, spec, cfg.generator,
                                           cfg.observation, episodes, cfg.seed,
                                           cfg.jobs);
    write_diversity_csv(map, g.out_dir + "/diversity.csv");
    write_diversity_image(map, spec, g.out_dir + "/diversity.ppm");
    nlohmann::json j = {{"mean_coverage_ratio", map.mean_coverage_ratio},
                        {"success_rate", map.success_rate}};
    write_json(j, g.out_dir + "/diversity.json");
    std::cout << j.dump(2) << std::endl;
    return 0;
  }
  if (suite == "generalization") {
    const auto reports = generalization_eval(*policy, spec, cfg.generator,
                                             cfg.observation, episodes,
                                             cfg.seed, cfg.jobs);
    nlohmann::json j;
    std::ofstream csv(g.out_dir + "/generalization.csv");
    csv << "change,success_rate,stable_steps_mean\n";
    for (const auto& [name, report] : reports) {
      j[name] = eval_report_to_json(report);
      csv << name << "," << report.success_rate << ","
          << report.stable_steps_mean << "\n";
    }
    write_json(j, g.out_dir + "/generalization.json");
    std::cout << j.dump(2) << std::endl;
    return 0;
  }
  if (suite == "attempts") {
    const std::vector<int> budgets{1, 2, 3, 5, 8};
    const auto curve = attempts_study(*policy, spec, cfg.generator,
                                      cfg.observation, budgets, episodes,
                                      cfg.seed, cfg.jobs);
    std::ofstream csv(g.out_dir + "/attempts.csv");
    csv << "budget,success_rate\n";
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [budget, rate] : curve) {
      csv << budget << "," << rate << "\n";
      j.push_back({{"budget", budget}, {"success_rate", rate}});
    }
    write_json(j, g.out_dir + "/attempts.json");
    std::cout << j.dump(2) << std::endl;
    return 0;
  }
  if (suite == "stablesteps") {
    std::vector<EpisodeRecord> records;
    evaluate(policy, spec, cfg.generator, cfg.observation, episodes, cfg.seed,
             nullptr, cfg.jobs, &records);
    const auto means =
        stable_steps_vs_attempt(records, cfg.generator.max_attempts);
    std::ofstream csv(g.out_dir + "/stable_steps_vs_attempt.csv");
    csv << "attempt,mean_stable_steps\n";
    for (std::size_t i = 0; i < means.size(); ++i) {
      csv << (i + 1) << "," << means[i] << "\n";
    }
    std::cout << "wrote " << g.out_dir << "/stable_steps_vs_attempt.csv"
              << std::endl;
    return 0;
  }
  fail("bad_arguments", "unknown suite: " + suite);
  return 1;
}

int cmd_export(const GlobalOpts& g, const std::string& checkpoint_path,
               int scenes, int samples) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  RunConfig cfg = config_for_checkpoint(ckpt, g);
  if (scenes > 0) cfg.distill.n_scenes = scenes;
  if (samples > 0) cfg.distill.target_samples = samples;
  ensure_out(g.out_dir);
  dump_config(cfg, g.out_dir);
  const SceneSpec spec = cfg.make_scene_spec();

  bool complete = false;
  const auto start = std::chrono::steady_clock::now();
  const PlacementDataset dataset =
      export_dataset(ckpt.policy, spec, cfg.generator, cfg.distill, cfg.seed,
                     cfg.observation, &complete);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  write_dataset_jsonl(dataset, g.out_dir + "/dataset.jsonl");
  const double validity =
      label_replay_stable_fraction(dataset, cfg.generator);
  nlohmann::json summary = {{"samples", dataset.samples.size()},
                            {"complete", complete},
                            {"export_seconds", seconds},
                            {"label_replay_stable_fraction", validity}};
  write_json(summary, g.out_dir + "/export_summary.json");
  std::cout << summary.dump(2) << std::endl;
  if (!complete) {
    std::cerr << nlohmann::json({{"warning", "partial_dataset"}}).dump()
              << std::endl;
  }
  return 0;
}

int cmd_distill(const GlobalOpts& g, const std::string& dataset_path,
                const std::string& checkpoint_path, int epochs, int cases) {
  RunConfig cfg;
  Checkpoint ckpt;
  const ActorCritic* policy = nullptr;
  if (!checkpoint_path.empty()) {
    ckpt = load_checkpoint(checkpoint_path);
    cfg = config_for_checkpoint(ckpt, g);
    policy = &ckpt.policy;
  } else {
    cfg = load_config(g);
  }
  if (epochs > 0) cfg.distill.epochs = epochs;
  ensure_out(g.out_dir);
  dump_config(cfg, g.out_dir);

  const PlacementDataset dataset = load_dataset_jsonl(dataset_path);
  if (dataset.samples.empty()) fail("empty_dataset", dataset_path);

  SupervisedReport train_report;
  const PlacementPolicy model = train_supervised(
      dataset, cfg.distill.epochs, cfg.distill, cfg.seed, &train_report);

  const SceneSpec spec = cfg.make_scene_spec();
  const auto suite = make_test_suite(policy, spec, cfg.generator,
                                     cfg.observation, cases > 0 ? cases : 100,
                                     splitmix_seed(cfg.seed, 0x7e57));
  const double success = eval_placement(model, suite, cfg.generator);

  nlohmann::json model_json = {{"sizes", model.net.sizes()},
                               {"grid", model.grid},
                               {"pos_scale", model.pos_scale}};
  const VectorXd params = model.net.parameters_flat();
  model_json["params"] =
      std::vector<double>(params.data(), params.data() + params.size());
  write_json(model_json, g.out_dir + "/placement_model.json");

  nlohmann::json summary = {{"train_final_mse", train_report.final_loss},
                            {"test_cases", suite.size()},
                            {"placement_success_rate", success},
                            {"epochs", cfg.distill.epochs}};
  write_json(summary, g.out_dir + "/distill_report.json");
  std::cout << summary.dump(2) << std::endl;
  return 0;
}

int cmd_replay(const GlobalOpts& g, const std::string& scene_path) {
  std::ifstream in(scene_path);
  if (!in) fail("missing_file", scene_path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail("scene_parse_error", e.what());
  }
  RunConfig cfg = load_config(g);
  auto [spec, placements] = deserialize_scene(doc);

  World world;
  world.add_body(spec.table.to_body());
  nlohmann::json per_object = nlohmann::json::array();
  bool all_stable = true;
  for (const PlacementRecord& p : placements) {
    RigidBody body = spec.object(p.object_id).to_body();
    body.state.position = p.position + Vec3(0, 0, cfg.generator.drop_epsilon);
    body.state.orientation = p.orientation;
    const bool overlap = world.check_overlap(body, cfg.generator.overlap_tolerance);
    const int id = world.add_body(body);
    bool stable = false;
    int stable_step = cfg.generator.settle_steps;
    try {
      const Trajectory traj = world.settle(id, cfg.generator.settle_steps,
                                           &cfg.generator.thresholds);
      const StabilityReport rep = check_stability(traj, cfg.generator.thresholds);
      stable = rep.stable && !overlap;
      stable_step = rep.stable_step;
    } catch (const SimulationDiverged&) {
      stable = false;
    }
    all_stable = all_stable && stable;
    per_object.push_back({{"id", p.object_id},
                          {"stable", stable},
                          {"overlap", overlap},
                          {"stable_step", stable_step}});
  }
  nlohmann::json verdict = {{"placements", placements.size()},
                            {"all_stable", all_stable},
                            {"objects", per_object}};
  std::cout << verdict.dump(2) << std::endl;
  if (!all_stable) fail("replay_unstable", "scene failed re-simulation");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physically settled tabletop scene generation toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "JSON run configuration");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--jobs", g.jobs, "parallel rollout/eval workers");
  auto* seed_opt = app.add_option("--seed", g.seed, "master seed");

  auto* train_cmd = app.add_subcommand("train", "train a generation policy");
  std::string variant = "full";
  long steps = 0;
  train_cmd->add_option("--variant", variant, "full|ol|sm|normal");
  train_cmd->add_option("--steps", steps, "total environment decisions");

  auto* gen_cmd = app.add_subcommand("generate", "emit scene documents");
  std::string checkpoint_path;
  int n_scenes = 10;
  gen_cmd->add_option("--checkpoint", checkpoint_path, "policy checkpoint")
      ->required();
  gen_cmd->add_option("--n", n_scenes, "number of scene documents");

  auto* eval_cmd = app.add_subcommand("eval", "run evaluation suites");
  std::string eval_checkpoint, baseline, suite = "report", change_name;
  int episodes = 0, objects = 0;
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "policy checkpoint");
  eval_cmd->add_option("--baseline", baseline, "rrs");
  eval_cmd->add_option("--suite", suite,
                       "report|diversity|generalization|attempts|stablesteps");
  eval_cmd->add_option("--episodes", episodes, "episodes per evaluation");
  eval_cmd->add_option("--objects", objects, "queried object count override");
  eval_cmd->add_option("--change", change_name,
                       "translation|rotation|shrink|expand|combined");

  auto* export_cmd = app.add_subcommand("export", "export a placement dataset");
  std::string export_checkpoint;
  int export_scenes = 0, export_samples = 0;
  export_cmd->add_option("--checkpoint", export_checkpoint, "policy checkpoint")
      ->required();
  export_cmd->add_option("--scenes", export_scenes, "generation runs");
  export_cmd->add_option("--samples", export_samples, "dataset size");

  auto* distill_cmd =
      app.add_subcommand("distill", "train a placement policy from a dataset");
  std::string dataset_path, distill_checkpoint;
  int epochs = 0, cases = 0;
  distill_cmd->add_option("--dataset", dataset_path, "dataset JSONL")->required();
  distill_cmd->add_option("--checkpoint", distill_checkpoint,
                          "generator checkpoint for the test suite");
  distill_cmd->add_option("--epochs", epochs, "training epochs");
  distill_cmd->add_option("--cases", cases, "held-out test cases");

  auto* replay_cmd =
      app.add_subcommand("replay", "re-simulate a scene document");
  std::string scene_path;
  replay_cmd->add_option("--scene", scene_path, "scene JSON document")
      ->required();

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;

  try {
    if (train_cmd->parsed()) return cmd_train(g, variant, steps);
    if (gen_cmd->parsed()) return cmd_generate(g, checkpoint_path, n_scenes);
    if (eval_cmd->parsed()) {
      return cmd_eval(g, eval_checkpoint, baseline, suite, episodes, objects,
                      change_name);
    }
    if (export_cmd->parsed()) {
      return cmd_export(g, export_checkpoint, export_scenes, export_samples);
    }
    if (distill_cmd->parsed()) {
      return cmd_distill(g, dataset_path, distill_checkpoint, epochs, cases);
    }
    if (replay_cmd->parsed()) return cmd_replay(g, scene_path);
  } catch (const ConfigError& e) {
    fail("config_error", e.what());
  } catch (const SceneParseError& e) {
    fail("scene_parse_error", e.what());
  } catch (const std::exception& e) {
    fail("runtime_error", e.what());
  }
  return 1;
}
