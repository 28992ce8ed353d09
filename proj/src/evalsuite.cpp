#include "scenegen/evalsuite.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "scenegen/heightmap.hpp"

namespace scenegen {

namespace {

// Deterministic episode fan-out: episode e always uses the same rng stream
// regardless of the worker that runs it.
void parallel_episodes(int episodes, int jobs, std::uint64_t seed,
                       const std::function<EpisodeRecord(int, Rng&)>& run,
                       std::vector<EpisodeRecord>& out) {
  out.resize(episodes);
  jobs = std::max(1, jobs);
  auto work = [&](int worker) {
    for (int e = worker; e < episodes; e += jobs) {
      Rng rng(splitmix_seed(seed, e));
      out[e] = run(e, rng);
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < jobs; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
}

EvalReport summarize(const std::vector<EpisodeRecord>& records,
                     int max_attempts, double seconds) {
  EvalReport report;
  report.episodes = static_cast<int>(records.size());
  report.wall_clock_seconds = seconds;
  report.attempt_histogram.assign(max_attempts, 0);
  int successes = 0;
  double sum = 0.0, sumsq = 0.0;
  long count = 0;
  for (const EpisodeRecord& rec : records) {
    successes += rec.success ? 1 : 0;
    for (const AttemptLog& at : rec.attempts) {
      sum += at.stable_step;
      sumsq += static_cast<double>(at.stable_step) * at.stable_step;
      ++count;
    }
    for (const PlacementRecord& p : rec.placements) {
      if (p.attempts >= 1 && p.attempts <= max_attempts) {
        report.attempt_histogram[p.attempts - 1] += 1;
      }
    }
  }
  report.success_rate =
      records.empty() ? 0.0 : static_cast<double>(successes) / records.size();
  if (count > 0) {
    report.stable_steps_mean = sum / count;
    const double var = sumsq / count - report.stable_steps_mean * report.stable_steps_mean;
    report.stable_steps_std = std::sqrt(std::max(0.0, var));
  }
  return report;
}

}  // namespace

nlohmann::json eval_report_to_json(const EvalReport& report) {
  return {{"episodes", report.episodes},
          {"success_rate", report.success_rate},
          {"stable_steps_mean", report.stable_steps_mean},
          {"stable_steps_std", report.stable_steps_std},
          {"attempt_histogram", report.attempt_histogram},
          {"wall_clock_seconds", report.wall_clock_seconds}};
}

Vec4 rrs_action(GeneratorEnv& env, Rng& rng) {
  Vec4 action;
  action[0] = rng.uniform(-1.0, 1.0);
  action[1] = rng.uniform(-1.0, 1.0);
  action[3] = rng.uniform(-1.0, 1.0);

  const QueriedRegion& region = env.region();
  const ObjectSpec& obj = env.current_object();
  // World-frame footprint center of the proposed pose.
  Eigen::Vector4d probe = action;
  probe[2] = -1.0;
  const Pose pose = action_to_world_pose(region, probe, obj);

  // Conservative axis-aligned footprint of the object at the sampled yaw.
  double fx = 0.0, fy = 0.0;
  const Shape& shape = obj.shape;
  switch (shape.kind) {
    case Shape::Kind::Cuboid: {
      const double c = std::abs(std::cos(pose.yaw));
      const double s = std::abs(std::sin(pose.yaw));
      fx = c * shape.dims.x() + s * shape.dims.y();
      fy = s * shape.dims.x() + c * shape.dims.y();
      break;
    }
    case Shape::Kind::Cylinder:
    case Shape::Kind::Sphere:
      fx = fy = shape.dims.x();
      break;
  }
  const double support = max_height_in_rect(
      env.world(), pose.position.x() - fx, pose.position.y() - fy,
      pose.position.x() + fx, pose.position.y() + fy, region.center.z());
  const double target_z = support + shape.bottom_offset();
  action[2] = action_for_height(region, obj, target_z);
  return action;
}

EpisodeRecord rrs_episode(const SceneSpec& spec, const GeneratorConfig& cfg,
                          const ObservationConfig& obs_cfg, Rng& rng) {
  GeneratorEnv env(spec, cfg, obs_cfg);
  env.reset(rng);
  while (!env.episode_done()) {
    env.step(rrs_action(env, rng));
  }
  return env.record();
}

EvalReport evaluate(const ActorCritic* policy, const SceneSpec& spec,
                    const GeneratorConfig& cfg, const ObservationConfig& obs_cfg,
                    int episodes, std::uint64_t seed, const RegionChange* change,
                    int jobs, std::vector<EpisodeRecord>* records_out) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<EpisodeRecord> records;
  parallel_episodes(
      episodes, jobs, seed,
      [&](int, Rng& rng) {
        GeneratorEnv env(spec, cfg, obs_cfg);
        // A sampled change may escape the surface; draw again.
        for (int tries = 0; tries < 99; ++tries) {
          try {
            if (policy != nullptr) {
              return rollout_episode(*policy, env, rng, false, change);
            }
            env.reset(rng, change);
            while (!env.episode_done()) env.step(rrs_action(env, rng));
            return env.record();
          } catch (const InvalidRegionChange&) {
            continue;
          }
        }
        throw InvalidRegionChange("no valid region change after 99 draws");
      },
      records);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  EvalReport report = summarize(records, cfg.max_attempts, seconds);
  if (records_out != nullptr) *records_out = std::move(records);
  return report;
}

Variant variant_from_string(const std::string& name) {
  if (name == "full") return Variant::Full;
  if (name == "ol" || name == "open_loop") return Variant::OpenLoop;
  if (name == "sm" || name == "short_memory") return Variant::ShortMemory;
  if (name == "normal" || name == "trunc_normal") return Variant::TruncNormal;
  throw std::invalid_argument("unknown variant: " + name);
}

const char* to_string(Variant variant) {
  switch (variant) {
    case Variant::Full: return "full";
    case Variant::OpenLoop: return "ol";
    case Variant::ShortMemory: return "sm";
    case Variant::TruncNormal: return "normal";
  }
  return "unknown";
}

void apply_variant(Variant variant, ObservationConfig& obs_cfg,
                   PolicyHead& head) {
  head = PolicyHead::Beta;
  switch (variant) {
    case Variant::Full:
      break;
    case Variant::OpenLoop:
      obs_cfg.open_loop = true;
      break;
    case Variant::ShortMemory:
      obs_cfg.history_slots = 1;
      break;
    case Variant::TruncNormal:
      head = PolicyHead::TruncNormal;
      break;
  }
}

AblationResult run_ablation(Variant variant, const SceneSpec& spec,
                            const GeneratorConfig& cfg,
                            ObservationConfig obs_cfg, TrainerConfig train_cfg,
                            std::uint64_t seed, int eval_episodes) {
  PolicyHead head = PolicyHead::Beta;
  apply_variant(variant, obs_cfg, head);
  AblationResult result;
  result.variant = variant;
  result.train = train(
      [&](int) { return std::make_unique<GeneratorEnv>(spec, cfg, obs_cfg); },
      train_cfg, head, seed);
  result.eval = evaluate(&result.train.policy, spec, cfg, obs_cfg,
                         eval_episodes, splitmix_seed(seed, 0xE7A1),
                         nullptr, train_cfg.jobs);
  return result;
}

DiversityMap diversity_map(const ActorCritic& policy, const SceneSpec& spec,
                           const GeneratorConfig& cfg,
                           const ObservationConfig& obs_cfg, int scenes,
                           std::uint64_t seed, int jobs) {
  std::vector<EpisodeRecord> records;
  parallel_episodes(
      scenes, jobs, seed,
      [&](int, Rng& rng) {
        GeneratorEnv env(spec, cfg, obs_cfg);
        return rollout_episode(policy, env, rng);
      },
      records);
  return diversity_from_records(records, spec);
}

DiversityMap diversity_from_records(const std::vector<EpisodeRecord>& records,
                                    const SceneSpec& spec) {
  DiversityMap map;
  int successes = 0;
  const double hx = spec.region.half_extents.x();
  const double hy = spec.region.half_extents.y();
  const double c = std::cos(spec.region.yaw);
  const double s = std::sin(spec.region.yaw);
  for (const std::string& id : spec.query_order) {
    DiversityMap::PerObject po;
    po.object_id = id;
    map.per_object.push_back(po);
  }
  for (const EpisodeRecord& rec : records) {
    successes += rec.success ? 1 : 0;
    for (const PlacementRecord& p : rec.placements) {
      // Successful placements only, projected to the region frame.
      const double dx = p.position.x() - spec.region.center.x();
      const double dy = p.position.y() - spec.region.center.y();
      const double lx = std::clamp(c * dx + s * dy, -hx, hx);
      const double ly = std::clamp(-s * dx + c * dy, -hy, hy);
      for (auto& po : map.per_object) {
        if (po.object_id == p.object_id) {
          po.points.emplace_back(lx, ly);
          break;
        }
      }
    }
  }
  double ratio_sum = 0.0;
  int ratio_count = 0;
  for (auto& po : map.per_object) {
    if (po.points.size() < 2) {
      po.coverage_ratio = 0.0;
      continue;
    }
    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = -min_x;
    for (const auto& [x, y] : po.points) {
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
    }
    po.box_min_x = min_x;
    po.box_max_x = max_x;
    po.box_min_y = min_y;
    po.box_max_y = max_y;
    po.coverage_ratio = ((max_x - min_x) * (max_y - min_y)) / (4.0 * hx * hy);
    ratio_sum += po.coverage_ratio;
    ++ratio_count;
  }
  map.mean_coverage_ratio = ratio_count > 0 ? ratio_sum / ratio_count : 0.0;
  map.success_rate =
      records.empty() ? 0.0 : static_cast<double>(successes) / records.size();
  return map;
}

void write_diversity_csv(const DiversityMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "object_id,x,y\n";
  for (const auto& po : map.per_object) {
    for (const auto& [x, y] : po.points) {
      out << po.object_id << "," << x << "," << y << "\n";
    }
  }
}

void write_diversity_image(const DiversityMap& map, const SceneSpec& spec,
                           const std::string& path) {
  // One horizontal panel per object, binary PPM scatter.
  const int panel = 128;
  const int n = static_cast<int>(map.per_object.size());
  if (n == 0) return;
  const int width = panel * n;
  const int height = panel;
  std::vector<unsigned char> img(static_cast<std::size_t>(width) * height * 3, 255);
  const double hx = spec.region.half_extents.x();
  const double hy = spec.region.half_extents.y();
  auto put = [&](int x, int y, unsigned char r, unsigned char g, unsigned char b) {
    if (x < 0 || x >= width || y < 0 || y >= height) return;
    const std::size_t at = 3 * (static_cast<std::size_t>(y) * width + x);
    img[at] = r;
    img[at + 1] = g;
    img[at + 2] = b;
  };
  for (int p = 0; p < n; ++p) {
    const int x0 = p * panel;
    for (int i = 0; i < panel; ++i) {
      put(x0 + i, 0, 0, 0, 0);
      put(x0 + i, panel - 1, 0, 0, 0);
      put(x0, i, 0, 0, 0);
      put(x0 + panel - 1, i, 0, 0, 0);
    }
    for (const auto& [px, py] : map.per_object[p].points) {
      const int ix = x0 + static_cast<int>((px / hx * 0.5 + 0.5) * (panel - 1));
      const int iy = static_cast<int>((0.5 - py / hy * 0.5) * (panel - 1));
      put(ix, iy, 30, 60, 200);
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "P6\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data()),
            static_cast<std::streamsize>(img.size()));
}

std::map<std::string, EvalReport> generalization_eval(
    const ActorCritic& policy, const SceneSpec& spec,
    const GeneratorConfig& cfg, const ObservationConfig& obs_cfg, int episodes,
    std::uint64_t seed, int jobs) {
  std::map<std::string, EvalReport> out;
  out["original"] =
      evaluate(&policy, spec, cfg, obs_cfg, episodes, seed, nullptr, jobs);
  const RegionChange::Kind kinds[] = {
      RegionChange::Kind::Translation, RegionChange::Kind::Rotation,
      RegionChange::Kind::Shrinkage, RegionChange::Kind::Expansion,
      RegionChange::Kind::Combined};
  for (const auto kind : kinds) {
    RegionChange change;
    change.kind = kind;
    out[to_string(kind)] = evaluate(&policy, spec, cfg, obs_cfg, episodes,
                                    seed, &change, jobs);
  }
  return out;
}

std::vector<std::pair<int, double>> attempts_study(
    const ActorCritic& policy, const SceneSpec& spec, GeneratorConfig cfg,
    const ObservationConfig& obs_cfg, const std::vector<int>& budgets,
    int episodes, std::uint64_t seed, int jobs) {
  std::vector<std::pair<int, double>> curve;
  for (const int budget : budgets) {
    if (budget < 1) throw std::invalid_argument("attempt budget must be >= 1");
    cfg.max_attempts = budget;
    const EvalReport report =
        evaluate(&policy, spec, cfg, obs_cfg, episodes, seed, nullptr, jobs);
    curve.emplace_back(budget, report.success_rate);
  }
  return curve;
}

std::vector<double> stable_steps_vs_attempt(
    const std::vector<EpisodeRecord>& records, int max_attempts,
    int min_attempts) {
  std::vector<double> sums(max_attempts, 0.0);
  std::vector<int> counts(max_attempts, 0);
  for (const EpisodeRecord& rec : records) {
    // Group the attempt log by object placement sequences.
    std::size_t i = 0;
    while (i < rec.attempts.size()) {
      std::size_t j = i;
      while (j < rec.attempts.size() &&
             rec.attempts[j].object_index == rec.attempts[i].object_index) {
        ++j;
      }
      const int total = static_cast<int>(j - i);
      if (total >= min_attempts) {
        for (int k = 0; k < total && k < max_attempts; ++k) {
          sums[k] += rec.attempts[i + k].stable_step;
          counts[k] += 1;
        }
      }
      i = j;
    }
  }
  std::vector<double> means(max_attempts,
                            std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < max_attempts; ++k) {
    if (counts[k] > 0) means[k] = sums[k] / counts[k];
  }
  return means;
}

}  // namespace scenegen
