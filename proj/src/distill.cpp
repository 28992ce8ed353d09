#include "scenegen/distill.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <tuple>

#include "scenegen/evalsuite.hpp"
#include "scenegen/heightmap.hpp"

namespace scenegen {

namespace {

constexpr const char* kDatasetSchema = "placement_dataset";
constexpr int kDatasetVersion = 1;

std::string base64_encode(const std::vector<float>& data) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  const std::size_t n = data.size() * sizeof(float);
  std::string out;
  out.reserve((n + 2) / 3 * 4);
  for (std::size_t i = 0; i < n; i += 3) {
    unsigned int v = bytes[i] << 16;
    if (i + 1 < n) v |= bytes[i + 1] << 8;
    if (i + 2 < n) v |= bytes[i + 2];
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(i + 1 < n ? alphabet[(v >> 6) & 63] : '=');
    out.push_back(i + 2 < n ? alphabet[v & 63] : '=');
  }
  return out;
}

std::vector<float> base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<unsigned char> bytes;
  bytes.reserve(text.size() / 4 * 3);
  unsigned int acc = 0;
  int bits = 0;
  for (const char c : text) {
    if (c == '=') break;
    const int v = value_of(c);
    if (v < 0) continue;
    acc = (acc << 6) | static_cast<unsigned int>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      bytes.push_back(static_cast<unsigned char>((acc >> bits) & 0xFF));
    }
  }
  std::vector<float> out(bytes.size() / sizeof(float));
  std::memcpy(out.data(), bytes.data(), out.size() * sizeof(float));
  return out;
}

Eigen::VectorXd render_view(const World& world, const QueriedRegion& canonical,
                            double jitter_x, double jitter_y, int grid,
                            double pos_scale) {
  QueriedRegion view = canonical;
  const double c = std::cos(canonical.yaw);
  const double s = std::sin(canonical.yaw);
  view.center.x() += c * jitter_x - s * jitter_y;
  view.center.y() += s * jitter_x + c * jitter_y;
  const Heightmap hm = render_heightmap(world, view, grid);
  Eigen::VectorXd obs(grid * grid);
  for (int i = 0; i < grid * grid; ++i) {
    obs[i] = (hm.values[i] - canonical.center.z()) / pos_scale;
  }
  return obs;
}

}  // namespace

World world_from_snapshot(const SceneSnapshot& snap) {
  World world;
  world.add_body(snap.table.to_body());
  for (const auto& [spec, state] : snap.support) {
    RigidBody body = spec.to_body();
    body.state = state;
    world.add_body(body);
  }
  return world;
}

void pose_to_label(const QueriedRegion& region, const Vec3& world_pos,
                   double world_yaw, Vec3& rel_pos, double& rel_yaw) {
  const double c = std::cos(region.yaw);
  const double s = std::sin(region.yaw);
  const double dx = world_pos.x() - region.center.x();
  const double dy = world_pos.y() - region.center.y();
  rel_pos = Vec3(c * dx + s * dy, -s * dx + c * dy,
                 world_pos.z() - region.center.z());
  rel_yaw = std::remainder(world_yaw - region.yaw, 2.0 * 3.14159265358979323846);
}

Pose label_to_world(const QueriedRegion& region, const Vec3& rel_pos,
                    double rel_yaw) {
  const double c = std::cos(region.yaw);
  const double s = std::sin(region.yaw);
  Pose pose;
  pose.position.x() = region.center.x() + c * rel_pos.x() - s * rel_pos.y();
  pose.position.y() = region.center.y() + s * rel_pos.x() + c * rel_pos.y();
  pose.position.z() = region.center.z() + rel_pos.z();
  pose.yaw = region.yaw + rel_yaw;
  return pose;
}

PlacementDataset export_dataset(const ActorCritic& policy,
                                const SceneSpec& spec,
                                const GeneratorConfig& cfg,
                                const DistillConfig& dcfg, std::uint64_t seed,
                                const ObservationConfig& obs_cfg,
                                bool* complete) {
  PlacementDataset dataset;
  dataset.grid = dcfg.grid;
  dataset.pos_scale = dcfg.pos_scale;
  dataset.generator_seed = seed;

  std::vector<PlacementSample> pool;
  for (int scene_id = 0; scene_id < dcfg.n_scenes; ++scene_id) {
    Rng rng(splitmix_seed(seed, scene_id));
    GeneratorEnv env(spec, cfg, obs_cfg);
    Eigen::VectorXd obs = env.reset(rng);
    while (!env.episode_done()) {
      // Snapshot the support scene before the attempt executes.
      SceneSnapshot snap;
      snap.table = spec.table;
      snap.region = env.region();
      snap.object = env.current_object();
      const EpisodeRecord partial = env.record();
      for (std::size_t i = 0; i < partial.placements.size(); ++i) {
        const PlacementRecord& p = partial.placements[i];
        const ObjectSpec& ospec = spec.object(p.object_id);
        BodyState state;
        // Committed bodies sit at their current (settled) world states.
        state.position = env.world().body(static_cast<int>(i) + 1).state.position;
        state.orientation = env.world().body(static_cast<int>(i) + 1).state.orientation;
        snap.support.emplace_back(ospec, state);
      }

      const ActionSample sample = policy.sample_action(obs, rng);
      const StepResult res = env.step(sample.a);
      obs = res.observation;
      if (!res.flags.object_done) continue;

      const PlacementRecord& committed = env.record().placements.back();
      const World support_world = world_from_snapshot(snap);
      PlacementSample base;
      base.scene_id = scene_id;
      base.descriptor = object_descriptor(snap.object);
      pose_to_label(snap.region, committed.position, committed.yaw, base.pose,
                    base.yaw);
      base.snapshot = snap;
      const double mx = std::min(dcfg.jitter_max, 0.9 * snap.region.half_extents.x());
      const double my = std::min(dcfg.jitter_max, 0.9 * snap.region.half_extents.y());
      for (int view = 0; view < dcfg.views_per_placement; ++view) {
        PlacementSample s = base;
        s.view_id = view;
        // Random view translation that keeps the scene center in frame.
        const double jx = rng.uniform(-mx, mx);
        const double jy = rng.uniform(-my, my);
        s.observation = render_view(support_world, snap.region, jx, jy,
                                    dcfg.grid, dcfg.pos_scale);
        pool.push_back(std::move(s));
      }
    }
  }

  Rng pick(splitmix_seed(seed, 0xD5));
  if (static_cast<int>(pool.size()) <= dcfg.target_samples) {
    dataset.samples = std::move(pool);
    if (complete != nullptr) {
      *complete = static_cast<int>(dataset.samples.size()) >= dcfg.target_samples;
    }
    return dataset;
  }
  // Uniform subsample without replacement (partial Fisher-Yates).
  std::vector<int> idx(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) idx[i] = static_cast<int>(i);
  for (int i = 0; i < dcfg.target_samples; ++i) {
    const int j = i + pick.uniform_int(0, static_cast<int>(pool.size()) - 1 - i);
    std::swap(idx[i], idx[j]);
    dataset.samples.push_back(std::move(pool[idx[i]]));
  }
  if (complete != nullptr) *complete = true;
  return dataset;
}

PlacementDataset subsample_dataset(const PlacementDataset& dataset, int n,
                                   Rng& rng) {
  if (n >= static_cast<int>(dataset.samples.size())) return dataset;
  PlacementDataset out;
  out.grid = dataset.grid;
  out.pos_scale = dataset.pos_scale;
  out.generator_seed = dataset.generator_seed;
  std::vector<int> idx(dataset.samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  for (int i = 0; i < n; ++i) {
    const int j = i + rng.uniform_int(0, static_cast<int>(idx.size()) - 1 - i);
    std::swap(idx[i], idx[j]);
    out.samples.push_back(dataset.samples[idx[i]]);
  }
  return out;
}

void write_dataset_jsonl(const PlacementDataset& dataset,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  nlohmann::json header = {{"schema", kDatasetSchema},
                           {"version", kDatasetVersion},
                           {"grid", dataset.grid},
                           {"pos_scale", dataset.pos_scale},
                           {"generator_seed", dataset.generator_seed},
                           {"samples", dataset.samples.size()}};
  out << header.dump() << "\n";
  for (const PlacementSample& s : dataset.samples) {
    std::vector<float> obs(s.observation.size());
    for (int i = 0; i < s.observation.size(); ++i) {
      obs[i] = static_cast<float>(s.observation[i]);
    }
    nlohmann::json rec = {
        {"scene_id", s.scene_id},
        {"view_id", s.view_id},
        {"observation", base64_encode(obs)},
        {"object_descriptor",
         std::vector<double>(s.descriptor.data(), s.descriptor.data() + 8)},
        {"pose",
         {{"x", s.pose.x()},
          {"y", s.pose.y()},
          {"z", s.pose.z()},
          {"sin_yaw", std::sin(s.yaw)},
          {"cos_yaw", std::cos(s.yaw)}}}};
    out << rec.dump() << "\n";
  }
}

PlacementDataset load_dataset_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file");
  const nlohmann::json header = nlohmann::json::parse(line);
  if (header.value("schema", "") != kDatasetSchema ||
      header.value("version", 0) != kDatasetVersion) {
    throw std::runtime_error("unsupported dataset schema");
  }
  PlacementDataset dataset;
  dataset.grid = header.at("grid").get<int>();
  dataset.pos_scale = header.at("pos_scale").get<double>();
  dataset.generator_seed = header.value("generator_seed", 0ull);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json rec = nlohmann::json::parse(line);
    PlacementSample s;
    s.scene_id = rec.at("scene_id").get<int>();
    s.view_id = rec.at("view_id").get<int>();
    const auto obs = base64_decode(rec.at("observation").get<std::string>());
    s.observation.resize(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) s.observation[i] = obs[i];
    const auto desc = rec.at("object_descriptor").get<std::vector<double>>();
    for (int i = 0; i < 8; ++i) s.descriptor[i] = desc.at(i);
    const auto& pose = rec.at("pose");
    s.pose = Vec3(pose.at("x").get<double>(), pose.at("y").get<double>(),
                  pose.at("z").get<double>());
    s.yaw = std::atan2(pose.at("sin_yaw").get<double>(),
                       pose.at("cos_yaw").get<double>());
    dataset.samples.push_back(std::move(s));
  }
  return dataset;
}

Pose PlacementPolicy::predict(const Eigen::VectorXd& observation,
                              const Eigen::Matrix<double, 8, 1>& descriptor,
                              const QueriedRegion& region) const {
  Eigen::VectorXd input(observation.size() + 8);
  input << observation, descriptor;
  const Eigen::VectorXd out = net.forward_one(input);
  const Vec3 rel(out[0] * pos_scale, out[1] * pos_scale, out[2] * pos_scale);
  const double yaw = std::atan2(out[3], out[4]);
  return label_to_world(region, rel, yaw);
}

PlacementPolicy train_supervised(const PlacementDataset& dataset, int epochs,
                                 const DistillConfig& dcfg, std::uint64_t seed,
                                 SupervisedReport* report) {
  if (dataset.samples.empty()) {
    throw std::invalid_argument("train_supervised: empty dataset");
  }
  const int n = static_cast<int>(dataset.samples.size());
  const int in_dim = static_cast<int>(dataset.samples[0].observation.size()) + 8;

  MatrixXd x(n, in_dim);
  MatrixXd y(n, 5);
  for (int i = 0; i < n; ++i) {
    const PlacementSample& s = dataset.samples[i];
    x.row(i).head(s.observation.size()) = s.observation.transpose();
    x.row(i).tail(8) = s.descriptor.transpose();
    y(i, 0) = s.pose.x() / dataset.pos_scale;
    y(i, 1) = s.pose.y() / dataset.pos_scale;
    y(i, 2) = s.pose.z() / dataset.pos_scale;
    y(i, 3) = std::sin(s.yaw);
    y(i, 4) = std::cos(s.yaw);
  }

  Rng rng(seed);
  std::vector<int> sizes{in_dim};
  for (int i = 0; i < dcfg.n_layers - 1; ++i) sizes.push_back(dcfg.hidden);
  sizes.push_back(5);
  PlacementPolicy policy;
  policy.net = Mlp(sizes, rng);
  policy.grid = dataset.grid;
  policy.pos_scale = dataset.pos_scale;

  AdamState adam;
  adam.init(policy.net.parameter_count());
  const AdamConfig adam_cfg{dcfg.lr, 0.9, 0.999, 1e-8};

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  const int batch = std::max(1, std::min(dcfg.batch, n));

  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(0, i)]);
    double epoch_loss = 0.0;
    int batches = 0;
    for (int lo = 0; lo < n; lo += batch) {
      const int m = std::min(batch, n - lo);
      MatrixXd xb(m, in_dim), yb(m, 5);
      for (int r = 0; r < m; ++r) {
        xb.row(r) = x.row(order[lo + r]);
        yb.row(r) = y.row(order[lo + r]);
      }
      Mlp::Cache cache;
      const MatrixXd pred = policy.net.forward(xb, cache);
      const MatrixXd err = pred - yb;
      epoch_loss += err.array().square().sum() / (m * 5);
      ++batches;
      policy.net.zero_grad();
      policy.net.backward(cache, (2.0 / (m * 5)) * err);
      adam_step(policy.net, adam, adam_cfg);
    }
    if (report != nullptr) report->epoch_loss.push_back(epoch_loss / batches);
  }
  if (report != nullptr && !report->epoch_loss.empty()) {
    report->final_loss = report->epoch_loss.back();
  }
  return policy;
}

std::vector<SceneSnapshot> make_test_suite(const ActorCritic* policy,
                                           const SceneSpec& spec,
                                           const GeneratorConfig& cfg,
                                           const ObservationConfig& obs_cfg,
                                           int n_cases, std::uint64_t seed) {
  std::vector<SceneSnapshot> cases;
  int episode = 0;
  while (static_cast<int>(cases.size()) < n_cases && episode < 50 * n_cases + 50) {
    Rng rng(splitmix_seed(seed, 0xBEEF00 + episode));
    ++episode;
    GeneratorEnv env(spec, cfg, obs_cfg);
    Eigen::VectorXd obs = env.reset(rng);
    while (!env.episode_done() && static_cast<int>(cases.size()) < n_cases) {
      if (env.attempt_index() == 1) {
        SceneSnapshot snap;
        snap.table = spec.table;
        snap.region = env.region();
        snap.object = env.current_object();
        const World& w = env.world();
        const EpisodeRecord partial = env.record();
        for (int b = 1; b < w.body_count(); ++b) {
          // Body b corresponds to the b-th committed placement.
          snap.support.emplace_back(
              spec.object(partial.placements[b - 1].object_id), w.body(b).state);
        }
        cases.push_back(std::move(snap));
      }
      Eigen::Vector4d action;
      if (policy != nullptr) {
        action = policy->sample_action(obs, rng).a;
      } else {
        action = rrs_action(env, rng);
      }
      obs = env.step(action).observation;
    }
  }
  return cases;
}

double eval_placement(const PlacementPolicy& policy,
                      const std::vector<SceneSnapshot>& test_cases,
                      const GeneratorConfig& cfg) {
  if (test_cases.empty()) return 0.0;
  int successes = 0;
  for (const SceneSnapshot& snap : test_cases) {
    World world = world_from_snapshot(snap);
    const Eigen::VectorXd obs =
        render_view(world, snap.region, 0.0, 0.0, policy.grid, policy.pos_scale);
    const Pose pose =
        policy.predict(obs, object_descriptor(snap.object), snap.region);

    RigidBody body = snap.object.to_body();
    body.state.position = pose.position + Vec3(0, 0, cfg.drop_epsilon);
    body.state.orientation = yaw_quat(pose.yaw);
    if (world.check_overlap(body, cfg.overlap_tolerance)) continue;

    std::vector<Vec3> before;
    for (int b = 1; b < world.body_count(); ++b) {
      before.push_back(world.body(b).state.position);
    }
    const int id = world.add_body(body);
    Trajectory traj;
    try {
      traj = world.settle(id, cfg.settle_steps, &cfg.thresholds);
    } catch (const SimulationDiverged&) {
      continue;
    }
    const StabilityReport rep = check_stability(traj, cfg.thresholds);
    if (!rep.stable) continue;
    bool drift_ok = true;
    if (cfg.enforce_committed_drift) {
      for (std::size_t b = 0; b < before.size(); ++b) {
        if ((world.body(static_cast<int>(b) + 1).state.position - before[b])
                .norm() > cfg.drift_tolerance) {
          drift_ok = false;
          break;
        }
      }
    }
    if (drift_ok) ++successes;
  }
  return static_cast<double>(successes) / test_cases.size();
}

double label_replay_stable_fraction(const PlacementDataset& dataset,
                                    const GeneratorConfig& cfg) {
  int total = 0, stable = 0;
  // One replay per underlying placement; jittered views share the label.
  std::set<std::tuple<int, std::string, long, long, long>> seen;
  for (const PlacementSample& s : dataset.samples) {
    const auto key = std::make_tuple(
        s.scene_id, s.snapshot.object.id, std::lround(s.pose.x() * 1e7),
        std::lround(s.pose.y() * 1e7), std::lround(s.pose.z() * 1e7));
    if (!seen.insert(key).second) continue;
    ++total;
    World world = world_from_snapshot(s.snapshot);
    const Pose pose = label_to_world(s.snapshot.region, s.pose, s.yaw);
    RigidBody body = s.snapshot.object.to_body();
    body.state.position = pose.position + Vec3(0, 0, cfg.drop_epsilon);
    body.state.orientation = yaw_quat(pose.yaw);
    const int id = world.add_body(body);
    try {
      const Trajectory traj = world.settle(id, cfg.settle_steps, &cfg.thresholds);
      if (check_stability(traj, cfg.thresholds).stable) ++stable;
    } catch (const SimulationDiverged&) {
    }
  }
  return total > 0 ? static_cast<double>(stable) / total : 0.0;
}

}  // namespace scenegen
